/**
 * Concordance: query tokens across the corpus and apply one correction to
 * every match.  Apply always re-checks the preview count server-side; if
 * the corpus changed in between, the server answers 409 and the reviewer
 * must preview again.
 */

import {
  ApiError,
  CorrectionApi,
  EditableColumn,
  FilterColumn,
  SearchResult,
} from "../api.js";

export class ConcordanceScreen {
  filters: Partial<Record<FilterColumn, string>> = {};
  preview: SearchResult | null = null;
  warning: string | null = null;
  lastApplied: number | null = null;

  constructor(
    private readonly api: CorrectionApi,
    readonly corpus: string,
    readonly contextWindow = 3,
  ) {}

  setFilter(column: FilterColumn, value: string): void {
    if (value) {
      this.filters[column] = value;
    } else {
      delete this.filters[column];
    }
    // any change invalidates the previewed match set
    this.preview = null;
    this.lastApplied = null;
  }

  get hasFilters(): boolean {
    return Object.values(this.filters).some((v) => v);
  }

  async runPreview(): Promise<SearchResult> {
    this.warning = null;
    this.preview = await this.api.search(this.corpus, this.filters, {
      context: this.contextWindow,
      limit: 200,
    });
    return this.preview;
  }

  /** Apply is only allowed on a fresh preview with at least one match. */
  get applyDisabled(): boolean {
    return this.preview === null || this.preview.total === 0;
  }

  /**
   * Batch-apply a value to every previewed match.  The server enforces
   * that the match count still equals the previewed count; on a stale
   * preview it refuses and the preview is cleared.
   */
  async applyToAll(column: EditableColumn, value: string): Promise<number> {
    if (this.preview === null) throw new Error("preview required before apply");
    if (this.preview.total === 0) throw new Error("nothing to apply");
    try {
      const edited = await this.api.batchEdit(this.corpus, {
        column,
        value,
        filters: this.filters,
        expected_count: this.preview.total,
      });
      this.lastApplied = edited;
      this.preview = null;
      return edited;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.warning = `match count changed on the server (${error.detail}); preview again`;
        this.preview = null;
        this.lastApplied = null;
        return -1;
      }
      throw error;
    }
  }
}

export function renderConcordance(screen: ConcordanceScreen, container: HTMLElement): void {
  container.innerHTML = "";
  const form = document.createElement("div");
  form.className = "query-builder";
  for (const column of ["form", "lemma", "pos", "morph"] as FilterColumn[]) {
    const input = document.createElement("input");
    input.placeholder = `${column} (trailing * allowed)`;
    input.value = screen.filters[column] ?? "";
    input.addEventListener("change", () => {
      screen.setFilter(column, input.value.trim());
    });
    form.appendChild(input);
  }
  const previewButton = document.createElement("button");
  previewButton.textContent = "Preview";
  previewButton.addEventListener("click", () => {
    void screen.runPreview().then(() => renderConcordance(screen, container));
  });
  form.appendChild(previewButton);
  container.appendChild(form);

  if (screen.warning) {
    const warning = document.createElement("p");
    warning.className = "warning";
    warning.textContent = screen.warning;
    container.appendChild(warning);
  }

  if (screen.preview) {
    const count = document.createElement("p");
    count.textContent = `${screen.preview.total} matches`;
    container.appendChild(count);

    const apply = document.createElement("div");
    const columnSelect = document.createElement("select");
    for (const column of ["lemma", "pos", "morph"]) {
      const option = document.createElement("option");
      option.value = column;
      option.textContent = column;
      columnSelect.appendChild(option);
    }
    const valueInput = document.createElement("input");
    valueInput.placeholder = "new value";
    const applyButton = document.createElement("button");
    applyButton.textContent = `Apply to all ${screen.preview.total}`;
    applyButton.disabled = screen.applyDisabled;
    applyButton.addEventListener("click", () => {
      void screen
        .applyToAll(columnSelect.value as EditableColumn, valueInput.value)
        .then(() => renderConcordance(screen, container));
    });
    apply.append(columnSelect, valueInput, applyButton);
    container.appendChild(apply);

    const list = document.createElement("ul");
    list.className = "matches";
    for (const match of screen.preview.matches) {
      const item = document.createElement("li");
      item.textContent = match.context
        .map((t) => (t.token === match.token ? `[${t.form}]` : t.form))
        .join(" ");
      list.appendChild(item);
    }
    container.appendChild(list);
  }

  if (screen.lastApplied !== null) {
    const note = document.createElement("p");
    note.textContent = `applied to ${screen.lastApplied} tokens`;
    container.appendChild(note);
  }
}
