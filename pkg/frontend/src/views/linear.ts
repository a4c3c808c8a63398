/**
 * Linear review: page through the corpus from start to finish, editing
 * lemma/pos/morph cells inline.  A cell commit is a single-token batch
 * edit; on failure the value stays staged with an error badge.
 */

import { ApiError, CorrectionApi, EditableColumn, TokenRow } from "../api.js";
import { morphPreview } from "../morph.js";
import { StagedEditBuffer } from "../staged.js";

export class LinearReviewScreen {
  rows: TokenRow[] = [];
  total = 0;
  page = 0;
  validityFlags = new Map<string, string[]>();

  constructor(
    private readonly api: CorrectionApi,
    readonly staged: StagedEditBuffer,
    readonly corpus: string,
    readonly pageSize = 50,
  ) {}

  get pageCount(): number {
    return Math.max(1, Math.ceil(this.total / this.pageSize));
  }

  get hasPrev(): boolean {
    return this.page > 0;
  }

  /** false on the final page: the PgDn control is disabled there. */
  get hasNext(): boolean {
    return this.page + 1 < this.pageCount;
  }

  async load(page = this.page): Promise<void> {
    const result = await this.api.getTokens(this.corpus, page * this.pageSize, this.pageSize);
    this.rows = result.tokens;
    this.total = result.total;
    this.page = page;
  }

  async nextPage(): Promise<void> {
    if (this.hasNext) await this.load(this.page + 1);
  }

  async prevPage(): Promise<void> {
    if (this.hasPrev) await this.load(this.page - 1);
  }

  /** Jump to the page containing a (sentence, token) coordinate. */
  async jumpTo(sentence: number, token: number): Promise<number> {
    let offset = 0;
    for (;;) {
      const page = await this.api.getTokens(this.corpus, offset, this.pageSize);
      const index = page.tokens.findIndex(
        (row) => row.sentence === sentence && row.token === token,
      );
      if (index >= 0) {
        this.rows = page.tokens;
        this.total = page.total;
        this.page = Math.floor(offset / this.pageSize);
        return index;
      }
      offset += this.pageSize;
      if (offset >= page.total) throw new Error(`token ${sentence}:${token} not found`);
    }
  }

  /** The row as displayed: staged edits overlaid on server state. */
  displayed(row: TokenRow): TokenRow {
    return this.staged.overlay(this.corpus, row);
  }

  stageCell(row: TokenRow, column: EditableColumn, value: string): void {
    this.staged.stage({
      corpus: this.corpus,
      sentence: row.sentence,
      token: row.token,
      column,
      value,
    });
  }

  /**
   * Push one staged cell to the server.  Returns true when accepted (the
   * stage entry is dropped and the page refetched); on rejection the edit
   * stays staged with the error message attached.
   */
  async commitCell(row: TokenRow, column: EditableColumn): Promise<boolean> {
    const staged = this.staged.get(this.corpus, row.sentence, row.token, column);
    if (!staged) return true;
    try {
      await this.api.editToken(this.corpus, row.sentence, row.token, column, staged.value);
    } catch (error) {
      const message =
        error instanceof ApiError ? error.detail : "network error; edit kept locally";
      this.staged.markError(staged, message);
      return false;
    }
    this.staged.clear(this.corpus, row.sentence, row.token, column);
    await this.load();
    return true;
  }
}

const COLUMNS: EditableColumn[] = ["lemma", "pos", "morph"];

export function renderLinear(screen: LinearReviewScreen, container: HTMLElement): void {
  container.innerHTML = "";
  const table = document.createElement("table");
  table.className = "token-table";
  const head = table.createTHead().insertRow();
  for (const name of ["#", "form", ...COLUMNS]) {
    const cell = document.createElement("th");
    cell.textContent = name;
    head.appendChild(cell);
  }
  const body = table.createTBody();
  for (const raw of screen.rows) {
    const row = screen.displayed(raw);
    const tr = body.insertRow();
    tr.insertCell().textContent = `${row.sentence}:${row.token}`;
    tr.insertCell().textContent = row.form;
    for (const column of COLUMNS) {
      const cell = tr.insertCell();
      cell.setAttribute("contenteditable", "true");
      cell.textContent = row[column];
      const staged = screen.staged.get(screen.corpus, row.sentence, row.token, column);
      if (staged) cell.classList.add(staged.error ? "staged-error" : "staged");
      if (staged?.error) cell.title = staged.error;
      if (column === "morph") {
        // live split/join preview mirroring the server's semantics
        // (advisory only; the server stays authoritative)
        const updatePreview = () => {
          const preview = morphPreview(cell.textContent ?? "");
          cell.classList.toggle("morph-invalid", !preview.ok);
          cell.title = preview.ok
            ? `canonical: ${preview.canonical}`
            : `invalid morph: ${preview.error}`;
        };
        updatePreview();
        cell.addEventListener("input", updatePreview);
      }
      cell.addEventListener("blur", () => {
        const value = cell.textContent ?? "";
        if (value !== raw[column]) {
          screen.stageCell(raw, column, value);
          void screen.commitCell(raw, column).then(() => renderLinear(screen, container));
        }
      });
    }
  }
  container.appendChild(table);

  const nav = document.createElement("div");
  nav.className = "pager";
  const prev = document.createElement("button");
  prev.textContent = "PgUp";
  prev.disabled = !screen.hasPrev;
  prev.addEventListener("click", () => {
    void screen.prevPage().then(() => renderLinear(screen, container));
  });
  const next = document.createElement("button");
  next.textContent = "PgDn";
  next.disabled = !screen.hasNext;
  next.addEventListener("click", () => {
    void screen.nextPage().then(() => renderLinear(screen, container));
  });
  const label = document.createElement("span");
  label.textContent = `page ${screen.page + 1}/${screen.pageCount}`;
  nav.append(prev, label, next);
  container.appendChild(nav);

  container.onkeydown = (event) => {
    if (event.key === "PageDown" && screen.hasNext) {
      event.preventDefault();
      void screen.nextPage().then(() => renderLinear(screen, container));
    } else if (event.key === "PageUp" && screen.hasPrev) {
      event.preventDefault();
      void screen.prevPage().then(() => renderLinear(screen, container));
    }
  };
}
