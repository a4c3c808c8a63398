/**
 * Unallowed-value triage: the reference-list violations reported by the
 * server, with click-through to the offending token in the linear view.
 */

import { CorrectionApi, UnallowedIssue } from "../api.js";

export type IssueKind = "lemma" | "pos" | "morph";

export interface TriageItem extends UnallowedIssue {
  kind: IssueKind;
}

export class UnallowedScreen {
  items: TriageItem[] = [];
  loaded = false;

  constructor(
    private readonly api: CorrectionApi,
    readonly corpus: string,
  ) {}

  async load(): Promise<void> {
    const report = await this.api.unallowed(this.corpus);
    this.items = [
      ...report.unallowed_lemmas.map((i) => ({ ...i, kind: "lemma" as IssueKind })),
      ...report.unallowed_pos.map((i) => ({ ...i, kind: "pos" as IssueKind })),
      ...report.unallowed_morph.map((i) => ({ ...i, kind: "morph" as IssueKind })),
    ];
    this.loaded = true;
  }

  get isClean(): boolean {
    return this.loaded && this.items.length === 0;
  }
}

export function renderUnallowed(
  screen: UnallowedScreen,
  container: HTMLElement,
  onJump: (item: TriageItem) => void,
): void {
  container.innerHTML = "";
  if (screen.isClean) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No unallowed values — the corpus is clean.";
    container.appendChild(empty);
    return;
  }
  const list = document.createElement("ul");
  list.className = "unallowed";
  for (const item of screen.items) {
    const entry = document.createElement("li");
    const link = document.createElement("a");
    link.href = `#linear/${item.sentence}/${item.token}`;
    link.textContent = `${item.kind}: "${item.value}" at ${item.sentence}:${item.token}`;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      onJump(item);
    });
    entry.appendChild(link);
    list.appendChild(entry);
  }
  container.appendChild(list);
}
