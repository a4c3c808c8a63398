/**
 * Application shell: corpus picker, screen navigation, shared session
 * state.  The staged-edit buffer lives on the session, so navigating
 * between screens keeps uncommitted edits.
 */

import { ApiClient, CorrectionApi } from "./api.js";
import { StagedEditBuffer } from "./staged.js";
import { LinearReviewScreen, renderLinear } from "./views/linear.js";
import { ConcordanceScreen, renderConcordance } from "./views/concordance.js";
import { TriageItem, UnallowedScreen, renderUnallowed } from "./views/unallowed.js";

type ScreenName = "linear" | "concordance" | "unallowed";

export class Session {
  readonly staged = new StagedEditBuffer();
  linear: LinearReviewScreen | null = null;
  concordance: ConcordanceScreen | null = null;
  unallowed: UnallowedScreen | null = null;

  constructor(
    readonly api: CorrectionApi,
    public corpus: string,
  ) {
    this.selectCorpus(corpus);
  }

  selectCorpus(corpus: string): void {
    this.corpus = corpus;
    this.linear = new LinearReviewScreen(this.api, this.staged, corpus);
    this.concordance = new ConcordanceScreen(this.api, corpus);
    this.unallowed = new UnallowedScreen(this.api, corpus);
  }
}

export async function mountApp(
  root: HTMLElement,
  baseUrl = "",
  api: CorrectionApi = new ApiClient(baseUrl),
): Promise<void> {
  const corpora = await api.listCorpora();
  if (corpora.length === 0) {
    root.textContent = "No corpora available.";
    return;
  }
  const session = new Session(api, corpora[0].id);

  root.innerHTML = `
    <header>
      <select id="corpus-picker"></select>
      <nav>
        <button data-screen="linear">Linear review</button>
        <button data-screen="concordance">Concordance</button>
        <button data-screen="unallowed">Unallowed</button>
      </nav>
    </header>
    <main id="screen"></main>
  `;
  const picker = root.querySelector<HTMLSelectElement>("#corpus-picker")!;
  for (const corpus of corpora) {
    const option = document.createElement("option");
    option.value = corpus.id;
    option.textContent = `${corpus.id} (${corpus.tokens} tokens)`;
    picker.appendChild(option);
  }
  const screenHost = root.querySelector<HTMLElement>("#screen")!;

  async function show(name: ScreenName, jump?: TriageItem): Promise<void> {
    if (name === "linear") {
      const screen = session.linear!;
      if (jump) {
        await screen.jumpTo(jump.sentence, jump.token);
      } else {
        await screen.load();
      }
      renderLinear(screen, screenHost);
    } else if (name === "concordance") {
      renderConcordance(session.concordance!, screenHost);
    } else {
      await session.unallowed!.load();
      renderUnallowed(session.unallowed!, screenHost, (item) => {
        void show("linear", item);
      });
    }
  }

  picker.addEventListener("change", () => {
    session.selectCorpus(picker.value);
    void show("linear");
  });
  for (const button of root.querySelectorAll<HTMLButtonElement>("nav button")) {
    button.addEventListener("click", () => {
      void show(button.dataset.screen as ScreenName);
    });
  }
  await show("linear");
}
