/**
 * End-to-end checks against the real correction service: the UI's screens
 * drive the live HTTP API and every mutation goes through the documented
 * endpoints only.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { StagedEditBuffer } from "../src/staged.js";
import { ConcordanceScreen } from "../src/views/concordance.js";
import { LinearReviewScreen } from "../src/views/linear.js";
import { UnallowedScreen } from "../src/views/unallowed.js";
import { type LiveService, startService } from "./server.js";

let service: LiveService;
let api: ApiClient;

beforeAll(async () => {
  service = await startService();
  api = new ApiClient(service.baseUrl);
});

afterAll(() => {
  service?.stop();
});

describe("linear review against the live service", () => {
  it("loads the first page in document order", async () => {
    const screen = new LinearReviewScreen(api, new StagedEditBuffer(), service.corpus, 5);
    await screen.load();
    expect(screen.total).toBe(11);
    expect(screen.rows[0].form).toBe("cheval");
    expect(screen.pageCount).toBe(3);
  });

  it("commits an edit and the exported TSV reflects it", async () => {
    const screen = new LinearReviewScreen(api, new StagedEditBuffer(), service.corpus, 50);
    await screen.load();
    const target = screen.rows.find((r) => r.form === "mont")!;
    screen.stageCell(target, "lemma", "mont_corrige");
    const accepted = await screen.commitCell(target, "lemma");
    expect(accepted).toBe(true);

    const exported = await api.exportTsv(service.corpus);
    expect(exported).toContain("mont\tmont_corrige\tNOMcom");

    // committed value visible on refetch
    await screen.load();
    const refetched = screen.rows.find((r) => r.form === "mont")!;
    expect(refetched.lemma).toBe("mont_corrige");

    // restore for later tests
    screen.stageCell(refetched, "lemma", "mont");
    await screen.commitCell(refetched, "lemma");
  });

  it("a rejected edit stays staged with the server's error", async () => {
    const screen = new LinearReviewScreen(api, new StagedEditBuffer(), service.corpus, 50);
    await screen.load();
    const target = screen.rows[0];
    screen.stageCell(target, "pos", "NOT OK!");
    const accepted = await screen.commitCell(target, "pos");
    expect(accepted).toBe(false);
    const kept = screen.staged.get(service.corpus, target.sentence, target.token, "pos");
    expect(kept?.value).toBe("NOT OK!");
    expect(kept?.error).toBeTruthy();
    // server state unchanged
    await screen.load();
    expect(screen.rows[0].pos).toBe("NOMcom");
  });
});

describe("concordance against the live service", () => {
  it("previews Table-1-style spelling variants with che*", async () => {
    const screen = new ConcordanceScreen(api, service.corpus);
    screen.setFilter("form", "che*");
    const preview = await screen.runPreview();
    expect(preview.total).toBe(2);
    expect(preview.matches.map((m) => m.form).sort()).toEqual(["cheual", "cheval"]);
    expect(preview.matches[0].context.length).toBeGreaterThan(1);
  });

  it("applied count equals the previewed count and reaches the export", async () => {
    const screen = new ConcordanceScreen(api, service.corpus);
    screen.setFilter("form", "che*");
    const preview = await screen.runPreview();
    const applied = await screen.applyToAll("lemma", "cheval2");
    expect(applied).toBe(preview.total);

    const exported = await api.exportTsv(service.corpus);
    expect(exported.match(/cheval2/g)).toHaveLength(2);

    // restore
    screen.setFilter("lemma", "cheval2");
    screen.setFilter("form", "");
    await screen.runPreview();
    await screen.applyToAll("lemma", "cheval");
  });

  it("detects a stale preview after a concurrent edit", async () => {
    const screen = new ConcordanceScreen(api, service.corpus);
    screen.setFilter("lemma", "là");
    const preview = await screen.runPreview();
    expect(preview.total).toBe(1);

    // another client changes the match set between preview and apply
    const other = new ApiClient(service.baseUrl);
    const match = preview.matches[0];
    await other.editToken(service.corpus, match.sentence, match.token, "lemma", "ailleurs");

    const result = await screen.applyToAll("lemma", "là2");
    expect(result).toBe(-1);
    expect(screen.warning).toMatch(/preview again/);
    expect(screen.preview).toBeNull();

    // restore
    await other.editToken(service.corpus, match.sentence, match.token, "lemma", "là");
  });
});

describe("unallowed triage against the live service", () => {
  it("lists an introduced violation and clears it after correction", async () => {
    const staged = new StagedEditBuffer();
    const linear = new LinearReviewScreen(api, staged, service.corpus, 50);
    await linear.load();
    const target = linear.rows.find((r) => r.form === "veez")!;

    const triage = new UnallowedScreen(api, service.corpus);
    await triage.load();
    expect(triage.isClean).toBe(true);

    linear.stageCell(target, "lemma", "zzz9");
    await linear.commitCell(target, "lemma");
    await triage.load();
    expect(triage.items).toHaveLength(1);
    expect(triage.items[0]).toMatchObject({
      kind: "lemma",
      value: "zzz9",
      sentence: target.sentence,
      token: target.token,
    });

    // click-through target resolves to the offending token
    const jumpIndex = await linear.jumpTo(triage.items[0].sentence, triage.items[0].token);
    expect(linear.rows[jumpIndex].form).toBe("veez");

    linear.stageCell(linear.rows[jumpIndex], "lemma", "vëoir");
    await linear.commitCell(linear.rows[jumpIndex], "lemma");
    await triage.load();
    expect(triage.isClean).toBe(true);
  });
});

describe("interface discipline", () => {
  it("the UI only ever talks to the documented endpoints", () => {
    const documented = [
      /^GET \/corpora$/,
      /^GET \/corpus\/[^/]+\/tokens\?offset=\d+&limit=\d+$/,
      /^POST \/corpus\/[^/]+\/search$/,
      /^POST \/corpus\/[^/]+\/batch-edit$/,
      /^GET \/corpus\/[^/]+\/unallowed$/,
      /^GET \/corpus\/[^/]+\/export$/,
      /^POST \/tag$/,
    ];
    expect(api.requestLog.length).toBeGreaterThan(10);
    for (const entry of api.requestLog) {
      const line = `${entry.method} ${entry.path}`;
      expect(
        documented.some((pattern) => pattern.test(line)),
        `undocumented request: ${line}`,
      ).toBe(true);
    }
    // mutations happen exclusively through batch-edit
    const mutations = api.requestLog.filter((e) => e.method !== "GET");
    expect(mutations.every((e) => /\/(batch-edit|search|tag)$/.test(e.path))).toBe(true);
  });
});
