import { describe, expect, it } from "vitest";

import type { TokenRow } from "../src/api.js";
import { StagedEditBuffer } from "../src/staged.js";

const row: TokenRow = {
  sentence: 2,
  token: 1,
  form: "veez",
  lemma: "vëoir",
  pos: "VERcjg",
  morph: "_",
};

describe("StagedEditBuffer", () => {
  it("stages, overlays and clears cell edits", () => {
    const buffer = new StagedEditBuffer();
    buffer.stage({ corpus: "demo", sentence: 2, token: 1, column: "lemma", value: "vëoir2" });
    expect(buffer.size).toBe(1);
    expect(buffer.overlay("demo", row).lemma).toBe("vëoir2");
    expect(buffer.overlay("demo", row).pos).toBe("VERcjg");
    // a different corpus is unaffected
    expect(buffer.overlay("other", row).lemma).toBe("vëoir");

    buffer.clear("demo", 2, 1, "lemma");
    expect(buffer.size).toBe(0);
    expect(buffer.overlay("demo", row).lemma).toBe("vëoir");
  });

  it("restaging the same cell replaces the previous value", () => {
    const buffer = new StagedEditBuffer();
    buffer.stage({ corpus: "g", sentence: 0, token: 0, column: "pos", value: "A" });
    buffer.stage({ corpus: "g", sentence: 0, token: 0, column: "pos", value: "B" });
    expect(buffer.size).toBe(1);
    expect(buffer.get("g", 0, 0, "pos")?.value).toBe("B");
  });

  it("keeps the edit with an error badge after a failed commit", () => {
    const buffer = new StagedEditBuffer();
    const edit = { corpus: "g", sentence: 0, token: 0, column: "pos" as const, value: "X" };
    buffer.stage(edit);
    buffer.markError(edit, "503 service unavailable");
    const kept = buffer.get("g", 0, 0, "pos");
    expect(kept?.value).toBe("X");
    expect(kept?.error).toMatch(/503/);
    // re-staging clears the stale error
    buffer.stage({ ...edit, value: "Y" });
    expect(buffer.get("g", 0, 0, "pos")?.error).toBeUndefined();
  });

  it("lists edits per corpus", () => {
    const buffer = new StagedEditBuffer();
    buffer.stage({ corpus: "a", sentence: 0, token: 0, column: "lemma", value: "x" });
    buffer.stage({ corpus: "b", sentence: 0, token: 0, column: "lemma", value: "y" });
    expect(buffer.all()).toHaveLength(2);
    expect(buffer.all("a")).toHaveLength(1);
  });
});
