/**
 * Client-side mirror of the server's composite-morph semantics, used to
 * preview how an edited morph string decomposes before submitting.
 * Validation here is advisory; the server stays authoritative.
 */

export const CATEGORIES = [
  "CAS",
  "DEGRE",
  "GENRE",
  "MODE",
  "NOMB",
  "PERS",
  "TEMPS",
] as const;

export type Category = (typeof CATEGORIES)[number];
export type MorphVector = Record<Category, string>;

const JOIN_ORDER: Category[] = ["NOMB", "GENRE", "CAS", "DEGRE", "MODE", "TEMPS", "PERS"];
const EMPTY_MARKER = "_";
const MORPH_EMPTY = "MORPH=empty";
const EMPTY_VALUE = "empty";

export class MorphSyntaxError extends Error {}

function normalizeCategory(name: string): string {
  return name.endsWith(".") ? name.slice(0, -1) : name;
}

function writeName(category: Category): string {
  return category === "NOMB" ? "NOMB." : category;
}

export function emptyVector(): MorphVector {
  return Object.fromEntries(CATEGORIES.map((c) => [c, EMPTY_MARKER])) as MorphVector;
}

export function splitMorph(composite: string): MorphVector {
  if (composite === EMPTY_MARKER || composite === MORPH_EMPTY || composite === "") {
    return emptyVector();
  }
  const segments = composite.split("+");
  const perSegment: Array<Partial<Record<Category, string>>> = segments.map((segment) => {
    const values: Partial<Record<Category, string>> = {};
    if (segment === MORPH_EMPTY) return values;
    for (const pair of segment.split("|")) {
      const eq = pair.indexOf("=");
      if (eq <= 0) throw new MorphSyntaxError(`malformed morph pair "${pair}"`);
      const category = normalizeCategory(pair.slice(0, eq));
      if (!(CATEGORIES as readonly string[]).includes(category)) {
        throw new MorphSyntaxError(`unknown morph category "${category}"`);
      }
      if (values[category as Category] !== undefined) {
        throw new MorphSyntaxError(`duplicate category "${category}"`);
      }
      values[category as Category] = pair.slice(eq + 1);
    }
    return values;
  });

  const vector = emptyVector();
  for (const category of CATEGORIES) {
    if (!perSegment.some((seg) => seg[category] !== undefined)) continue;
    if (perSegment.length === 1) {
      vector[category] = perSegment[0][category]!;
    } else {
      vector[category] = perSegment
        .map((seg) => seg[category] ?? EMPTY_VALUE)
        .join("+");
    }
  }
  return vector;
}

export function joinMorph(vector: MorphVector): string {
  const filled = JOIN_ORDER.filter((c) => vector[c] !== EMPTY_MARKER);
  if (filled.length === 0) return MORPH_EMPTY;

  const nSegments = Math.max(...filled.map((c) => vector[c].split("+").length));
  if (nSegments === 1) {
    return filled.map((c) => `${writeName(c)}=${vector[c]}`).join("|");
  }
  const parts = new Map(
    filled.map((c) => {
      const split = vector[c].split("+");
      while (split.length < nSegments) split.push(EMPTY_VALUE);
      return [c, split];
    }),
  );
  const segments: string[] = [];
  for (let i = 0; i < nSegments; i += 1) {
    const pairs = filled
      .filter((c) => parts.get(c)![i] !== EMPTY_VALUE)
      .map((c) => `${writeName(c)}=${parts.get(c)![i]}`);
    segments.push(pairs.length ? pairs.join("|") : MORPH_EMPTY);
  }
  return segments.join("+");
}

export interface MorphPreview {
  ok: boolean;
  vector?: MorphVector;
  canonical?: string;
  error?: string;
}

/** Decompose an edited composite string for display next to the edit cell. */
export function morphPreview(composite: string): MorphPreview {
  try {
    const vector = splitMorph(composite.trim());
    return { ok: true, vector, canonical: joinMorph(vector) };
  } catch (error) {
    if (error instanceof MorphSyntaxError) {
      return { ok: false, error: error.message };
    }
    throw error;
  }
}
