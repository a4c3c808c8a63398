/**
 * Staged-edit buffer: cell edits live here until the server accepts them,
 * so a failed or offline commit never loses the reviewer's input.  The
 * buffer belongs to the session and survives navigation between screens.
 */

import type { EditableColumn, TokenRow } from "./api.js";

export interface StagedEdit {
  corpus: string;
  sentence: number;
  token: number;
  column: EditableColumn;
  value: string;
  /** set when the last commit attempt was rejected or failed */
  error?: string;
}

function keyOf(corpus: string, sentence: number, token: number, column: string): string {
  return `${corpus}:${sentence}:${token}:${column}`;
}

export class StagedEditBuffer {
  private edits = new Map<string, StagedEdit>();

  get size(): number {
    return this.edits.size;
  }

  stage(edit: StagedEdit): void {
    this.edits.set(keyOf(edit.corpus, edit.sentence, edit.token, edit.column), {
      ...edit,
      error: undefined,
    });
  }

  get(
    corpus: string,
    sentence: number,
    token: number,
    column: EditableColumn,
  ): StagedEdit | undefined {
    return this.edits.get(keyOf(corpus, sentence, token, column));
  }

  clear(corpus: string, sentence: number, token: number, column: EditableColumn): void {
    this.edits.delete(keyOf(corpus, sentence, token, column));
  }

  markError(edit: StagedEdit, message: string): void {
    this.edits.set(keyOf(edit.corpus, edit.sentence, edit.token, edit.column), {
      ...edit,
      error: message,
    });
  }

  all(corpus?: string): StagedEdit[] {
    const edits = [...this.edits.values()];
    return corpus === undefined ? edits : edits.filter((e) => e.corpus === corpus);
  }

  /** Row as the reviewer currently sees it: staged values over server state. */
  overlay(corpus: string, row: TokenRow): TokenRow {
    const out = { ...row };
    for (const column of ["lemma", "pos", "morph"] as EditableColumn[]) {
      const staged = this.get(corpus, row.sentence, row.token, column);
      if (staged) out[column] = staged.value;
    }
    return out;
  }
}
