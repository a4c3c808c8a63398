/**
 * Typed client for the correction service JSON API.
 *
 * Every request is recorded in `requestLog`; integration tests use the log
 * to verify the UI never mutates state outside the documented endpoints.
 */

export type EditableColumn = "lemma" | "pos" | "morph";
export type FilterColumn = "form" | EditableColumn;

export interface CorpusInfo {
  id: string;
  sentences: number;
  tokens: number;
}

export interface TokenRow {
  sentence: number;
  token: number;
  form: string;
  lemma: string;
  pos: string;
  morph: string;
}

export interface TokenPage {
  total: number;
  offset: number;
  limit: number;
  tokens: TokenRow[];
}

export interface SearchMatch extends TokenRow {
  context: TokenRow[];
}

export interface SearchResult {
  total: number;
  matches: SearchMatch[];
}

export interface UnallowedIssue {
  doc: string;
  sentence: number;
  token: number;
  value: string;
}

export interface UnallowedReport {
  unallowed_lemmas: UnallowedIssue[];
  unallowed_pos: UnallowedIssue[];
  unallowed_morph: UnallowedIssue[];
}

export interface BatchEditRequest {
  column: EditableColumn;
  value: string;
  filters?: Partial<Record<FilterColumn, string>>;
  sentence?: number;
  token?: number;
  expected_count?: number;
}

export interface RequestLogEntry {
  method: string;
  path: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

/** The service surface the screens depend on (stubbed in unit tests). */
export interface CorrectionApi {
  listCorpora(): Promise<CorpusInfo[]>;
  getTokens(corpus: string, offset?: number, limit?: number): Promise<TokenPage>;
  search(
    corpus: string,
    filters: Partial<Record<FilterColumn, string>>,
    options?: { offset?: number; limit?: number; context?: number },
  ): Promise<SearchResult>;
  batchEdit(corpus: string, edit: BatchEditRequest): Promise<number>;
  editToken(
    corpus: string,
    sentence: number,
    token: number,
    column: EditableColumn,
    value: string,
  ): Promise<number>;
  unallowed(corpus: string): Promise<UnallowedReport>;
  exportTsv(corpus: string): Promise<string>;
}

type FetchLike = typeof fetch;

export class ApiClient implements CorrectionApi {
  readonly requestLog: RequestLogEntry[] = [];

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    this.requestLog.push({ method, path });
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = await response.json();
        if (payload && typeof payload.detail === "string") detail = payload.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  async listCorpora(): Promise<CorpusInfo[]> {
    const response = await this.request("GET", "/corpora");
    return (await response.json()).corpora;
  }

  async getTokens(corpus: string, offset = 0, limit = 50): Promise<TokenPage> {
    const response = await this.request(
      "GET",
      `/corpus/${corpus}/tokens?offset=${offset}&limit=${limit}`,
    );
    return response.json();
  }

  async search(
    corpus: string,
    filters: Partial<Record<FilterColumn, string>>,
    options: { offset?: number; limit?: number; context?: number } = {},
  ): Promise<SearchResult> {
    const response = await this.request("POST", `/corpus/${corpus}/search`, {
      filters,
      offset: options.offset ?? 0,
      limit: options.limit ?? 50,
      context: options.context ?? 3,
    });
    return response.json();
  }

  async batchEdit(corpus: string, edit: BatchEditRequest): Promise<number> {
    const response = await this.request("POST", `/corpus/${corpus}/batch-edit`, edit);
    return (await response.json()).edited;
  }

  /** Single-cell commit: a batch edit targeting one token by coordinates. */
  editToken(
    corpus: string,
    sentence: number,
    token: number,
    column: EditableColumn,
    value: string,
  ): Promise<number> {
    return this.batchEdit(corpus, { column, value, sentence, token });
  }

  async unallowed(corpus: string): Promise<UnallowedReport> {
    const response = await this.request("GET", `/corpus/${corpus}/unallowed`);
    return response.json();
  }

  async exportTsv(corpus: string): Promise<string> {
    const response = await this.request("GET", `/corpus/${corpus}/export`);
    return response.text();
  }
}
