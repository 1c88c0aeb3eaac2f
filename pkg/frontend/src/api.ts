/** Thin client for the scanner's review API. All numbers displayed by the UI
 * come from these endpoints; nothing is recomputed client-side. */

export interface DensityPayload {
  display: string;
  ratio: number | null;
  kind: string;
}

export interface ResultSummary {
  schema: number;
  files: number;
  physical_lines: number;
  code_lines: number;
  comment_lines: number;
  blank_lines: number;
  findings: number;
  pack_name: string;
  pack_version: string;
  severity_histogram: Record<string, number>;
  density: DensityPayload;
  language_proportions: { language: string; percent: number }[];
}

export interface FindingRow {
  fingerprint: string;
  rule_id: string;
  title: string;
  severity: string;
  severity_label: string;
  path: string;
  line: number;
  snippet: string;
  description: string;
  state: string;
}

export interface FindingsPage {
  schema: number;
  total: number;
  page: number;
  page_size: number;
  counts: { total: number; open: number; suppressed: number };
  findings: FindingRow[];
}

export interface SourceLine {
  line: number;
  text: string;
  marked: boolean;
}

export interface SourceExcerpt {
  schema: number;
  path: string;
  start_line: number;
  marked_line: number;
  lines: SourceLine[];
}

export interface TriageResponse {
  schema: number;
  record: {
    fingerprint: string;
    state: string;
    note: string;
    annotator: string;
    updated_at: string;
  };
  warnings: string[];
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private base = "",
    private fetchImpl: FetchLike = fetch.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `API unreachable: ${String(err)}`);
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail = (body as { error?: string }).error ?? response.statusText;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  getResult(): Promise<ResultSummary> {
    return this.request("/api/result");
  }

  getFindings(page = 1, pageSize = 500): Promise<FindingsPage> {
    const params = new URLSearchParams({
      page: String(page),
      page_size: String(pageSize),
    });
    return this.request(`/api/findings?${params}`);
  }

  getSource(path: string, line: number, context: number): Promise<SourceExcerpt> {
    const params = new URLSearchParams({
      path,
      line: String(line),
      context: String(context),
    });
    return this.request(`/api/source?${params}`);
  }

  setTriage(
    fingerprint: string,
    state: string,
    note = "",
    annotator = "",
  ): Promise<TriageResponse> {
    return this.request(`/api/findings/${fingerprint}/triage`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ state, note, annotator }),
    });
  }

  /** Fetch every page of findings so filters and sorts work locally. */
  async getAllFindings(): Promise<{
    findings: FindingRow[];
    counts: FindingsPage["counts"];
  }> {
    const pageSize = 500;
    const first = await this.getFindings(1, pageSize);
    const findings = [...first.findings];
    let page = 2;
    while (findings.length < first.total) {
      const next = await this.getFindings(page, pageSize);
      if (next.findings.length === 0) break;
      findings.push(...next.findings);
      page += 1;
    }
    return { findings, counts: first.counts };
  }
}
