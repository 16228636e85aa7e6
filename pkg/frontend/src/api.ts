// Typed client for the summary-server and document-server endpoints.
// Every piece of policy (delivery modes, icons, rights) arrives computed
// from the server; this module only moves JSON around.

export type IconState =
  | 'ElectronicLocal'
  | 'CachedFast'
  | 'PaperShared'
  | 'MailOnly'
  | 'Unavailable';

export interface JournalEntry {
  issn: string;
  title: string;
  domains: string[];
  editor: string;
}

export interface DomainGroup {
  domain: string;
  journals: JournalEntry[];
}

export interface ArticleRow {
  key: string;
  seq: number;
  title: string;
  authors: string[];
  pages: { first: number; last: number };
  icon: IconState;
}

export interface IssueRow {
  volume: number;
  issue: number;
  date: string;
  key: string;
  articles: ArticleRow[];
}

export interface IssuesResponse {
  issn: string;
  journal: string | null;
  issues: IssueRow[];
}

export interface SearchHit {
  article_key: string;
  journal_title: string;
  article_title: string;
  authors: string[];
  score: number;
}

export interface RequestOutcome {
  request_id: string;
  article_key: string;
  status: 'ready' | 'deferred';
  plan: { mode: string; source_institution: string | null };
  locator: string | null;
  message: string;
  job_id: string | null;
  job_institution: string | null;
}

export interface AlertSubscription {
  id: string;
  email: string;
  issns: string[];
  created: string;
  active: boolean;
}

export interface JobRow {
  id: string;
  kind: 'print' | 'mail';
  article_key: string;
  state: 'queued' | 'done' | 'failed';
  needs_digitalization: boolean;
  printer_id: string | null;
  postal_address: string | null;
  detail: string;
}

export class ApiError extends Error {
  constructor(
    readonly code: string,
    readonly status: number,
    detail: string
  ) {
    super(`${code}: ${detail}`);
  }
}

export class AuthRequiredError extends ApiError {
  constructor(detail = 'admin token required') {
    super('AuthRequired', 401, detail);
  }
}

async function check<T>(resp: Response): Promise<T> {
  if (resp.ok) {
    return (await resp.json()) as T;
  }
  let code = 'HttpError';
  let detail = resp.statusText;
  try {
    const body = (await resp.json()) as { error?: string; detail?: string };
    code = body.error ?? code;
    detail = body.detail ?? detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  if (resp.status === 401) {
    throw new AuthRequiredError(detail);
  }
  throw new ApiError(code, resp.status, detail);
}

export class GatewayClient {
  constructor(
    readonly baseUrl: string,
    private adminToken: string | null = null,
    private fetchFn: typeof fetch = (...args) => fetch(...args)
  ) {}

  setAdminToken(token: string | null): void {
    this.adminToken = token;
  }

  hasAdminToken(): boolean {
    return this.adminToken !== null && this.adminToken !== '';
  }

  private adminHeaders(): Record<string, string> {
    if (!this.hasAdminToken()) {
      throw new AuthRequiredError();
    }
    return { Authorization: `Bearer ${this.adminToken}` };
  }

  // -- browse and search -------------------------------------------------

  async listJournals(domain?: string): Promise<DomainGroup[]> {
    const q = domain ? `?domain=${encodeURIComponent(domain)}` : '';
    const body = await check<{ domains: DomainGroup[] }>(
      await this.fetchFn(`${this.baseUrl}/journals${q}`)
    );
    return body.domains;
  }

  async listIssues(issn: string, category?: string): Promise<IssuesResponse> {
    const q = category ? `?category=${encodeURIComponent(category)}` : '';
    return check(
      await this.fetchFn(`${this.baseUrl}/journals/${encodeURIComponent(issn)}/issues${q}`)
    );
  }

  async search(query: string, category?: string): Promise<SearchHit[]> {
    const params = new URLSearchParams({ q: query });
    if (category) params.set('category', category);
    const body = await check<{ hits: SearchHit[] }>(
      await this.fetchFn(`${this.baseUrl}/search?${params}`)
    );
    return body.hits;
  }

  // -- article requests -----------------------------------------------------

  async createRequest(
    articleKey: string,
    category: string,
    email?: string
  ): Promise<RequestOutcome> {
    return check(
      await this.fetchFn(`${this.baseUrl}/requests`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ article_key: articleKey, category, email }),
      })
    );
  }

  async requestStatus(requestId: string): Promise<RequestOutcome> {
    return check(
      await this.fetchFn(`${this.baseUrl}/requests/${encodeURIComponent(requestId)}`)
    );
  }

  // -- alerts ------------------------------------------------------------------

  async createAlert(email: string, issns: string[]): Promise<AlertSubscription> {
    return check(
      await this.fetchFn(`${this.baseUrl}/alerts`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ email, issns }),
      })
    );
  }

  async listAlerts(email: string): Promise<AlertSubscription[]> {
    const body = await check<{ subscriptions: AlertSubscription[] }>(
      await this.fetchFn(`${this.baseUrl}/alerts?email=${encodeURIComponent(email)}`)
    );
    return body.subscriptions;
  }

  async deleteAlert(id: string): Promise<AlertSubscription> {
    return check(
      await this.fetchFn(`${this.baseUrl}/alerts/${encodeURIComponent(id)}`, {
        method: 'DELETE',
      })
    );
  }

  // -- administration -------------------------------------------------------------

  async patchSummary(key: string, patch: unknown): Promise<unknown> {
    return check(
      await this.fetchFn(`${this.baseUrl}/admin/summaries/${encodeURIComponent(key)}`, {
        method: 'PUT',
        headers: { 'Content-Type': 'application/json', ...this.adminHeaders() },
        body: JSON.stringify(patch),
      })
    );
  }

  async statsExport(start: string, end: string): Promise<string> {
    const params = new URLSearchParams({ start, end });
    const resp = await this.fetchFn(`${this.baseUrl}/admin/stats/export?${params}`, {
      headers: this.adminHeaders(),
    });
    if (!resp.ok) {
      await check(resp);
    }
    return resp.text();
  }

  async runDigest(): Promise<unknown> {
    return check(
      await this.fetchFn(`${this.baseUrl}/admin/digest/run`, {
        method: 'POST',
        headers: this.adminHeaders(),
      })
    );
  }

  // document-server job queue (per institution base URL)

  async listJobs(docserverUrl: string, state?: string): Promise<JobRow[]> {
    const q = state ? `?state=${encodeURIComponent(state)}` : '';
    const body = await check<{ jobs: JobRow[] }>(
      await this.fetchFn(`${docserverUrl}/jobs${q}`)
    );
    return body.jobs;
  }

  async completeJob(docserverUrl: string, job: JobRow): Promise<JobRow> {
    const path = job.kind === 'mail' ? 'mail-jobs' : 'print-jobs';
    return check(
      await this.fetchFn(`${docserverUrl}/${path}/${encodeURIComponent(job.id)}/complete`, {
        method: 'POST',
      })
    );
  }
}

export function parseCsv(text: string): string[][] {
  return text
    .trim()
    .split('\n')
    .filter((line) => line.length > 0)
    .map((line) => line.split(','));
}
