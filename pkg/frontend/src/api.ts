/** Typed client for the capture service's HTTP+JSON API. */

export interface StudyItem {
  code: string;
  test: string;
  question: string;
  choices: string[];
  correct: number;
  image_w: number;
  image_h: number;
  chart: string;
  time_limit_s: number;
  bubble_radius: number;
  blur_sigma: number;
}

export interface StudyConfig {
  items: StudyItem[];
  sgl_items: string[];
  order_seed: number;
}

export interface ClickPoint {
  x: number;
  y: number;
  t: number;
}

export const SKIPPED = 'SKIPPED';
export type Choice = number | typeof SKIPPED;

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** A response the server understood and rejected (4xx with an error code). */
export class ApiError extends Error {
  constructor(
    public readonly code: string,
    public readonly status: number,
    detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = 'ApiError';
  }
}

export class CaptureApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, body?: unknown): Promise<T> {
    const init: RequestInit =
      body === undefined
        ? { method: path === '/config' ? 'GET' : 'POST' }
        : {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(body),
          };
    const res = await this.fetchImpl(this.baseUrl + path, init);
    const payload = await res.json();
    if (!res.ok) {
      throw new ApiError(payload.error ?? 'UNKNOWN', res.status, payload.detail ?? '');
    }
    return payload as T;
  }

  getConfig(): Promise<StudyConfig> {
    return this.request<StudyConfig>('/config');
  }

  chartUrl(chartId: string): string {
    return `${this.baseUrl}/charts/${chartId}.png`;
  }

  openSession(
    participantId: string,
    screen: { screen_w: number; screen_h: number; scale: number },
    seed?: number,
  ): Promise<{ token: string; item_order: string[] }> {
    return this.request('/sessions', { participant_id: participantId, ...screen, seed });
  }

  postClicks(token: string, item: string, clicks: ClickPoint[]): Promise<{ seq: number[] }> {
    return this.request(`/sessions/${token}/clicks`, { item, clicks });
  }

  postAnswer(token: string, item: string, choice: Choice): Promise<{ next_item: string | null }> {
    return this.request(`/sessions/${token}/answer`, { item, choice });
  }

  postSgl(token: string, responses: number[]): Promise<{ ok: boolean }> {
    return this.request(`/sessions/${token}/sgl`, { responses });
  }

  finalize(token: string): Promise<{ ok: boolean }> {
    return this.request(`/sessions/${token}/finalize`, {});
  }
}
