/** Batches clicks before shipping them to the capture service.
 *
 * A batch goes out when 10 clicks are pending or 500 ms after the first
 * pending click, whichever comes first. Batches are sent strictly in order
 * (a flush waits for the previous one) so the server's dense sequence
 * numbers always match the click order the participant produced.
 *
 * Network failures retry with exponential backoff capped at 10 s. An
 * ApiError is a server decision, not a transient fault, so it is surfaced
 * to the caller instead of retried.
 */

import { ApiError, CaptureApi, ClickPoint } from './api.js';

export const FLUSH_COUNT = 10;
export const FLUSH_DELAY_MS = 500;
export const BACKOFF_BASE_MS = 500;
export const BACKOFF_CAP_MS = 10_000;

export interface BufferHooks {
  setTimeout: (fn: () => void, ms: number) => unknown;
  clearTimeout: (handle: unknown) => void;
  /** resolves after ms; injectable so tests can drive retries */
  sleep: (ms: number) => Promise<void>;
}

const realHooks: BufferHooks = {
  setTimeout: (fn, ms) => setTimeout(fn, ms),
  clearTimeout: (h) => clearTimeout(h as ReturnType<typeof setTimeout>),
  sleep: (ms) => new Promise((resolve) => setTimeout(resolve, ms)),
};

export class ClickBuffer {
  private pending: ClickPoint[] = [];
  private timer: unknown = null;
  private chain: Promise<void> = Promise.resolve();
  private failed: ApiError | null = null;

  constructor(
    private readonly api: CaptureApi,
    private readonly token: string,
    private readonly item: string,
    private readonly hooks: BufferHooks = realHooks,
  ) {}

  /** Queue one click; may trigger an immediate flush at the count limit. */
  add(click: ClickPoint): void {
    if (this.failed) throw this.failed;
    this.pending.push(click);
    if (this.pending.length >= FLUSH_COUNT) {
      this.flushNow();
    } else if (this.timer === null) {
      this.timer = this.hooks.setTimeout(() => this.flushNow(), FLUSH_DELAY_MS);
    }
  }

  private flushNow(): void {
    if (this.timer !== null) {
      this.hooks.clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.pending.length === 0) return;
    const batch = this.pending;
    this.pending = [];
    this.chain = this.chain.then(() => this.send(batch));
  }

  private async send(batch: ClickPoint[]): Promise<void> {
    if (this.failed) return;
    let backoff = BACKOFF_BASE_MS;
    for (;;) {
      try {
        await this.api.postClicks(this.token, this.item, batch);
        return;
      } catch (err) {
        if (err instanceof ApiError) {
          // server rejected the batch; nothing a retry would fix
          this.failed = err;
          return;
        }
        await this.hooks.sleep(backoff);
        backoff = Math.min(backoff * 2, BACKOFF_CAP_MS);
      }
    }
  }

  /** Flush whatever is pending and wait until the server has it all. */
  async drain(): Promise<void> {
    this.flushNow();
    await this.chain;
    if (this.failed) throw this.failed;
  }
}
