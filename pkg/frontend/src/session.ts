/** Client-side study session: item progression, timing, and answer rules.
 *
 * Mirrors the server's invariants so the participant gets immediate
 * feedback instead of a rejected request: forward-only item order, one
 * answer per item, and once the time limit passes only SKIPPED goes out.
 * Answers are only submitted after the click buffer drains, so every click
 * for an item is durable before the item advances.
 */

import { CaptureApi, Choice, ClickPoint, SKIPPED, StudyConfig, StudyItem } from './api.js';
import { BufferHooks, ClickBuffer } from './clickBuffer.js';

export type Clock = () => number;

export interface SessionEvents {
  onItemStart?: (item: StudyItem) => void;
  onTick?: (remainingS: number) => void;
  onExpired?: (item: StudyItem) => void;
  onComplete?: () => void;
}

export class StudySession {
  private itemOrder: string[] = [];
  private index = 0;
  private buffer: ClickBuffer | null = null;
  private itemStartedAt = 0;
  private expired = false;
  private answering = false;
  private token = '';
  private done = false;

  constructor(
    private readonly api: CaptureApi,
    private readonly config: StudyConfig,
    private readonly clock: Clock = () => performance.now() / 1000,
    private readonly hooks?: BufferHooks,
    private readonly events: SessionEvents = {},
  ) {}

  async start(
    participantId: string,
    screen: { screen_w: number; screen_h: number; scale: number },
    seed?: number,
  ): Promise<void> {
    const opened = await this.api.openSession(participantId, screen, seed);
    this.token = opened.token;
    this.itemOrder = opened.item_order;
    this.index = 0;
    this.beginItem();
  }

  get sessionToken(): string {
    return this.token;
  }

  get currentItem(): StudyItem | null {
    if (this.index >= this.itemOrder.length) return null;
    const code = this.itemOrder[this.index];
    const item = this.config.items.find((i) => i.code === code);
    if (!item) throw new Error(`config has no item ${code}`);
    return item;
  }

  get isComplete(): boolean {
    return this.index >= this.itemOrder.length;
  }

  get timeExpired(): boolean {
    return this.expired;
  }

  remainingS(): number {
    const item = this.currentItem;
    if (!item) return 0;
    return Math.max(0, item.time_limit_s - (this.clock() - this.itemStartedAt));
  }

  /** Call on a UI timer; flips the expired flag exactly once per item. */
  tick(): void {
    const item = this.currentItem;
    if (!item || this.expired) return;
    const remaining = this.remainingS();
    this.events.onTick?.(remaining);
    if (remaining <= 0) {
      this.expired = true;
      this.events.onExpired?.(item);
    }
  }

  /** Whether a given choice may still be submitted for the current item. */
  canChoose(choice: Choice): boolean {
    if (this.currentItem === null || this.answering) return false;
    if (this.expired) return choice === SKIPPED;
    return true;
  }

  /** Record one reveal click in image coordinates. */
  recordClick(imageX: number, imageY: number): void {
    const item = this.currentItem;
    if (!item || this.buffer === null || this.expired) return;
    const click: ClickPoint = {
      x: imageX,
      y: imageY,
      t: Math.round((this.clock() - this.itemStartedAt) * 1000),
    };
    this.buffer.add(click);
  }

  /** Drain pending clicks, submit the answer, advance to the next item. */
  async answer(choice: Choice): Promise<void> {
    const item = this.currentItem;
    if (!item) throw new Error('no current item');
    if (this.answering) throw new Error('answer already in flight');
    if (!this.canChoose(choice)) {
      throw new Error('time expired; only SKIPPED may be submitted');
    }
    this.answering = true;
    try {
      await this.buffer!.drain();
      await this.api.postAnswer(this.token, item.code, choice);
    } finally {
      this.answering = false;
    }
    this.index += 1;
    this.beginItem();
  }

  /** Submit the self-rated graph literacy responses (10 values, 1..6). */
  submitSgl(responses: number[]): Promise<{ ok: boolean }> {
    return this.api.postSgl(this.token, responses);
  }

  /** Close the session on the server; idempotence is the server's call. */
  async finish(): Promise<void> {
    if (this.done) return;
    await this.api.finalize(this.token);
    this.done = true;
  }

  private beginItem(): void {
    this.expired = false;
    this.itemStartedAt = this.clock();
    const item = this.currentItem;
    if (item) {
      this.buffer = new ClickBuffer(this.api, this.token, item.code, this.hooks);
      this.events.onItemStart?.(item);
    } else {
      this.buffer = null;
      this.events.onComplete?.();
    }
  }
}
