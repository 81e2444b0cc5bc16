/** DOM wiring for the capture study page.
 *
 * Renders the blurred chart on a canvas, punches sharp circular reveals at
 * each click, and drives the session state machine. All coordinates sent
 * to the server are intrinsic image pixels.
 */

import { CaptureApi, SKIPPED, StudyItem } from './api.js';
import { blurImageBytes } from './blur.js';
import {
  bubbleDisplayRadius,
  displayToImage,
  DisplayTransform,
  inImageBounds,
} from './coords.js';
import { StudySession } from './session.js';

interface PageElements {
  canvas: HTMLCanvasElement;
  question: HTMLElement;
  choices: HTMLElement;
  timer: HTMLElement;
  status: HTMLElement;
}

function getElements(): PageElements {
  const byId = (id: string) => {
    const el = document.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el;
  };
  return {
    canvas: byId('chart') as HTMLCanvasElement,
    question: byId('question'),
    choices: byId('choices'),
    timer: byId('timer'),
    status: byId('status'),
  };
}

class ChartView {
  private sharp: ImageData | null = null;
  private blurred: ImageData | null = null;
  private reveals: { x: number; y: number }[] = [];
  private transform: DisplayTransform = { scale: 1, offsetX: 0, offsetY: 0 };
  private item: StudyItem | null = null;

  constructor(private readonly canvas: HTMLCanvasElement) {}

  async show(item: StudyItem, imageUrl: string): Promise<void> {
    this.item = item;
    this.reveals = [];
    const img = new Image();
    img.crossOrigin = 'anonymous';
    await new Promise<void>((resolve, reject) => {
      img.onload = () => resolve();
      img.onerror = () => reject(new Error(`failed to load ${imageUrl}`));
      img.src = imageUrl;
    });
    const work = document.createElement('canvas');
    work.width = item.image_w;
    work.height = item.image_h;
    const wctx = work.getContext('2d')!;
    wctx.drawImage(img, 0, 0, item.image_w, item.image_h);
    this.sharp = wctx.getImageData(0, 0, item.image_w, item.image_h);
    const blurredBytes = blurImageBytes(
      this.sharp.data, item.image_w, item.image_h, item.blur_sigma);
    // blurImageBytes allocates a fresh non-shared buffer
    this.blurred = new ImageData(
      blurredBytes as Uint8ClampedArray<ArrayBuffer>,
      item.image_w, item.image_h);
    this.layout();
    this.redraw();
  }

  /** Fit the image inside the canvas, preserving aspect ratio. */
  layout(): void {
    if (!this.item) return;
    const { image_w, image_h } = this.item;
    const scale = Math.min(
      this.canvas.width / image_w, this.canvas.height / image_h);
    this.transform = {
      scale,
      offsetX: (this.canvas.width - image_w * scale) / 2,
      offsetY: (this.canvas.height - image_h * scale) / 2,
    };
  }

  /** Map a canvas-space click to image pixels; null when off the chart. */
  toImage(displayX: number, displayY: number): { x: number; y: number } | null {
    if (!this.item) return null;
    const p = displayToImage(displayX, displayY, this.transform);
    if (!inImageBounds(p.x, p.y, this.item.image_w, this.item.image_h)) {
      return null;
    }
    return p;
  }

  reveal(imageX: number, imageY: number): void {
    this.reveals.push({ x: imageX, y: imageY });
    this.redraw();
  }

  private redraw(): void {
    if (!this.item || !this.sharp || !this.blurred) return;
    const ctx = this.canvas.getContext('2d')!;
    const { image_w, image_h } = this.item;
    const work = document.createElement('canvas');
    work.width = image_w;
    work.height = image_h;
    const wctx = work.getContext('2d')!;
    wctx.putImageData(this.blurred, 0, 0);

    // composite the sharp image through circular reveal masks
    if (this.reveals.length > 0) {
      const sharpCanvas = document.createElement('canvas');
      sharpCanvas.width = image_w;
      sharpCanvas.height = image_h;
      sharpCanvas.getContext('2d')!.putImageData(this.sharp, 0, 0);
      wctx.save();
      wctx.beginPath();
      for (const r of this.reveals) {
        wctx.moveTo(r.x + this.item.bubble_radius, r.y);
        wctx.arc(r.x, r.y, this.item.bubble_radius, 0, 2 * Math.PI);
      }
      wctx.clip();
      wctx.drawImage(sharpCanvas, 0, 0);
      wctx.restore();
    }

    const t = this.transform;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    ctx.imageSmoothingEnabled = t.scale < 1;
    ctx.drawImage(work, t.offsetX, t.offsetY,
      image_w * t.scale, image_h * t.scale);

    // outline the newest bubble so the participant sees where they looked
    const last = this.reveals[this.reveals.length - 1];
    if (last) {
      ctx.strokeStyle = 'rgba(30, 110, 220, 0.8)';
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(
        last.x * t.scale + t.offsetX,
        last.y * t.scale + t.offsetY,
        bubbleDisplayRadius(this.item.bubble_radius, t),
        0, 2 * Math.PI);
      ctx.stroke();
    }
  }
}

async function run(): Promise<void> {
  const els = getElements();
  const base = new URLSearchParams(location.search).get('api') ?? '';
  const api = new CaptureApi(base);
  const config = await api.getConfig();
  const view = new ChartView(els.canvas);

  const participantId =
    new URLSearchParams(location.search).get('pid') ??
    `p${Date.now().toString(36)}`;

  const session = new StudySession(
    api, config, () => performance.now() / 1000, undefined, {
      onItemStart: (item) => {
        els.question.textContent = item.question;
        els.status.textContent = '';
        void view.show(item, api.chartUrl(item.chart));
        renderChoices(item);
      },
      onTick: (remaining) => {
        els.timer.textContent = `${Math.ceil(remaining)}s`;
      },
      onExpired: () => {
        els.status.textContent = 'Time is up. Please skip this question.';
        renderExpiredChoices();
      },
      onComplete: () => {
        els.question.textContent = 'All done. Thank you!';
        els.choices.replaceChildren();
        void session.finish();
      },
    });

  function choiceButton(label: string, choice: number | typeof SKIPPED) {
    const btn = document.createElement('button');
    btn.textContent = label;
    btn.onclick = () => {
      if (!session.canChoose(choice)) return;
      btn.disabled = true;
      session.answer(choice).catch((err) => {
        btn.disabled = false;
        els.status.textContent = String(err);
      });
    };
    return btn;
  }

  function renderChoices(item: StudyItem): void {
    els.choices.replaceChildren(
      ...item.choices.map((c, i) => choiceButton(c, i)),
      choiceButton('Skip', SKIPPED));
  }

  function renderExpiredChoices(): void {
    els.choices.replaceChildren(choiceButton('Skip', SKIPPED));
  }

  els.canvas.addEventListener('click', (ev) => {
    const rect = els.canvas.getBoundingClientRect();
    const p = view.toImage(ev.clientX - rect.left, ev.clientY - rect.top);
    if (p && !session.timeExpired) {
      session.recordClick(p.x, p.y);
      view.reveal(p.x, p.y);
    }
  });

  setInterval(() => session.tick(), 250);

  await session.start(participantId, {
    screen_w: window.screen.width,
    screen_h: window.screen.height,
    scale: window.devicePixelRatio,
  });
}

if (typeof document !== 'undefined' && document.getElementById('chart')) {
  run().catch((err) => {
    const status = document.getElementById('status');
    if (status) status.textContent = String(err);
  });
}
