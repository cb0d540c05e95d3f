/** Server-sent event subscription with resumable reconnects.
 *
 * Wraps EventSource behind an injectable factory so tests drive it with a
 * fake.  On reconnect the stream resumes from the last seen id via the
 * `after` query parameter, so reduction over the log stays gap-free.
 */

import type { ServerEvent } from "./types.js";

export interface EventSourceLike {
  addEventListener(type: string, listener: (ev: MessageEvent) => void): void;
  close(): void;
  onerror: ((ev: unknown) => void) | null;
  onopen: ((ev: unknown) => void) | null;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export interface EventStreamOptions {
  base?: string;
  factory?: EventSourceFactory;
  /** Called for every decoded event, in id order. */
  onEvent: (event: ServerEvent) => void;
  onConnectionChange?: (connected: boolean) => void;
  /** Reconnect delay in ms (tests may set 0). */
  retryMs?: number;
  scheduler?: (fn: () => void, ms: number) => void;
}

const EVENT_TYPES = ["dataset-changed", "pose", "view-changed"] as const;

export class EventStream {
  private source: EventSourceLike | null = null;
  private lastId = 0;
  private closed = false;

  constructor(private readonly sessionId: string, private readonly opts: EventStreamOptions) {}

  get lastEventId(): number {
    return this.lastId;
  }

  url(): string {
    const base = this.opts.base ?? "";
    return `${base}/sessions/${this.sessionId}/events?after=${this.lastId}`;
  }

  connect(): void {
    if (this.closed) return;
    const factory =
      this.opts.factory ?? ((url: string) => new EventSource(url) as unknown as EventSourceLike);
    const source = factory(this.url());
    this.source = source;
    source.onopen = () => this.opts.onConnectionChange?.(true);
    for (const type of EVENT_TYPES) {
      source.addEventListener(type, (ev) => {
        const id = Number((ev as MessageEvent & { lastEventId?: string }).lastEventId ?? 0);
        if (id <= this.lastId) return;
        this.lastId = id;
        this.opts.onEvent({
          id,
          event: type,
          data: JSON.parse(String(ev.data)),
        } as ServerEvent);
      });
    }
    source.onerror = () => {
      this.opts.onConnectionChange?.(false);
      source.close();
      if (this.closed) return;
      const schedule = this.opts.scheduler ?? ((fn, ms) => setTimeout(fn, ms));
      schedule(() => this.connect(), this.opts.retryMs ?? 1000);
    };
  }

  close(): void {
    this.closed = true;
    this.source?.close();
  }
}
