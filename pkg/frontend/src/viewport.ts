/** Volume viewport request scheduling: debounced, last-writer-wins.
 *
 * Camera changes arrive faster than renders return; the controller issues
 * at most one in-flight request and always re-requests with the newest
 * camera, so the displayed image corresponds to the latest acknowledged
 * camera and stale responses are dropped.
 */

export interface RenderRequest<C> {
  camera: C;
  sequence: number;
}

export interface ViewportCallbacks<C, R> {
  render: (req: RenderRequest<C>) => Promise<R>;
  /** Called only for the newest acknowledged response. */
  present: (result: R, req: RenderRequest<C>) => void;
  onError?: (err: unknown) => void;
}

export class ViewportController<C, R> {
  private sequence = 0;
  private presented = 0;
  private inFlight = false;
  private pending: C | null = null;

  constructor(private readonly callbacks: ViewportCallbacks<C, R>) {}

  /** Latest camera wins; intermediate cameras may be skipped entirely. */
  request(camera: C): void {
    this.pending = camera;
    void this.pump();
  }

  private async pump(): Promise<void> {
    if (this.inFlight || this.pending === null) return;
    const camera = this.pending;
    this.pending = null;
    this.inFlight = true;
    const req: RenderRequest<C> = { camera, sequence: ++this.sequence };
    try {
      const result = await this.callbacks.render(req);
      if (req.sequence > this.presented) {
        this.presented = req.sequence;
        this.callbacks.present(result, req);
      }
    } catch (err) {
      this.callbacks.onError?.(err);
    } finally {
      this.inFlight = false;
      if (this.pending !== null) void this.pump();
    }
  }

  get lastPresentedSequence(): number {
    return this.presented;
  }
}
