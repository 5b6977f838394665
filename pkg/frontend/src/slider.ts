/** Debounced latest-wins request channel.
 *
 * Drives the what-if slider (and the live bath scan): every UI change calls
 * set(), at most one request per minIntervalMs actually leaves, always
 * carrying the newest value, and a response only lands if no newer request
 * has been issued since.
 */

type TimerHandle = ReturnType<typeof setTimeout>;

export interface ChannelOptions<T, R> {
  send: (value: T) => Promise<R>;
  onResult: (value: T, result: R) => void;
  onError: (value: T, error: unknown) => void;
  /** Floor between consecutive requests; 100 ms caps at ~10 requests/s. */
  minIntervalMs?: number;
  /** Injectable clock and timers so tests can run without waiting. */
  now?: () => number;
  schedule?: (fn: () => void, ms: number) => TimerHandle;
  cancel?: (handle: TimerHandle) => void;
}

export class LatestWinsChannel<T, R> {
  private readonly minInterval: number;
  private readonly now: () => number;
  private readonly doSchedule: (fn: () => void, ms: number) => TimerHandle;
  private readonly doCancel: (handle: TimerHandle) => void;
  private lastIssuedAt = Number.NEGATIVE_INFINITY;
  private seq = 0;
  private pending: { value: T } | null = null;
  private timer: TimerHandle | null = null;

  constructor(private readonly options: ChannelOptions<T, R>) {
    this.minInterval = options.minIntervalMs ?? 100;
    this.now = options.now ?? (() => Date.now());
    this.doSchedule = options.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.doCancel = options.cancel ?? ((handle) => clearTimeout(handle));
  }

  /** Queue the newest value; sends now if the rate floor allows, otherwise
   * at the end of the current interval (trailing edge, newest value). */
  set(value: T): void {
    this.pending = { value };
    if (this.timer !== null) {
      return;
    }
    const wait = this.lastIssuedAt + this.minInterval - this.now();
    if (wait <= 0) {
      this.flush();
    } else {
      this.timer = this.doSchedule(() => {
        this.timer = null;
        this.flush();
      }, wait);
    }
  }

  /** Drop whatever is pending or in flight; stale responses will not land. */
  reset(): void {
    this.pending = null;
    this.seq += 1;
    if (this.timer !== null) {
      this.doCancel(this.timer);
      this.timer = null;
    }
  }

  private flush(): void {
    if (this.pending === null) {
      return;
    }
    const { value } = this.pending;
    this.pending = null;
    this.lastIssuedAt = this.now();
    const id = ++this.seq;
    this.options.send(value).then(
      (result) => {
        if (id === this.seq) {
          this.options.onResult(value, result);
        }
      },
      (error: unknown) => {
        if (id === this.seq) {
          this.options.onError(value, error);
        }
      },
    );
  }
}
