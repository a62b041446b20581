/** Debounced, latest-wins request scheduling for the what-if loop.
 *
 * Slider drags fire many input events; requests are debounced and each
 * one carries a sequence number so a stale response can never overwrite
 * a newer one. At most one burst is in flight at a time.
 */

export interface SchedulerCallbacks<Q, R> {
  send: (query: Q) => Promise<R>;
  onResult: (result: R, query: Q) => void;
  onError: (error: unknown, query: Q) => void;
}

export interface Scheduler<Q> {
  request: (query: Q) => void;
  flush: () => void;
  dispose: () => void;
}

export const DEBOUNCE_MS = 250;

export function createScheduler<Q, R>(
  callbacks: SchedulerCallbacks<Q, R>,
  delayMs: number = DEBOUNCE_MS,
  setTimer: typeof setTimeout = setTimeout,
  clearTimer: typeof clearTimeout = clearTimeout,
): Scheduler<Q> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let pending: Q | null = null;
  let sequence = 0;
  let disposed = false;

  function fire(): void {
    timer = null;
    if (pending === null || disposed) return;
    const query = pending;
    pending = null;
    const ticket = ++sequence;
    callbacks.send(query).then(
      (result) => {
        if (!disposed && ticket === sequence) {
          callbacks.onResult(result, query);
        }
      },
      (error) => {
        if (!disposed && ticket === sequence) {
          callbacks.onError(error, query);
        }
      },
    );
  }

  return {
    request(query: Q): void {
      if (disposed) return;
      pending = query;
      if (timer !== null) clearTimer(timer);
      timer = setTimer(fire, delayMs);
    },
    flush(): void {
      if (timer !== null) {
        clearTimer(timer);
        fire();
      }
    },
    dispose(): void {
      disposed = true;
      if (timer !== null) clearTimer(timer);
    },
  };
}
