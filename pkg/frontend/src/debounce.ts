/** Latest-wins debouncing for rapid template edits: a burst of calls
 * collapses into one trailing invocation with the last arguments, and
 * responses for superseded requests can be detected and dropped. */

export interface Debounced<A extends unknown[]> {
  (...args: A): void;
  cancel(): void;
  flush(): void;
}

export function debounceLatest<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let lastArgs: A | null = null;

  const invoke = () => {
    timer = null;
    if (lastArgs !== null) {
      const args = lastArgs;
      lastArgs = null;
      fn(...args);
    }
  };

  const debounced = (...args: A) => {
    lastArgs = args;
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(invoke, waitMs);
  };
  debounced.cancel = () => {
    if (timer !== null) clearTimeout(timer);
    timer = null;
    lastArgs = null;
  };
  debounced.flush = () => {
    if (timer !== null) clearTimeout(timer);
    invoke();
  };
  return debounced;
}

/** Monotonic ticket counter: a response is only applied when its ticket is
 * still the newest one issued (in-flight request deduplication). */
export class LatestWins {
  private current = 0;

  issue(): number {
    return ++this.current;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.current;
  }
}
