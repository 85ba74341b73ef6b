import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { debounceLatest, LatestWins } from "../src/debounce.js";

describe("debounceLatest", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("collapses a burst into one trailing call with the last arguments", () => {
    const calls: string[] = [];
    const debounced = debounceLatest((arg: string) => calls.push(arg), 250);
    for (let i = 0; i < 10; i++) {
      debounced(`draft ${i}`);
      vi.advanceTimersByTime(50); // keystrokes 50ms apart, inside the window
    }
    expect(calls).toEqual([]);
    vi.advanceTimersByTime(250);
    expect(calls).toEqual(["draft 9"]);
  });

  it("fires again for a second burst", () => {
    const calls: string[] = [];
    const debounced = debounceLatest((arg: string) => calls.push(arg), 100);
    debounced("first");
    vi.advanceTimersByTime(150);
    debounced("second");
    vi.advanceTimersByTime(150);
    expect(calls).toEqual(["first", "second"]);
  });

  it("cancel drops the pending call", () => {
    const calls: string[] = [];
    const debounced = debounceLatest((arg: string) => calls.push(arg), 100);
    debounced("doomed");
    debounced.cancel();
    vi.advanceTimersByTime(500);
    expect(calls).toEqual([]);
  });

  it("flush invokes immediately", () => {
    const calls: string[] = [];
    const debounced = debounceLatest((arg: string) => calls.push(arg), 100);
    debounced("now");
    debounced.flush();
    expect(calls).toEqual(["now"]);
    vi.advanceTimersByTime(500);
    expect(calls).toEqual(["now"]);
  });
});

describe("LatestWins", () => {
  it("only the newest ticket is current", () => {
    const tickets = new LatestWins();
    const first = tickets.issue();
    const second = tickets.issue();
    expect(tickets.isCurrent(first)).toBe(false);
    expect(tickets.isCurrent(second)).toBe(true);
  });
});
