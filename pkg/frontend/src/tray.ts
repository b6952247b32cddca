/** Comparison tray: pin up to four scenario outcomes side by side.
 *
 * Pinned entries are deep-frozen copies; they can only change by unpinning
 * and pinning a freshly fetched outcome.
 */

import type { ScenarioOutcome } from "./types.js";

export const MAX_PINNED = 4;

export interface PinnedOutcome {
  id: number;
  outcome: ScenarioOutcome;
}

function deepFreeze<T>(value: T): T {
  if (value && typeof value === "object") {
    for (const key of Object.keys(value as object)) {
      deepFreeze((value as Record<string, unknown>)[key]);
    }
    Object.freeze(value);
  }
  return value;
}

export class ComparisonTray {
  private pinned: PinnedOutcome[] = [];
  private nextId = 1;

  /** Returns the pin id, or null when the tray is full. */
  pin(outcome: ScenarioOutcome): number | null {
    if (this.pinned.length >= MAX_PINNED) return null;
    const copy = deepFreeze(JSON.parse(JSON.stringify(outcome)) as ScenarioOutcome);
    const id = this.nextId++;
    this.pinned.push({ id, outcome: copy });
    return id;
  }

  unpin(id: number): boolean {
    const before = this.pinned.length;
    this.pinned = this.pinned.filter((entry) => entry.id !== id);
    return this.pinned.length !== before;
  }

  list(): ReadonlyArray<PinnedOutcome> {
    return [...this.pinned];
  }

  get size(): number {
    return this.pinned.length;
  }

  get full(): boolean {
    return this.pinned.length >= MAX_PINNED;
  }
}
