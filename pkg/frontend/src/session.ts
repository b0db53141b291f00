/** Review-session state machine, kept free of DOM and network concerns so
 * the queue rules are unit-testable: items advance only after the server
 * acknowledged the verdict, a submission in flight blocks duplicates, and
 * nothing is submittable until both category and score are chosen. */

import type { Category, QueueItem } from "./types.js";

export interface Draft {
  category: Category | null;
  score: 1 | 2 | 3 | 4 | null;
}

export type Phase = "reviewing" | "submitting" | "revealed" | "finished";

export class ReviewSession {
  private pending: QueueItem[];
  private doneCount: number;
  private total: number;
  phase: Phase;
  draft: Draft = { category: null, score: null };

  constructor(queue: QueueItem[]) {
    this.pending = queue.filter((q) => !q.done);
    this.doneCount = queue.length - this.pending.length;
    this.total = queue.length;
    this.phase = this.pending.length ? "reviewing" : "finished";
  }

  current(): QueueItem | null {
    return this.phase === "finished" ? null : this.pending[0] ?? null;
  }

  progress(): { done: number; total: number } {
    return { done: this.doneCount, total: this.total };
  }

  setCategory(category: Category): void {
    if (this.phase === "reviewing") {
      this.draft.category = category;
    }
  }

  setScore(score: 1 | 2 | 3 | 4): void {
    if (this.phase === "reviewing") {
      this.draft.score = score;
    }
  }

  /** Both fields chosen and no request in flight. */
  canSubmit(): boolean {
    return (
      this.phase === "reviewing" &&
      this.draft.category !== null &&
      this.draft.score !== null
    );
  }

  /** Mark the in-flight request; returns false when submission is not
   * allowed (double-click, missing fields, wrong phase). */
  beginSubmit(): boolean {
    if (!this.canSubmit()) {
      return false;
    }
    this.phase = "submitting";
    return true;
  }

  /** Server acknowledged durably: reveal the flag status of the item just
   * judged; the queue advances when the reveal is dismissed. */
  acceptSubmit(): void {
    if (this.phase === "submitting") {
      this.phase = "revealed";
    }
  }

  /** Server rejected (e.g. 422) or the request failed: stay on the item
   * so the reviewer can correct and resubmit. */
  rejectSubmit(): void {
    if (this.phase === "submitting") {
      this.phase = "reviewing";
    }
  }

  /** Leave the reveal screen and move to the next queued item. */
  advance(): QueueItem | null {
    if (this.phase !== "revealed") {
      return this.current();
    }
    this.pending.shift();
    this.doneCount += 1;
    this.draft = { category: null, score: null };
    this.phase = this.pending.length ? "reviewing" : "finished";
    return this.current();
  }
}
