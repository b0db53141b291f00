import { describe, expect, it } from "vitest";

import { ReviewSession } from "../src/session.js";
import type { QueueItem } from "../src/types.js";

function item(id: string, flagged = false, done = false): QueueItem {
  return {
    case_id: "case",
    landmark_id: id,
    flagged,
    flag_kind: flagged ? "global" : null,
    done,
  };
}

describe("ReviewSession", () => {
  it("finishes immediately on an empty queue", () => {
    const s = new ReviewSession([]);
    expect(s.phase).toBe("finished");
    expect(s.current()).toBeNull();
  });

  it("skips items already done (server replay)", () => {
    const s = new ReviewSession([item("1", false, true), item("2")]);
    expect(s.current()?.landmark_id).toBe("2");
    expect(s.progress()).toEqual({ done: 1, total: 2 });
  });

  it("requires both category and score before submitting", () => {
    const s = new ReviewSession([item("1")]);
    expect(s.canSubmit()).toBe(false);
    s.setCategory("normal");
    expect(s.canSubmit()).toBe(false);
    s.setScore(3);
    expect(s.canSubmit()).toBe(true);
  });

  it("suppresses duplicate submissions while one is in flight", () => {
    const s = new ReviewSession([item("1")]);
    s.setCategory("certain");
    s.setScore(1);
    expect(s.beginSubmit()).toBe(true);
    expect(s.beginSubmit()).toBe(false); // double-click
    s.acceptSubmit();
    expect(s.beginSubmit()).toBe(false); // already revealed
  });

  it("advances only after a reveal, resetting the draft", () => {
    const s = new ReviewSession([item("1"), item("2")]);
    s.setCategory("unsure");
    s.setScore(2);
    expect(s.advance()?.landmark_id).toBe("1"); // not revealed yet: no-op
    s.beginSubmit();
    s.acceptSubmit();
    expect(s.phase).toBe("revealed");
    const next = s.advance();
    expect(next?.landmark_id).toBe("2");
    expect(s.draft).toEqual({ category: null, score: null });
    expect(s.progress()).toEqual({ done: 1, total: 2 });
  });

  it("stays on the item when the server rejects", () => {
    const s = new ReviewSession([item("1")]);
    s.setCategory("normal");
    s.setScore(4);
    s.beginSubmit();
    s.rejectSubmit();
    expect(s.phase).toBe("reviewing");
    expect(s.current()?.landmark_id).toBe("1");
    expect(s.canSubmit()).toBe(true); // draft kept for correction
  });

  it("finishes after the last reveal", () => {
    const s = new ReviewSession([item("1")]);
    s.setCategory("normal");
    s.setScore(4);
    s.beginSubmit();
    s.acceptSubmit();
    expect(s.advance()).toBeNull();
    expect(s.phase).toBe("finished");
  });
});
