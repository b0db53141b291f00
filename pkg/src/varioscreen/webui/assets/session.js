/** Review-session state machine, kept free of DOM and network concerns so
 * the queue rules are unit-testable: items advance only after the server
 * acknowledged the verdict, a submission in flight blocks duplicates, and
 * nothing is submittable until both category and score are chosen. */
export class ReviewSession {
    constructor(queue) {
        this.draft = { category: null, score: null };
        this.pending = queue.filter((q) => !q.done);
        this.doneCount = queue.length - this.pending.length;
        this.total = queue.length;
        this.phase = this.pending.length ? "reviewing" : "finished";
    }
    current() {
        return this.phase === "finished" ? null : this.pending[0] ?? null;
    }
    progress() {
        return { done: this.doneCount, total: this.total };
    }
    setCategory(category) {
        if (this.phase === "reviewing") {
            this.draft.category = category;
        }
    }
    setScore(score) {
        if (this.phase === "reviewing") {
            this.draft.score = score;
        }
    }
    /** Both fields chosen and no request in flight. */
    canSubmit() {
        return (this.phase === "reviewing" &&
            this.draft.category !== null &&
            this.draft.score !== null);
    }
    /** Mark the in-flight request; returns false when submission is not
     * allowed (double-click, missing fields, wrong phase). */
    beginSubmit() {
        if (!this.canSubmit()) {
            return false;
        }
        this.phase = "submitting";
        return true;
    }
    /** Server acknowledged durably: reveal the flag status of the item just
     * judged; the queue advances when the reveal is dismissed. */
    acceptSubmit() {
        if (this.phase === "submitting") {
            this.phase = "revealed";
        }
    }
    /** Server rejected (e.g. 422) or the request failed: stay on the item
     * so the reviewer can correct and resubmit. */
    rejectSubmit() {
        if (this.phase === "submitting") {
            this.phase = "reviewing";
        }
    }
    /** Leave the reveal screen and move to the next queued item. */
    advance() {
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
