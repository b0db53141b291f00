import { fetchCase, fetchQueue, postVerdict } from "./api.js";
import { ReviewSession } from "./session.js";
import { scatterSvg } from "./scatter.js";
import { vectorViewSvg } from "./vectors.js";
const CATEGORIES = ["certain", "unsure", "normal"];
const SCORES = [1, 2, 3, 4];
const SCORE_LABELS = {
    1: "1 (poor)",
    2: "2 (questionable)",
    3: "3 (acceptable)",
    4: "4 (good)",
};
const app = document.getElementById("app");
const caseCache = new Map();
let session = null;
function el(tag, cls, text) {
    const node = document.createElement(tag);
    if (cls)
        node.className = cls;
    if (text !== undefined)
        node.textContent = text;
    return node;
}
async function caseFor(item) {
    const hit = caseCache.get(item.case_id);
    if (hit)
        return hit;
    const payload = await fetchCase(item.case_id);
    caseCache.set(item.case_id, payload);
    return payload;
}
function renderRetry(message, retry) {
    app.replaceChildren();
    const banner = el("div", "banner error");
    banner.append(el("p", undefined, `Could not reach the review server: ${message}`), el("p", "hint", "Nothing was lost; acknowledged verdicts are stored " +
        "server-side."));
    const button = el("button", "primary", "Retry");
    button.addEventListener("click", retry);
    banner.append(button);
    app.append(banner);
}
function renderFinished() {
    app.replaceChildren();
    const done = el("div", "finished");
    done.append(el("h2", undefined, "Review complete"), el("p", undefined, "Every queued landmark has a verdict. Stop the server (or run the " +
        "finalize command) to merge the verdicts into the report."));
    app.append(done);
}
function coordLine(payload, landmarkId) {
    const lm = payload.landmarks.find((l) => l.id === landmarkId);
    if (!lm)
        return "";
    const f = lm.fixed.map((v) => v.toFixed(2)).join(", ");
    const m = lm.moving.map((v) => v.toFixed(2)).join(", ");
    return `fixed (${f}) mm → moving (${m}) mm`;
}
async function renderCurrent() {
    if (!session)
        return;
    const item = session.current();
    if (!item) {
        renderFinished();
        return;
    }
    let payload;
    try {
        payload = await caseFor(item);
    }
    catch (err) {
        renderRetry(String(err), () => void renderCurrent());
        return;
    }
    const focusIndex = payload.landmarks.findIndex((l) => l.id === item.landmark_id);
    app.replaceChildren();
    const { done, total } = session.progress();
    const header = el("header");
    header.append(el("h2", undefined, `Case ${item.case_id} · landmark ${item.landmark_id}`), el("span", "progress", `${done + 1} of ${total}`), el("p", "coords", coordLine(payload, item.landmark_id)));
    app.append(header);
    const plots = el("div", "plots");
    const scatterBox = el("figure", "scatter-box");
    scatterBox.innerHTML = scatterSvg(payload.cloud, {
        focusIndex,
        landmarkIds: payload.landmarks.map((l) => l.id),
    });
    scatterBox.append(el("figcaption", undefined, "Pair differences; highlighted points involve this landmark"));
    plots.append(scatterBox);
    const views = el("div", "views");
    for (const plane of ["xy", "xz", "yz"]) {
        const fig = el("figure", "view-box");
        fig.innerHTML = vectorViewSvg(payload.landmarks, plane, item.landmark_id);
        views.append(fig);
    }
    plots.append(views);
    app.append(plots);
    const form = el("div", "verdict-form");
    const catRow = el("div", "choice-row");
    catRow.append(el("span", "choice-label", "Category"));
    const catButtons = new Map();
    for (const category of CATEGORIES) {
        const b = el("button", "choice", category);
        b.addEventListener("click", () => {
            session?.setCategory(category);
            for (const [c, btn] of catButtons) {
                btn.classList.toggle("selected", c === category);
            }
            sync();
        });
        catButtons.set(category, b);
        catRow.append(b);
    }
    const scoreRow = el("div", "choice-row");
    scoreRow.append(el("span", "choice-label", "Score"));
    const scoreButtons = new Map();
    for (const score of SCORES) {
        const b = el("button", "choice", SCORE_LABELS[score]);
        b.addEventListener("click", () => {
            session?.setScore(score);
            for (const [s, btn] of scoreButtons) {
                btn.classList.toggle("selected", s === score);
            }
            sync();
        });
        scoreButtons.set(score, b);
        scoreRow.append(b);
    }
    const submit = el("button", "primary submit", "Submit verdict");
    submit.disabled = true;
    const note = el("p", "note", "");
    submit.addEventListener("click", () => void doSubmit(item, submit, note));
    form.append(catRow, scoreRow, submit, note);
    app.append(form);
    function sync() {
        submit.disabled = !session?.canSubmit();
    }
}
async function doSubmit(item, submit, note) {
    if (!session || !session.beginSubmit()) {
        return; // double-click or incomplete form
    }
    submit.disabled = true;
    note.textContent = "Submitting…";
    const draft = session.draft;
    const result = await postVerdict({
        case_id: item.case_id,
        landmark_id: item.landmark_id,
        category: draft.category,
        score: draft.score,
    });
    if (!result.ok) {
        session.rejectSubmit();
        submit.disabled = !session.canSubmit();
        note.textContent = `Rejected: ${result.error ?? result.status}`;
        return;
    }
    session.acceptSubmit();
    renderReveal(item);
}
function renderReveal(item) {
    // flag provenance is shown only now, after the verdict is stored
    app.replaceChildren();
    const panel = el("div", "reveal");
    panel.append(el("h2", undefined, "Verdict recorded"));
    panel.append(el("p", "reveal-status", item.flagged
        ? `This landmark WAS flagged by the screen (${item.flag_kind} pattern).`
        : "This landmark was NOT flagged; it was mixed in as a control."));
    const next = el("button", "primary", "Next landmark");
    next.addEventListener("click", () => {
        session?.advance();
        void renderCurrent();
    });
    panel.append(next);
    app.append(panel);
}
async function boot() {
    try {
        const queue = await fetchQueue();
        session = new ReviewSession(queue);
    }
    catch (err) {
        renderRetry(String(err), () => void boot());
        return;
    }
    await renderCurrent();
}
void boot();
