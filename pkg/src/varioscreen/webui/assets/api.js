async function getJson(path) {
    const resp = await fetch(path);
    if (!resp.ok) {
        throw new Error(`${path}: HTTP ${resp.status}`);
    }
    return (await resp.json());
}
export function fetchQueue() {
    return getJson("/api/queue");
}
export function fetchCase(caseId) {
    return getJson(`/api/case/${encodeURIComponent(caseId)}`);
}
/** POST one verdict; resolves ok only on the server's durable 204. */
export async function postVerdict(body) {
    const resp = await fetch("/api/verdict", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
    });
    if (resp.status === 204) {
        return { ok: true, status: 204 };
    }
    let error = `HTTP ${resp.status}`;
    try {
        const payload = await resp.json();
        if (payload && payload.error) {
            error = String(payload.error);
        }
    }
    catch {
        // non-JSON error body; keep the status text
    }
    return { ok: false, status: resp.status, error };
}
