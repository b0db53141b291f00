import type { CasePayload, QueueItem, VerdictBody } from "./types.js";

async function getJson<T>(path: string): Promise<T> {
  const resp = await fetch(path);
  if (!resp.ok) {
    throw new Error(`${path}: HTTP ${resp.status}`);
  }
  return (await resp.json()) as T;
}

export function fetchQueue(): Promise<QueueItem[]> {
  return getJson<QueueItem[]>("/api/queue");
}

export function fetchCase(caseId: string): Promise<CasePayload> {
  return getJson<CasePayload>(`/api/case/${encodeURIComponent(caseId)}`);
}

export interface VerdictResult {
  ok: boolean;
  status: number;
  error?: string;
}

/** POST one verdict; resolves ok only on the server's durable 204. */
export async function postVerdict(body: VerdictBody): Promise<VerdictResult> {
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
  } catch {
    // non-JSON error body; keep the status text
  }
  return { ok: false, status: resp.status, error };
}
