"""Local review server: blinded verdict collection over a screened report.

Serves the web UI plus a small JSON API:

  GET  /api/report      the loaded report document with verdicts so far
  GET  /api/case/{id}   cloud points, landmarks, flags, rendered SVGs
  GET  /api/queue       the blinded review queue
  POST /api/verdict     record one verdict (204 after the append is synced)

The queue interleaves every flagged landmark with a configurable number of
randomly chosen unflagged ones per case (seeded), so the reviewer cannot
tell which items the screen selected; payload items carry the flag fields
for post-submission reveal but the UI hides them until then.

Verdicts go to an append-only newline-delimited JSON log next to the
report, fsynced before the 204 reply, and are replayed on startup: a
crashed session loses nothing.  Merging into the report document happens on
shutdown or through the finalize subcommand.
"""

from __future__ import annotations

import errno
import json
import os
import threading
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from varioscreen.plots import render_field_svg, render_variogram_svg
from varioscreen.report import (
    MalformedDocument,
    ReportDocument,
    ReviewVerdict,
    SchemaVersionUnsupported,
    read_report_json,
    verdict_to_json,
    write_report_json,
)
from varioscreen.variogram import binned_trend, compute_cloud


class PortInUse(OSError):
    pass


class MalformedReport(ValueError):
    pass


def verdict_log_path(report_path: Path) -> Path:
    return report_path.with_name(report_path.name + ".verdicts.ndjson")


def load_report(report_path: Path) -> ReportDocument:
    try:
        return read_report_json(report_path.read_bytes())
    except (MalformedDocument, SchemaVersionUnsupported) as exc:
        raise MalformedReport(f"{report_path}: {exc}") from None


def read_verdict_log(log_path: Path) -> list[ReviewVerdict]:
    verdicts: list[ReviewVerdict] = []
    if not log_path.exists():
        return verdicts
    for line in log_path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        verdicts.append(ReviewVerdict(
            case_id=obj["case_id"],
            landmark_id=obj["landmark_id"],
            category=obj["category"],
            score=int(obj["score"]),
            reviewer=obj.get("reviewer", "anonymous"),
        ))
    return verdicts


def merge_verdict_log(report_path: Path,
                      timestamp: str | None = None) -> ReportDocument:
    """Report document with the verdict log folded into its review field.
    Verdicts are ordered by queue identity (case, landmark, reviewer) for a
    deterministic document."""
    doc = load_report(report_path)
    verdicts = list(doc.review or ()) + read_verdict_log(
        verdict_log_path(report_path))
    deduped: dict[tuple, ReviewVerdict] = {}
    for v in verdicts:  # later submissions win
        deduped[(v.case_id, v.landmark_id, v.reviewer)] = v
    merged = tuple(sorted(
        deduped.values(),
        key=lambda v: (v.case_id, v.landmark_id, v.reviewer),
    ))
    from dataclasses import replace
    return replace(
        doc,
        review=merged,
        generated_at=timestamp or doc.generated_at,
    )


def build_queue(doc: ReportDocument, mix: int, seed: int) -> list[dict]:
    """Blinded queue: every flagged landmark plus `mix` randomly chosen
    unflagged ones per case, order shuffled per case (seeded)."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    queue: list[dict] = []
    for record in doc.cases:
        case = record.result
        flagged = {o.landmark_id: o.kind.value for o in case.outliers}
        items = [
            {"case_id": case.case_id, "landmark_id": lm_id,
             "flagged": True, "flag_kind": kind}
            for lm_id, kind in flagged.items()
        ]
        unflagged = [
            lm.id for lm in record.landmarks if lm.id not in flagged
        ]
        n_mix = min(mix, len(unflagged))
        if n_mix > 0:
            picks = rng.choice(len(unflagged), size=n_mix, replace=False)
            items.extend(
                {"case_id": case.case_id, "landmark_id": unflagged[int(p)],
                 "flagged": False, "flag_kind": None}
                for p in sorted(picks)
            )
        order = rng.permutation(len(items))
        queue.extend(items[int(n)] for n in order)
    return queue


class ReviewServer:
    """Wraps ThreadingHTTPServer with the report, queue and verdict log."""

    def __init__(self, report_path: Path, port: int = 8787, mix: int = 2,
                 queue_seed: int = 0, default_reviewer: str = "anonymous",
                 webui_dir: Path | None = None):
        if port != 0 and not 1024 <= port <= 65535:
            raise ValueError("port must lie in [1024, 65535] (or 0 to pick "
                             "any free port)")
        self.report_path = report_path
        self.doc = load_report(report_path)
        self.queue = build_queue(self.doc, mix=mix, seed=queue_seed)
        self.log_path = verdict_log_path(report_path)
        self.verdicts = read_verdict_log(self.log_path)
        self.default_reviewer = default_reviewer
        self.webui_dir = webui_dir or _default_webui_dir()
        self._write_lock = threading.Lock()
        try:
            self._httpd = ThreadingHTTPServer(
                ("127.0.0.1", port), _make_handler(self))
        except OSError as exc:
            if exc.errno == errno.EADDRINUSE:
                raise PortInUse(f"port {port} is already in use") from None
            raise
        self.port = self._httpd.server_address[1]

    # -- verdict log ------------------------------------------------------

    def append_verdict(self, verdict: ReviewVerdict) -> None:
        """Durably append one verdict; returns only after fsync."""
        line = json.dumps(verdict_to_json(verdict), sort_keys=True)
        with self._write_lock:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self.verdicts.append(verdict)

    def done_keys(self) -> set[tuple[str, str]]:
        return {(v.case_id, v.landmark_id) for v in self.verdicts}

    # -- payloads ---------------------------------------------------------

    def report_payload(self) -> dict:
        from dataclasses import replace
        doc = replace(self.doc, review=tuple(self.verdicts))
        return json.loads(write_report_json(doc))

    def case_payload(self, case_id: str) -> dict | None:
        try:
            record = self.doc.case(case_id)
        except KeyError:
            return None
        field = record.field()
        cloud = compute_cloud(field)
        trend = binned_trend(cloud, record.result.config.n_bins)
        flags = record.result.outliers
        return {
            "case_id": case_id,
            "landmarks": [
                {"id": lm.id, "fixed": list(lm.fixed),
                 "moving": list(lm.moving)}
                for lm in record.landmarks
            ],
            "cloud": [
                {"i": p.i, "j": p.j, "h": p.h, "eps": p.eps}
                for p in cloud.iter_points()
            ],
            "flags": [
                {"landmark_id": o.landmark_id, "kind": o.kind.value,
                 "score": None if o.score == float("inf") else o.score}
                for o in flags
            ],
            "findings": [
                {"kind": f.kind.value, "groups": [list(g) for g in f.groups],
                 "metric_mm": f.metric_mm}
                for f in record.result.findings
            ],
            "svg": {
                "variogram": render_variogram_svg(cloud, flags, trend),
                "field_xy": render_field_svg(field, flags, "xy"),
                "field_xz": render_field_svg(field, flags, "xz"),
                "field_yz": render_field_svg(field, flags, "yz"),
            },
        }

    def queue_payload(self) -> list[dict]:
        done = self.done_keys()
        return [
            {**item, "done": (item["case_id"], item["landmark_id"]) in done}
            for item in self.queue
        ]

    def handle_verdict(self, obj: dict) -> tuple[int, dict | None]:
        """Validate and store a verdict; (status, error payload)."""
        if not isinstance(obj, dict):
            return 422, {"error": "body must be a JSON object"}
        try:
            verdict = ReviewVerdict(
                case_id=str(obj["case_id"]),
                landmark_id=str(obj["landmark_id"]),
                category=obj.get("category"),
                score=obj.get("score"),
                reviewer=str(obj.get("reviewer", self.default_reviewer)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            return 422, {"error": str(exc)}
        try:
            record = self.doc.case(verdict.case_id)
        except KeyError:
            return 422, {"error": f"unknown case {verdict.case_id!r}"}
        ids = {lm.id for lm in record.landmarks}
        if verdict.landmark_id not in ids:
            return 422, {
                "error": f"unknown landmark {verdict.landmark_id!r} in "
                         f"case {verdict.case_id!r}"
            }
        self.append_verdict(verdict)
        return 204, None

    # -- lifecycle --------------------------------------------------------

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def shutdown_and_merge(self) -> None:
        self.stop()
        merged = merge_verdict_log(self.report_path)
        self.report_path.write_bytes(write_report_json(merged))


def _default_webui_dir() -> Path:
    return Path(__file__).parent / "webui"


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
    ".map": "application/json",
}


def _make_handler(server: ReviewServer):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            pass  # keep test output and terminals quiet

        def _send_json(self, payload, status: int = 200):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _send_204(self):
            self.send_response(HTTPStatus.NO_CONTENT)
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            path = self.path.split("?", 1)[0]
            if path == "/api/report":
                self._send_json(server.report_payload())
            elif path.startswith("/api/case/"):
                case_id = path[len("/api/case/"):]
                payload = server.case_payload(case_id)
                if payload is None:
                    self._send_json({"error": f"no case {case_id!r}"}, 404)
                else:
                    self._send_json(payload)
            elif path == "/api/queue":
                self._send_json(server.queue_payload())
            else:
                self._send_static(path)

        def do_POST(self):
            path = self.path.split("?", 1)[0]
            if path != "/api/verdict":
                self._send_json({"error": "not found"}, 404)
                return
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            try:
                obj = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                self._send_json({"error": "invalid JSON body"}, 422)
                return
            status, payload = server.handle_verdict(obj)
            if status == 204:
                self._send_204()
            else:
                self._send_json(payload, status)

        def _send_static(self, path: str):
            if path == "/":
                path = "/index.html"
            rel = path.lstrip("/")
            base = server.webui_dir.resolve()
            target = (base / rel).resolve()
            if not str(target).startswith(str(base)) or not target.is_file():
                self._send_json({"error": "not found"}, 404)
                return
            body = target.read_bytes()
            ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler
