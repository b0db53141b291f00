"""Screening report document: canonical JSON serialization and the
multi-case summary table.

A document bundles, per case, the screening result together with the
landmark coordinates it was computed from, so the review server can work
from the report file alone.  The JSON form is byte-stable: object keys
sorted, floats limited to 9 significant digits, UTF-8, newline-terminated.
generated_at is the only run-dependent value and can be pinned for
reproducible artifacts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from varioscreen.model import (
    DisplacementField,
    Landmark,
    ScreeningConfig,
    build_field,
)
from varioscreen.screening import (
    CloudStats,
    DistributionFinding,
    FindingKind,
    FlagKind,
    OutlierFlag,
    ScreeningReport,
)

SCHEMA_VERSION = "1"

REVIEW_CATEGORIES = ("certain", "unsure", "normal")
REVIEW_SCORES = (1, 2, 3, 4)


class SchemaVersionUnsupported(ValueError):
    pass


class MalformedDocument(ValueError):
    pass


class DuplicateCaseId(ValueError):
    pass


@dataclass(frozen=True)
class ReviewVerdict:
    """One expert judgement on a queued landmark: a triage category plus a
    1 (poor) .. 4 (good) quality score."""

    case_id: str
    landmark_id: str
    category: str
    score: int
    reviewer: str = "anonymous"

    def __post_init__(self):
        if self.category not in REVIEW_CATEGORIES:
            raise ValueError(
                f"category must be one of {REVIEW_CATEGORIES}, "
                f"got {self.category!r}"
            )
        if self.score not in REVIEW_SCORES:
            raise ValueError(
                f"score must be one of {REVIEW_SCORES}, got {self.score!r}"
            )


@dataclass(frozen=True)
class CaseRecord:
    """A screened case plus the landmark pairs it was screened from."""

    result: ScreeningReport
    landmarks: tuple[Landmark, ...]

    @property
    def case_id(self) -> str:
        return self.result.case_id

    def field(self) -> DisplacementField:
        return build_field(self.case_id, self.landmarks)


@dataclass(frozen=True)
class ReportDocument:
    generated_at: str
    cases: tuple[CaseRecord, ...]
    review: tuple[ReviewVerdict, ...] | None = None
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        ids = [c.case_id for c in self.cases]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise DuplicateCaseId(f"duplicate case ids: {sorted(dupes)}")

    def case(self, case_id: str) -> CaseRecord:
        for c in self.cases:
            if c.case_id == case_id:
                return c
        raise KeyError(case_id)


def _f(value: float | None):
    """Limit a float to 9 significant digits; infinities become the string
    'inf' (JSON has no representation for them)."""
    if value is None:
        return None
    if math.isinf(value):
        return "inf"
    return float(f"{value:.9g}")


def _parse_f(value):
    if value is None:
        return None
    if value == "inf":
        return math.inf
    return float(value)


def _case_to_json(record: CaseRecord) -> dict:
    case = record.result
    return {
        "case_id": case.case_id,
        "config": {
            k: (_f(v) if isinstance(v, float) else v)
            for k, v in case.config.as_dict().items()
        },
        "stats": {
            "k": case.stats.k,
            "pair_count": case.stats.pair_count,
            "h_min": _f(case.stats.h_min),
            "h_max": _f(case.stats.h_max),
            "eps_median": _f(case.stats.eps_median),
        },
        "landmarks": [
            {
                "id": lm.id,
                "fixed": [_f(v) for v in lm.fixed],
                "moving": [_f(v) for v in lm.moving],
            }
            for lm in record.landmarks
        ],
        "outliers": [
            {
                "landmark_id": o.landmark_id,
                "kind": o.kind.value,
                "score": _f(o.score),
                "contributing_pairs": [list(p) for p in o.contributing_pairs],
            }
            for o in case.outliers
        ],
        "findings": [
            {
                "kind": f.kind.value,
                "groups": [list(g) for g in f.groups],
                "metric_mm": _f(f.metric_mm),
            }
            for f in case.findings
        ],
        "scores": {
            lm_id: {"global": _f(g), "local": _f(l)}
            for lm_id, (g, l) in case.scores.items()
        },
        "outliers_skipped": case.outliers_skipped,
        "warnings": list(case.warnings),
    }


def _case_from_json(obj: dict) -> CaseRecord:
    config = ScreeningConfig(**obj["config"])
    stats = CloudStats(
        k=int(obj["stats"]["k"]),
        pair_count=int(obj["stats"]["pair_count"]),
        h_min=_parse_f(obj["stats"]["h_min"]),
        h_max=_parse_f(obj["stats"]["h_max"]),
        eps_median=_parse_f(obj["stats"]["eps_median"]),
    )
    landmarks = tuple(
        Landmark(
            id=lm["id"],
            fixed=tuple(float(v) for v in lm["fixed"]),
            moving=tuple(float(v) for v in lm["moving"]),
        )
        for lm in obj["landmarks"]
    )
    outliers = tuple(
        OutlierFlag(
            landmark_id=o["landmark_id"],
            kind=FlagKind(o["kind"]),
            score=_parse_f(o["score"]),
            contributing_pairs=tuple(
                (int(a), int(b)) for a, b in o["contributing_pairs"]
            ),
        )
        for o in obj["outliers"]
    )
    findings = tuple(
        DistributionFinding(
            kind=FindingKind(f["kind"]),
            groups=tuple(tuple(g) for g in f["groups"]),
            metric_mm=_parse_f(f["metric_mm"]),
        )
        for f in obj["findings"]
    )
    scores = {
        lm_id: (_parse_f(s["global"]), _parse_f(s["local"]))
        for lm_id, s in obj["scores"].items()
    }
    result = ScreeningReport(
        case_id=obj["case_id"],
        config=config,
        stats=stats,
        outliers=outliers,
        findings=findings,
        scores=scores,
        outliers_skipped=obj.get("outliers_skipped"),
        warnings=tuple(obj.get("warnings", ())),
    )
    return CaseRecord(result=result, landmarks=landmarks)


def verdict_to_json(v: ReviewVerdict) -> dict:
    return {
        "case_id": v.case_id,
        "landmark_id": v.landmark_id,
        "category": v.category,
        "score": v.score,
        "reviewer": v.reviewer,
    }


def write_report_json(doc: ReportDocument) -> bytes:
    payload = {
        "schema_version": doc.schema_version,
        "generated_at": doc.generated_at,
        "cases": [_case_to_json(c) for c in doc.cases],
        "summary": summarize(
            [c.result for c in doc.cases], doc.review
        ),
        "review": None if doc.review is None else [
            verdict_to_json(v) for v in doc.review
        ],
    }
    text = json.dumps(payload, sort_keys=True, ensure_ascii=False,
                      allow_nan=False, separators=(",", ": "), indent=1)
    return (text + "\n").encode("utf-8")


def read_report_json(data: bytes) -> ReportDocument:
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedDocument(str(exc)) from None
    if not isinstance(obj, dict):
        raise MalformedDocument("top level is not an object")
    version = obj.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionUnsupported(
            f"schema_version {version!r} not supported "
            f"(expected {SCHEMA_VERSION!r})"
        )
    try:
        cases = tuple(_case_from_json(c) for c in obj["cases"])
        review = None
        if obj.get("review") is not None:
            review = tuple(
                ReviewVerdict(
                    case_id=v["case_id"],
                    landmark_id=v["landmark_id"],
                    category=v["category"],
                    score=int(v["score"]),
                    reviewer=v.get("reviewer", "anonymous"),
                )
                for v in obj["review"]
            )
        return ReportDocument(
            generated_at=obj["generated_at"],
            cases=cases,
            review=review,
        )
    except DuplicateCaseId:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDocument(f"bad document structure: {exc}") from None


def _entry(case_id: str, landmark_id: str) -> str:
    """'case(landmark)' notation used by the summary table."""
    return f"{case_id}({landmark_id})"


def summarize(cases: list[ScreeningReport] | tuple[ScreeningReport, ...],
              review: tuple[ReviewVerdict, ...] | None = None) -> dict:
    """Flagged entries grouped into one table: global and local candidates
    in case(landmark) notation, cluster cases by id, isolated landmarks in
    case(landmark) notation.  When review verdicts exist, mean scores per
    triage category are attached."""
    ids = [c.case_id for c in cases]
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        raise DuplicateCaseId(f"duplicate case ids: {sorted(dupes)}")
    table: dict = {
        "global": [],
        "local": [],
        "cluster_cases": [],
        "isolated": [],
    }
    for case in cases:
        for o in case.outliers:
            key = "global" if o.kind is FlagKind.GLOBAL else "local"
            table[key].append(_entry(case.case_id, o.landmark_id))
        for f in case.findings:
            if f.kind is FindingKind.CLUSTER:
                table["cluster_cases"].append(case.case_id)
            else:
                table["isolated"].append(
                    _entry(case.case_id, f.groups[0][0])
                )
    if review:
        means: dict[str, float | None] = {}
        for category in REVIEW_CATEGORIES:
            scores = [v.score for v in review if v.category == category]
            means[category] = _f(sum(scores) / len(scores)) if scores else None
        table["review_mean_scores"] = means
    return table
