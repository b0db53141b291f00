"""Flag candidate localization-error outliers and atypical landmark layouts.

Two outlier signatures are scored from the variogram cloud:

* global: a landmark whose pair differences are large against the whole
  field, scored as a robust z (median / MAD) of its per-landmark median eps;
* local: a landmark whose short-range pair differences are large against
  the short-range background, scored as a ratio of medians.

Layout problems are detected on the fixed-point geometry alone: single-
linkage grouping for split clusters, nearest-neighbour gaps for isolated
landmarks.  All thresholds are ratios of same-unit quantities, so verdicts
are invariant to rigid motion and uniform scaling of the coordinates.

Flags are advisory: genuinely large tissue deformation can produce the same
signatures, so every flag is meant for expert review, never auto-deletion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from varioscreen.kernels import nn_distances
from varioscreen.model import DisplacementField, ScreeningConfig
from varioscreen.variogram import VariogramCloud, compute_cloud

# Robust statistics need a handful of landmarks before they mean anything.
MIN_LANDMARKS_FOR_SCORING = 5

# Consistency factor making the MAD estimate the normal-theory sigma.
MAD_TO_SIGMA = 1.4826


class TooFewLandmarksForScreening(ValueError):
    pass


class FlagKind(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"


class FindingKind(str, Enum):
    CLUSTER = "cluster"
    ISOLATED = "isolated"


@dataclass(frozen=True)
class OutlierFlag:
    landmark_id: str
    kind: FlagKind
    score: float
    contributing_pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class DistributionFinding:
    kind: FindingKind
    # cluster: one tuple of landmark ids per qualifying group;
    # isolated: a single group holding the one landmark id.
    groups: tuple[tuple[str, ...], ...]
    metric_mm: float

    @property
    def members(self) -> tuple[str, ...]:
        return tuple(m for g in self.groups for m in g)


@dataclass(frozen=True)
class CloudStats:
    k: int
    pair_count: int
    h_min: float
    h_max: float
    eps_median: float


@dataclass(frozen=True)
class ScreeningReport:
    case_id: str
    config: ScreeningConfig
    stats: CloudStats
    outliers: tuple[OutlierFlag, ...]
    findings: tuple[DistributionFinding, ...]
    # landmark_id -> (global score, local score or None); empty when skipped
    scores: dict[str, tuple[float, float | None]]
    outliers_skipped: str | None = None
    warnings: tuple[str, ...] = ()


def _require_scoring_size(field: DisplacementField) -> None:
    if field.k < MIN_LANDMARKS_FOR_SCORING:
        raise TooFewLandmarksForScreening(
            f"case {field.case_id!r}: outlier scoring needs at least "
            f"{MIN_LANDMARKS_FOR_SCORING} landmarks, got {field.k}"
        )


def _per_landmark_eps_medians(field: DisplacementField,
                              cloud: VariogramCloud) -> np.ndarray:
    med = np.empty(field.k)
    for k in range(field.k):
        med[k] = np.median(cloud.eps[cloud.pairs_of(k)])
    return med


def global_scores(field: DisplacementField,
                  cloud: VariogramCloud) -> dict[str, float]:
    """Robust z-score of each landmark's median pair difference.

    A landmark disagreeing with the majority of the field drags all of its
    K-1 eps values up, so the median of those values stands out; the MAD
    scale makes the score resistant to masking by the outlier itself.  A
    zero MAD (perfectly uniform field) yields all-zero scores.
    """
    _require_scoring_size(field)
    g = _per_landmark_eps_medians(field, cloud)
    center = np.median(g)
    mad = np.median(np.abs(g - center))
    if mad == 0.0:
        return {lm_id: 0.0 for lm_id in field.ids()}
    z = (g - center) / (MAD_TO_SIGMA * mad)
    return {
        lm_id: max(0.0, float(z[k])) for k, lm_id in enumerate(field.ids())
    }


def _local_neighbourhood(cloud: VariogramCloud, config: ScreeningConfig):
    """Short-range pair mask: pairs with h at or below the configured
    quantile of all pair separations."""
    h_loc = float(np.quantile(cloud.h, config.local_h_quantile))
    return cloud.h <= h_loc, h_loc


def local_scores(field: DisplacementField, cloud: VariogramCloud,
                 config: ScreeningConfig) -> dict[str, float | None]:
    """Ratio of a landmark's short-range eps median to the short-range
    background median (its own pairs excluded).

    Captures landmarks of ordinary magnitude that contradict their close
    neighbours.  None where the landmark has too few short-range pairs or
    no background remains to compare against.
    """
    _require_scoring_size(field)
    short, _ = _local_neighbourhood(cloud, config)
    out: dict[str, float | None] = {}
    for k, lm_id in enumerate(field.ids()):
        mine = short & cloud.pairs_of(k)
        n_mine = int(mine.sum())
        if n_mine < config.local_min_pairs:
            out[lm_id] = None
            continue
        background = short & ~cloud.pairs_of(k)
        if not background.any():
            # every short-range pair involves this landmark: no reference
            out[lm_id] = None
            continue
        num = float(np.median(cloud.eps[mine]))
        den = float(np.median(cloud.eps[background]))
        if den == 0.0:
            out[lm_id] = math.inf if num > 0.0 else 0.0
        else:
            out[lm_id] = num / den
    return out


def detect_outliers(field: DisplacementField, cloud: VariogramCloud,
                    config: ScreeningConfig) -> list[OutlierFlag]:
    """Landmarks whose global score exceeds tau_global or whose local score
    exceeds tau_local.  A landmark carries at most one flag; global wins,
    since a gross error contaminates its short-range pairs too."""
    gscores = global_scores(field, cloud)
    lscores = local_scores(field, cloud, config)
    short, _ = _local_neighbourhood(cloud, config)
    flags: list[OutlierFlag] = []
    for k, lm_id in enumerate(field.ids()):
        mask = cloud.pairs_of(k)
        if gscores[lm_id] > config.tau_global:
            flags.append(OutlierFlag(
                landmark_id=lm_id,
                kind=FlagKind.GLOBAL,
                score=gscores[lm_id],
                contributing_pairs=_pair_refs(cloud, mask),
            ))
            continue
        lscore = lscores[lm_id]
        if lscore is not None and lscore > config.tau_local:
            flags.append(OutlierFlag(
                landmark_id=lm_id,
                kind=FlagKind.LOCAL,
                score=lscore,
                contributing_pairs=_pair_refs(cloud, mask & short),
            ))
    return flags


def _pair_refs(cloud: VariogramCloud, mask: np.ndarray):
    return tuple(
        (int(a), int(b)) for a, b in zip(cloud.i[mask], cloud.j[mask])
    )


def _single_linkage_components(fixed: np.ndarray, threshold: float) -> list[int]:
    """Union-find single linkage: points closer than threshold share a
    component.  Returns a component label per point."""
    k = fixed.shape[0]
    parent = list(range(k))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    t2 = threshold * threshold
    for a in range(k):
        for b in range(a + 1, k):
            d = fixed[a] - fixed[b]
            if float(d @ d) <= t2:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra
    return [find(a) for a in range(k)]


def detect_clusters(field: DisplacementField,
                    config: ScreeningConfig) -> DistributionFinding | None:
    """Split-cluster check on the fixed-point layout.

    Landmarks are grouped by single linkage at a threshold of
    cluster_link_factor times the median nearest-neighbour distance; two or
    more groups of at least cluster_min_size landmarks constitute a cluster
    finding.  Undersized components are left to isolated detection.
    """
    if field.k < 2 * config.cluster_min_size:
        return None
    fixed = field.fixed_points()
    nn = nn_distances(fixed)
    threshold = config.cluster_link_factor * float(np.median(nn))
    labels = _single_linkage_components(fixed, threshold)
    by_label: dict[int, list[int]] = {}
    for idx, lab in enumerate(labels):
        by_label.setdefault(lab, []).append(idx)
    groups = [
        members for members in by_label.values()
        if len(members) >= config.cluster_min_size
    ]
    if len(groups) < 2:
        return None
    groups.sort(key=lambda g: g[0])
    ids = field.ids()
    gap = min(
        float(np.sqrt(((fixed[a] - fixed[b]) ** 2).sum()))
        for gi, ga in enumerate(groups)
        for gb in groups[gi + 1:]
        for a in ga
        for b in gb
    )
    return DistributionFinding(
        kind=FindingKind.CLUSTER,
        groups=tuple(tuple(ids[m] for m in g) for g in groups),
        metric_mm=gap,
    )


def detect_isolated(field: DisplacementField,
                    config: ScreeningConfig) -> list[DistributionFinding]:
    """Landmarks whose nearest neighbour is farther than isolated_factor
    times the field's median nearest-neighbour distance."""
    if field.k < 3:
        return []
    nn = nn_distances(field.fixed_points())
    cutoff = config.isolated_factor * float(np.median(nn))
    return [
        DistributionFinding(
            kind=FindingKind.ISOLATED,
            groups=((lm_id,),),
            metric_mm=float(nn[k]),
        )
        for k, lm_id in enumerate(field.ids())
        if float(nn[k]) > cutoff
    ]


def screen_case(field: DisplacementField,
                config: ScreeningConfig | None = None) -> ScreeningReport:
    """Run the full screen on one case: cloud, outlier flags (when the
    field is large enough for robust scoring), cluster and isolated checks.

    Small fields do not fail the case; the outlier section is marked as
    skipped while geometry checks still run.
    """
    config = config or ScreeningConfig()
    cloud = compute_cloud(field)
    stats = CloudStats(
        k=field.k,
        pair_count=len(cloud),
        h_min=float(cloud.h.min()),
        h_max=float(cloud.h.max()),
        eps_median=float(np.median(cloud.eps)),
    )
    outliers: tuple[OutlierFlag, ...] = ()
    scores: dict[str, tuple[float, float | None]] = {}
    skipped = None
    if field.k >= MIN_LANDMARKS_FOR_SCORING:
        outliers = tuple(detect_outliers(field, cloud, config))
        gscores = global_scores(field, cloud)
        lscores = local_scores(field, cloud, config)
        scores = {
            lm_id: (gscores[lm_id], lscores[lm_id]) for lm_id in field.ids()
        }
    else:
        skipped = "too few landmarks"
    findings: list[DistributionFinding] = []
    cluster = detect_clusters(field, config)
    if cluster is not None:
        findings.append(cluster)
    findings.extend(detect_isolated(field, config))
    return ScreeningReport(
        case_id=field.case_id,
        config=config,
        stats=stats,
        outliers=outliers,
        findings=tuple(findings),
        scores=scores,
        outliers_skipped=skipped,
    )
