"""Domain types: landmark pairs, displacement fields, screening configuration.

Coordinates are float64 millimeters in one consistent patient space per case
(RAS internally; parsers convert where a file header mandates it).  All types
are immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

# Two fixed points closer than this are treated as coincident: their pair
# separation would be ~0 and every pairwise statistic downstream degenerates.
MIN_FIXED_SEPARATION_MM = 1e-6


class ValidationError(ValueError):
    """A case failed domain validation."""


class TooFewLandmarks(ValidationError):
    pass


class DuplicateFixedPosition(ValidationError):
    pass


class NonFiniteCoordinate(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


@dataclass(frozen=True)
class Landmark:
    """One annotated correspondence: a point on the fixed image and its
    manually matched point on the moving image."""

    id: str
    fixed: tuple[float, float, float]
    moving: tuple[float, float, float]

    def __post_init__(self):
        if not self.id:
            raise ValidationError("landmark id must be non-empty")
        object.__setattr__(self, "fixed", _as_triple(self.fixed, self.id, "fixed"))
        object.__setattr__(self, "moving", _as_triple(self.moving, self.id, "moving"))

    def displacement(self) -> tuple[float, float, float]:
        """Moving-point position minus fixed-point position, component-wise."""
        return (
            self.moving[0] - self.fixed[0],
            self.moving[1] - self.fixed[1],
            self.moving[2] - self.fixed[2],
        )


def _as_triple(value, lm_id: str, which: str) -> tuple[float, float, float]:
    coords = tuple(float(v) for v in value)
    if len(coords) != 3:
        raise ValidationError(
            f"landmark {lm_id!r}: {which} point must have 3 coordinates"
        )
    if not all(math.isfinite(v) for v in coords):
        raise NonFiniteCoordinate(
            f"landmark {lm_id!r}: non-finite {which} coordinate {coords}"
        )
    return coords


@dataclass(frozen=True)
class DisplacementField:
    """A case's full set of landmark correspondences, validated.

    Use :func:`build_field` to construct.  Landmark order is preserved from
    the input; displacements are always recomputed from the stored
    fixed/moving pairs, never cached separately.
    """

    case_id: str
    landmarks: tuple[Landmark, ...]

    def __post_init__(self):
        object.__setattr__(self, "landmarks", tuple(self.landmarks))
        if len(self.landmarks) < 2:
            raise TooFewLandmarks(
                f"need at least 2 landmark pairs, got {len(self.landmarks)}"
            )
        validate_landmark_list(self.landmarks)

    @property
    def k(self) -> int:
        return len(self.landmarks)

    def ids(self) -> tuple[str, ...]:
        return tuple(lm.id for lm in self.landmarks)

    def fixed_points(self) -> np.ndarray:
        """(K, 3) float64 array of fixed-image landmark positions, mm."""
        return np.array([lm.fixed for lm in self.landmarks], dtype=np.float64)

    def displacements(self) -> np.ndarray:
        """(K, 3) float64 array of moving - fixed displacement vectors, mm."""
        fixed = self.fixed_points()
        moving = np.array([lm.moving for lm in self.landmarks], dtype=np.float64)
        return moving - fixed

    def index_of(self, landmark_id: str) -> int:
        for i, lm in enumerate(self.landmarks):
            if lm.id == landmark_id:
                return i
        raise KeyError(landmark_id)


def validate_landmark_list(landmarks: tuple[Landmark, ...]) -> None:
    """Cross-landmark checks that apply to any parsed list: unique ids and
    no coincident fixed positions.  Field size is checked separately, so a
    parser can hand back a single-landmark file intact."""
    seen: dict[str, int] = {}
    for i, lm in enumerate(landmarks):
        if lm.id in seen:
            raise DuplicateId(
                f"landmark id {lm.id!r} appears at positions "
                f"{seen[lm.id]} and {i}"
            )
        seen[lm.id] = i
    fixed = np.array([lm.fixed for lm in landmarks], dtype=np.float64)
    diff = fixed[:, None, :] - fixed[None, :, :]
    dist2 = (diff * diff).sum(axis=2)
    np.fill_diagonal(dist2, np.inf)
    hits = np.argwhere(dist2 < MIN_FIXED_SEPARATION_MM**2)
    if hits.size:
        i, j = (int(v) for v in hits[0])
        raise DuplicateFixedPosition(
            f"landmarks {landmarks[i].id!r} and {landmarks[j].id!r} share a "
            f"fixed position (separation < {MIN_FIXED_SEPARATION_MM} mm)"
        )


def displacement(lm: Landmark) -> tuple[float, float, float]:
    """Displacement vector of one landmark pair (moving - fixed), mm."""
    return lm.displacement()


def build_field(case_id: str, pairs: list[Landmark] | tuple[Landmark, ...]) -> DisplacementField:
    """Validate landmark pairs and assemble a displacement field.

    Raises TooFewLandmarks, DuplicateFixedPosition, DuplicateId or
    NonFiniteCoordinate; a returned field always satisfies every invariant.
    """
    return DisplacementField(case_id=case_id, landmarks=tuple(pairs))


@dataclass(frozen=True)
class ScreeningConfig:
    """Thresholds controlling outlier and distribution screening.

    tau_global: robust-z cutoff on per-landmark median pair difference.
    tau_local: ratio cutoff of a landmark's short-range pair differences
        against the short-range background.
    local_h_quantile: fraction of smallest pair separations considered
        "short range".
    local_min_pairs: minimum short-range pairs a landmark needs before a
        local score is defined for it.
    cluster_link_factor: single-linkage threshold as a multiple of the
        median nearest-neighbour distance.
    cluster_min_size: minimum landmarks per group for a cluster verdict.
    isolated_factor: nearest-neighbour distance multiple beyond which a
        landmark counts as isolated.
    n_bins: bin count of the binned cloud trend.
    """

    tau_global: float = 3.5
    tau_local: float = 5.0
    local_h_quantile: float = 0.25
    local_min_pairs: int = 2
    cluster_link_factor: float = 3.0
    cluster_min_size: int = 3
    isolated_factor: float = 3.0
    n_bins: int = 10

    def __post_init__(self):
        for name in ("tau_global", "tau_local", "cluster_link_factor",
                     "isolated_factor"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be strictly positive")
        if not 0.0 < self.local_h_quantile < 1.0:
            raise ValidationError("local_h_quantile must lie in (0, 1)")
        if self.local_min_pairs < 1:
            raise ValidationError("local_min_pairs must be >= 1")
        if self.cluster_min_size < 2:
            raise ValidationError("cluster_min_size must be >= 2")
        if self.n_bins < 1:
            raise ValidationError("n_bins must be >= 1")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}
