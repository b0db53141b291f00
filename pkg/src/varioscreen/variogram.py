"""Empirical variogram cloud of a displacement field.

For every unordered pair of landmarks the cloud holds the separation of
their fixed-image positions (h, mm) and the squared difference of their
displacement vectors (eps, mm^2).  A field of K landmarks yields exactly
K(K-1)/2 cloud points.  eps stays in squared units throughout.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from varioscreen.kernels import pairwise_cloud
from varioscreen.model import DisplacementField


class EmptyCloud(ValueError):
    pass


class VariogramPoint(NamedTuple):
    i: int
    j: int
    h: float
    eps: float


@dataclass(frozen=True)
class VariogramCloud:
    """All (h, eps) pair points of one case, sorted by h ascending with ties
    broken by the (i, j) index pair.  Indices refer to the field's landmark
    order; landmark_ids carries the matching identifiers."""

    case_id: str
    landmark_ids: tuple[str, ...]
    i: np.ndarray
    j: np.ndarray
    h: np.ndarray
    eps: np.ndarray

    def __len__(self) -> int:
        return len(self.h)

    @property
    def points(self) -> list[VariogramPoint]:
        return list(self.iter_points())

    def iter_points(self) -> Iterator[VariogramPoint]:
        for n in range(len(self.h)):
            yield VariogramPoint(
                int(self.i[n]), int(self.j[n]),
                float(self.h[n]), float(self.eps[n]),
            )

    def pairs_of(self, index: int) -> np.ndarray:
        """Boolean mask over cloud points selecting pairs involving the
        landmark at the given field index."""
        return (self.i == index) | (self.j == index)


def compute_cloud(field: DisplacementField) -> VariogramCloud:
    """Build the empirical variogram cloud of a displacement field.

    For each pair: h = |fixed_i - fixed_j|, eps = |d_i - d_j|^2 with
    d = moving - fixed.  Output ordering is deterministic regardless of
    how the pairwise kernel scheduled the computation.
    """
    fixed = field.fixed_points()
    disp = field.displacements()
    i, j, h, eps = pairwise_cloud(fixed, disp)
    order = np.lexsort((j, i, h))
    return VariogramCloud(
        case_id=field.case_id,
        landmark_ids=field.ids(),
        i=i[order],
        j=j[order],
        h=h[order],
        eps=eps[order],
    )


class TrendBin(NamedTuple):
    h_center: float
    eps_median: float | None  # None when the bin holds no pairs
    pair_count: int


def binned_trend(cloud: VariogramCloud, n_bins: int) -> list[TrendBin]:
    """Median eps per equal-width h bin spanning [0, max h].

    Medians (not means) so the trend is robust to the very outliers being
    screened for.  Empty bins report pair_count 0 and no median.
    """
    if len(cloud) == 0:
        raise EmptyCloud(f"case {cloud.case_id!r} has an empty cloud")
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    h_max = float(cloud.h.max())
    width = h_max / n_bins if h_max > 0 else 1.0
    idx = np.minimum((cloud.h / width).astype(np.int64), n_bins - 1)
    bins = []
    for b in range(n_bins):
        mask = idx == b
        count = int(mask.sum())
        median = float(np.median(cloud.eps[mask])) if count else None
        bins.append(TrendBin((b + 0.5) * width, median, count))
    return bins


def write_cloud_csv(cloud: VariogramCloud) -> bytes:
    """Cloud as CSV: header i,j,h_mm,eps_mm2 and one row per point, values
    with 9 significant digits."""
    buf = io.StringIO()
    buf.write("i,j,h_mm,eps_mm2\n")
    for p in cloud.iter_points():
        buf.write(f"{p.i},{p.j},{p.h:.9g},{p.eps:.9g}\n")
    return buf.getvalue().encode("ascii")
