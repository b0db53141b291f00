"""Synthetic displacement fields with controllable anomalies.

Fields combine a smooth low-frequency deformation (one sinusoid per axis
along a random direction) with isotropic Gaussian annotation noise, over a
choice of landmark layouts.  Generation is a pure function of the spec: the
counter-based Philox generator gives identical streams on every platform,
so calibration numbers frozen into tests stay stable.

inject_global / inject_local plant the two outlier signatures used for
threshold calibration: a grossly displaced moving point, and a displacement
of ordinary size that contradicts its close neighbours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from varioscreen.model import (
    DisplacementField,
    Landmark,
    ScreeningConfig,
    build_field,
)
from varioscreen.variogram import compute_cloud


class IndexOutOfRange(IndexError):
    pass


class NoLocalNeighborhood(ValueError):
    pass


@dataclass(frozen=True)
class BlobsLayout:
    """Landmarks split evenly over Gaussian blobs at the given centres."""
    centers: tuple[tuple[float, float, float], ...]
    sigma: float = 2.0


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    k: int
    extent: float = 80.0
    deform_amp: float = 5.0
    deform_wavelength: float = 60.0
    noise_sigma: float = 0.5
    layout: str | BlobsLayout = "uniform"  # "uniform" | "grid" | BlobsLayout

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.extent <= 0 or self.deform_wavelength <= 0:
            raise ValueError("extent and deform_wavelength must be positive")
        if self.deform_amp < 0 or self.noise_sigma < 0:
            raise ValueError("deform_amp and noise_sigma must not be negative")
        if isinstance(self.layout, str) and self.layout not in ("uniform", "grid"):
            raise ValueError(f"unknown layout {self.layout!r}")


def _layout_points(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    if isinstance(spec.layout, BlobsLayout):
        centers = np.asarray(spec.layout.centers, dtype=np.float64)
        idx = np.arange(spec.k) % len(centers)
        return centers[idx] + rng.normal(0.0, spec.layout.sigma, (spec.k, 3))
    if spec.layout == "grid":
        n = math.ceil(spec.k ** (1.0 / 3.0))
        axis = np.linspace(0.0, spec.extent, n) if n > 1 else np.array([0.0])
        grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
        return grid.reshape(-1, 3)[: spec.k].astype(np.float64)
    return rng.uniform(0.0, spec.extent, (spec.k, 3))


# Sinusoids summed per deformation axis.  One alone re-correlates
# periodically with distance; three with independent random directions do
# not, which keeps far-apart landmarks genuinely decorrelated.
WAVES_PER_AXIS = 3


def _smooth_deformation(spec: SynthSpec, points: np.ndarray,
                        rng: np.random.Generator) -> np.ndarray:
    """Sum of sinusoids per output axis: peak amplitude deform_amp, period
    deform_wavelength, random directions and phases."""
    disp = np.zeros_like(points)
    for axis in range(3):
        for _ in range(WAVES_PER_AXIS):
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            arg = 2.0 * np.pi * (points @ direction) / spec.deform_wavelength
            disp[:, axis] += np.sin(arg + phase)
        disp[:, axis] *= spec.deform_amp / WAVES_PER_AXIS
    return disp


def generate(spec: SynthSpec) -> DisplacementField:
    """Deterministic synthetic field for the given spec."""
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    points = _layout_points(spec, rng)
    disp = _smooth_deformation(spec, points, rng)
    if spec.noise_sigma > 0:
        disp = disp + rng.normal(0.0, spec.noise_sigma, points.shape)
    landmarks = [
        Landmark(
            id=str(k + 1),
            fixed=tuple(points[k]),
            moving=tuple(points[k] + disp[k]),
        )
        for k in range(spec.k)
    ]
    return build_field(f"synth-{spec.seed}", landmarks)


def inject_global(field: DisplacementField, landmark_index: int,
                  offset_mm: tuple[float, float, float]) -> DisplacementField:
    """Copy of the field with one landmark's moving point translated by
    offset_mm; models a gross localization error."""
    if not 0 <= landmark_index < field.k:
        raise IndexOutOfRange(
            f"index {landmark_index} outside field of {field.k} landmarks"
        )
    off = np.asarray(offset_mm, dtype=np.float64)
    if float(np.linalg.norm(off)) == 0.0:
        raise ValueError("offset must be non-zero")
    lm = field.landmarks[landmark_index]
    moved = replace(lm, moving=tuple(np.asarray(lm.moving) + off))
    landmarks = list(field.landmarks)
    landmarks[landmark_index] = moved
    return build_field(field.case_id, landmarks)


def inject_local(field: DisplacementField, landmark_index: int,
                 config: ScreeningConfig | None = None) -> DisplacementField:
    """Copy of the field with one landmark's displacement replaced by the
    negated mean displacement of its short-range neighbours: ordinary in
    magnitude, contradictory in direction."""
    if not 0 <= landmark_index < field.k:
        raise IndexOutOfRange(
            f"index {landmark_index} outside field of {field.k} landmarks"
        )
    config = config or ScreeningConfig()
    cloud = compute_cloud(field)
    h_loc = float(np.quantile(cloud.h, config.local_h_quantile))
    fixed = field.fixed_points()
    me = fixed[landmark_index]
    dist = np.sqrt(((fixed - me) ** 2).sum(axis=1))
    neighbours = [
        k for k in range(field.k)
        if k != landmark_index and dist[k] <= h_loc
    ]
    if len(neighbours) < config.local_min_pairs:
        raise NoLocalNeighborhood(
            f"landmark {field.landmarks[landmark_index].id!r} has "
            f"{len(neighbours)} neighbours within {h_loc:.3g} mm, "
            f"needs {config.local_min_pairs}"
        )
    mean_disp = field.displacements()[neighbours].mean(axis=0)
    lm = field.landmarks[landmark_index]
    moved = replace(lm, moving=tuple(np.asarray(lm.fixed) - mean_disp))
    landmarks = list(field.landmarks)
    landmarks[landmark_index] = moved
    return build_field(field.case_id, landmarks)
