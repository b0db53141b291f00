"""Variogram-cloud screening of annotated landmark correspondences.

Builds empirical variogram clouds from landmark displacement fields, flags
candidate localization-error outliers and problematic landmark layouts, and
runs a blinded expert-review loop producing a final quality report.
"""

__version__ = "0.1.0"

from varioscreen.model import (
    DisplacementField,
    Landmark,
    ScreeningConfig,
    build_field,
    displacement,
)
from varioscreen.screening import screen_case
from varioscreen.variogram import binned_trend, compute_cloud

__all__ = [
    "DisplacementField",
    "Landmark",
    "ScreeningConfig",
    "binned_trend",
    "build_field",
    "compute_cloud",
    "displacement",
    "screen_case",
    "__version__",
]
