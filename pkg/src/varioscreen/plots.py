"""Deterministic SVG renderings of clouds and displacement fields.

Hand-rolled SVG 1.1 text rather than a plotting library: output is byte
stable across runs and platforms, diffable in tests, and needs no imaging
dependency.  Colors follow the screening convention: blue for global
outliers, green for local, grey for everything else.
"""

from __future__ import annotations

import numpy as np

from varioscreen.model import DisplacementField
from varioscreen.screening import FlagKind, OutlierFlag
from varioscreen.variogram import EmptyCloud, TrendBin, VariogramCloud

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 20, 20, 50

COLOR = {
    "normal": "#9e9e9e",
    FlagKind.GLOBAL: "#1f77b4",
    FlagKind.LOCAL: "#2ca02c",
}

PLANES = {
    "xy": (0, 1, "x (mm)", "y (mm)"),
    "xz": (0, 2, "x (mm)", "z (mm)"),
    "yz": (1, 2, "y (mm)", "z (mm)"),
}


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Scale:
    """Linear data-to-pixel map with a small padding fraction."""

    def __init__(self, lo: float, hi: float, px_lo: float, px_hi: float):
        if hi <= lo:
            hi = lo + 1.0
        span = hi - lo
        self.lo = lo - 0.02 * span
        self.hi = hi + 0.02 * span
        self.px_lo = px_lo
        self.px_hi = px_hi

    def __call__(self, v: float) -> float:
        t = (v - self.lo) / (self.hi - self.lo)
        return self.px_lo + t * (self.px_hi - self.px_lo)


def _axes(sx: _Scale, sy: _Scale, x_label: str, y_label: str) -> list[str]:
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    parts = [
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" '
        f'stroke="#333"/>',
        f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" '
        f'stroke="#333"/>',
    ]
    for t in np.linspace(sx.lo, sx.hi, 5):
        px = sx(float(t))
        parts.append(
            f'<text class="tick" x="{_fmt(px)}" y="{y0 + 16}" '
            f'font-size="10" text-anchor="middle">{float(t):.3g}</text>'
        )
    for t in np.linspace(sy.lo, sy.hi, 5):
        py = sy(float(t))
        parts.append(
            f'<text class="tick" x="{x0 - 6}" y="{_fmt(py + 3)}" '
            f'font-size="10" text-anchor="end">{float(t):.3g}</text>'
        )
    parts.append(
        f'<text class="label" x="{(x0 + x1) / 2:.0f}" y="{HEIGHT - 12}" '
        f'font-size="12" text-anchor="middle">{x_label}</text>'
    )
    parts.append(
        f'<text class="label" x="14" y="{(y0 + y1) / 2:.0f}" font-size="12" '
        f'text-anchor="middle" '
        f'transform="rotate(-90 14 {(y0 + y1) / 2:.0f})">{y_label}</text>'
    )
    return parts


def _svg(body: list[str]) -> str:
    head = (
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _flag_kind_by_index(cloud: VariogramCloud,
                        flags: list[OutlierFlag] | tuple[OutlierFlag, ...]):
    kinds: dict[int, FlagKind] = {}
    ids = list(cloud.landmark_ids)
    for flag in flags:
        kinds[ids.index(flag.landmark_id)] = flag.kind
    return kinds


def render_variogram_svg(cloud: VariogramCloud,
                         flags: tuple[OutlierFlag, ...] = (),
                         trend: list[TrendBin] | None = None) -> str:
    """Scatter of the cloud with flagged landmarks' pairs colorized and the
    binned trend overlaid.  A pair touching a global-flagged landmark is
    drawn global even if its partner is local-flagged (mirrors flag
    precedence)."""
    if len(cloud) == 0:
        raise EmptyCloud(f"case {cloud.case_id!r} has an empty cloud")
    sx = _Scale(0.0, float(cloud.h.max()), MARGIN_L, WIDTH - MARGIN_R)
    sy = _Scale(0.0, float(cloud.eps.max()), HEIGHT - MARGIN_B, MARGIN_T)
    kinds = _flag_kind_by_index(cloud, flags)
    body = _axes(sx, sy, "h (mm)", "ε (mm²)")
    if trend:
        pts = [
            f"{_fmt(sx(b.h_center))},{_fmt(sy(b.eps_median))}"
            for b in trend if b.eps_median is not None
        ]
        if pts:
            body.append(
                f'<polyline class="trend" points="{" ".join(pts)}" '
                f'fill="none" stroke="#d62728" stroke-width="1.5"/>'
            )
    ids = cloud.landmark_ids
    for p in cloud.iter_points():
        ki = kinds.get(p.i)
        kj = kinds.get(p.j)
        if FlagKind.GLOBAL in (ki, kj):
            cls, color = "pt pt-global", COLOR[FlagKind.GLOBAL]
        elif FlagKind.LOCAL in (ki, kj):
            cls, color = "pt pt-local", COLOR[FlagKind.LOCAL]
        else:
            cls, color = "pt pt-normal", COLOR["normal"]
        body.append(
            f'<circle class="{cls}" cx="{_fmt(sx(p.h))}" '
            f'cy="{_fmt(sy(p.eps))}" r="3" fill="{color}" '
            f'fill-opacity="0.7">'
            f"<title>{ids[p.i]}–{ids[p.j]}: h={p.h:.4g} mm, "
            f"ε={p.eps:.4g} mm²</title></circle>"
        )
    return _svg(body)


def render_field_svg(field: DisplacementField,
                     flags: tuple[OutlierFlag, ...] = (),
                     plane: str = "xy") -> str:
    """Displacement vectors projected onto a coordinate plane, one arrow
    per landmark from projected fixed to projected moving point.  A
    projection with no in-plane extent degenerates to a dot."""
    if plane not in PLANES:
        raise ValueError(f"plane must be one of {sorted(PLANES)}")
    ax, ay, x_label, y_label = PLANES[plane]
    fixed = field.fixed_points()
    moving = fixed + field.displacements()
    xs = np.concatenate([fixed[:, ax], moving[:, ax]])
    ys = np.concatenate([fixed[:, ay], moving[:, ay]])
    sx = _Scale(float(xs.min()), float(xs.max()), MARGIN_L, WIDTH - MARGIN_R)
    sy = _Scale(float(ys.min()), float(ys.max()), HEIGHT - MARGIN_B, MARGIN_T)
    kinds = {f.landmark_id: f.kind for f in flags}
    body = _axes(sx, sy, x_label, y_label)
    body.append(
        '<defs><marker id="arrow" viewBox="0 0 8 8" refX="7" refY="4" '
        'markerWidth="6" markerHeight="6" orient="auto">'
        '<path d="M0,0 L8,4 L0,8 z"/></marker></defs>'
    )
    for k, lm in enumerate(field.landmarks):
        kind = kinds.get(lm.id)
        cls = f"lm lm-{kind.value}" if kind else "lm lm-normal"
        color = COLOR.get(kind, COLOR["normal"])
        x1, y1 = sx(fixed[k, ax]), sy(fixed[k, ay])
        x2, y2 = sx(moving[k, ax]), sy(moving[k, ay])
        title = f"<title>{lm.id}</title>"
        if abs(x2 - x1) < 0.25 and abs(y2 - y1) < 0.25:
            body.append(
                f'<circle class="{cls}" cx="{_fmt(x1)}" cy="{_fmt(y1)}" '
                f'r="2.5" fill="{color}">{title}</circle>'
            )
        else:
            body.append(
                f'<line class="{cls}" x1="{_fmt(x1)}" y1="{_fmt(y1)}" '
                f'x2="{_fmt(x2)}" y2="{_fmt(y2)}" stroke="{color}" '
                f'stroke-width="1.5" marker-end="url(#arrow)">'
                f"{title}</line>"
            )
    return _svg(body)
