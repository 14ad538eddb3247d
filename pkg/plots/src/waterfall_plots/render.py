"""Waterfall figures (BER/FER vs Eb/N0) from sweep CSV files.

Consumes only the harness CSV schema; never re-runs simulations. Rendering
is deterministic for fixed inputs: fixed figure size, DPI and fonts, no
timestamps. The optional gap annotation interpolates each curve's crossing
of a target error rate log-linearly, the same rule the harness uses, so the
annotated number matches its comparison tables.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

CSV_SCHEMA = [
    "ebn0_db",
    "frames",
    "bit_errors",
    "frame_errors",
    "ber",
    "fer",
    "mean_iters",
    "mean_iters_converged",
    "wall_s",
]

METRICS = ("ber", "fer")

_MARKERS = ("o", "s", "^", "d", "v", "*", "x")


class PlotDataError(ValueError):
    """CSV schema mismatch or unusable data."""


@dataclass
class Curve:
    label: str
    ebn0: list[float]
    values: list[float]


@dataclass
class PlotSpec:
    """What to draw: (csv path, label) pairs, a metric, an output image."""

    curves: list[tuple[str, str]]
    out: str
    metric: str = "fer"
    gap_target: float | None = None
    title: str | None = None
    figsize: tuple[float, float] = (7.0, 5.0)
    dpi: int = 130

    def __post_init__(self):
        if self.metric not in METRICS:
            raise PlotDataError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if not self.curves:
            raise PlotDataError("at least one (csv, label) curve is required")


def read_curve(path: str, label: str, metric: str) -> Curve:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_SCHEMA:
            raise PlotDataError(
                f"{path}: header {reader.fieldnames} does not match the sweep schema"
            )
        ebn0, values = [], []
        for rec in reader:
            ebn0.append(float(rec["ebn0_db"]))
            values.append(float(rec[metric]))
    if not ebn0:
        raise PlotDataError(f"{path}: no data rows")
    order = sorted(range(len(ebn0)), key=lambda i: ebn0[i])
    return Curve(label, [ebn0[i] for i in order], [values[i] for i in order])


def crossing(curve: Curve, target: float) -> float | None:
    """Eb/N0 where the curve reaches `target`, log-linear interpolation."""
    pts = [(x, v) for x, v in zip(curve.ebn0, curve.values) if v > 0]
    for (x0, v0), (x1, v1) in zip(pts, pts[1:]):
        if v0 >= target >= v1:
            if v0 == v1:
                return x0
            l0, l1, lt = math.log10(v0), math.log10(v1), math.log10(target)
            return x0 + (x1 - x0) * (l0 - lt) / (l0 - l1)
    return None


@dataclass
class RenderResult:
    out: str
    crossings_db: dict[str, float | None]
    gaps_db: dict[str, float | None] = field(default_factory=dict)


def render_waterfall(spec: PlotSpec) -> RenderResult:
    """Draw the semilog-y waterfall plot and write the image file.

    Returns the per-curve target crossings and their gaps to the first
    curve (when a gap target was requested), so callers and tests can check
    the annotated numbers directly.
    """
    curves = [read_curve(path, label, spec.metric) for path, label in spec.curves]

    fig, ax = plt.subplots(figsize=spec.figsize, dpi=spec.dpi)
    for i, c in enumerate(curves):
        xs = [x for x, v in zip(c.ebn0, c.values) if v > 0]
        ys = [v for v in c.values if v > 0]
        ax.semilogy(xs, ys, marker=_MARKERS[i % len(_MARKERS)], label=c.label)
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel(spec.metric.upper())
    ax.grid(True, which="both", linestyle=":", linewidth=0.6)
    ax.legend(loc="lower left")
    if spec.title:
        ax.set_title(spec.title)

    result = RenderResult(out=spec.out, crossings_db={c.label: None for c in curves})
    if spec.gap_target is not None:
        ref = curves[0].label
        result.crossings_db = {c.label: crossing(c, spec.gap_target) for c in curves}
        ref_x = result.crossings_db[ref]
        notes = []
        for c in curves:
            x = result.crossings_db[c.label]
            gap = (x - ref_x) if (x is not None and ref_x is not None) else None
            result.gaps_db[c.label] = gap
            if c.label != ref and gap is not None:
                notes.append(f"{c.label}: {gap:+.3f} dB")
        ax.axhline(spec.gap_target, color="gray", linewidth=0.8, linestyle="--")
        if notes:
            ax.text(
                0.98,
                0.97,
                f"gap to {ref} @ {spec.metric.upper()}={spec.gap_target:g}\n"
                + "\n".join(notes),
                transform=ax.transAxes,
                ha="right",
                va="top",
                fontsize=8,
                bbox=dict(boxstyle="round", facecolor="white", alpha=0.8),
            )

    fig.savefig(spec.out, metadata={"Software": None})
    plt.close(fig)
    return result
