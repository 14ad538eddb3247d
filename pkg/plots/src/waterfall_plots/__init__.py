"""Waterfall-figure rendering for LDPC sweep CSV artifacts."""

from .render import (
    CSV_SCHEMA,
    Curve,
    PlotDataError,
    PlotSpec,
    RenderResult,
    crossing,
    read_curve,
    render_waterfall,
)

__version__ = "0.1.0"
