"""Command line: waterfall-plot --metric fer --out fig.png <csv:label>...

Also runnable as `python -m waterfall_plots`.
"""

from __future__ import annotations

import argparse
import sys

from .render import METRICS, PlotSpec, render_waterfall


def parse_curve(text: str) -> tuple[str, str]:
    if ":" not in text:
        raise argparse.ArgumentTypeError(f"expected <csv:label>, got {text!r}")
    path, label = text.rsplit(":", 1)
    if not path or not label:
        raise argparse.ArgumentTypeError(f"expected <csv:label>, got {text!r}")
    return path, label


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="waterfall-plot",
        description="Render BER/FER waterfall curves from sweep CSV files.",
    )
    ap.add_argument("curves", nargs="+", type=parse_curve, metavar="csv:label")
    ap.add_argument("--metric", choices=METRICS, default="fer")
    ap.add_argument("--out", required=True, help="output image path (png/pdf/svg)")
    ap.add_argument(
        "--gap-at",
        type=float,
        default=None,
        help="annotate SNR gaps to the first curve at this target error rate",
    )
    ap.add_argument("--title", default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = PlotSpec(
        curves=args.curves,
        out=args.out,
        metric=args.metric,
        gap_target=args.gap_at,
        title=args.title,
    )
    result = render_waterfall(spec)
    print(f"wrote {result.out}")
    for label, gap in result.gaps_db.items():
        if gap is not None and label != spec.curves[0][1]:
            print(f"gap {label} -> {spec.curves[0][1]}: {gap:+.4f} dB")
    return 0


if __name__ == "__main__":
    sys.exit(main())
