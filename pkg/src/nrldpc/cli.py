"""Command-line Monte-Carlo sweep driver.

Example:
    nrldpc-sim --code codes/regular_3_6_n1008.alist --decoder ms-nr \\
        --reliability int --schedule variable --cutting-back \\
        --ebn0 1.0:0.5:3.0 --min-frame-errors 100 --max-frames 20000 \\
        --seed 1 --out results/nr.csv
"""

from __future__ import annotations

import argparse
import sys

from .sim import DECODERS, SimConfig, run_sweep


def _parse_grid(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--ebn0 wants start:step:stop")
    return tuple(float(x) for x in parts)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nrldpc-sim",
        description="Monte-Carlo BER/FER sweeps for LDPC decoders "
        "(all-zero codeword over AWGN, QPSK-equivalent).",
    )
    ap.add_argument("--code", required=True, help="parity-check code (alist file)")
    ap.add_argument("--decoder", required=True, choices=DECODERS)
    ap.add_argument(
        "--reliability",
        choices=("real", "int"),
        default="int",
        help="reliability kind for ms-nr (default int)",
    )
    ap.add_argument(
        "--schedule",
        default="serial",
        help="ms-nr scheduling: serial | fixed:<p> | variable (default serial)",
    )
    ap.add_argument("--cutting-back", action="store_true", help="enable cutting back (ms-nr)")
    ap.add_argument("--ebn0", required=True, type=_parse_grid, metavar="START:STEP:STOP")
    ap.add_argument("--max-iters", type=int, default=200)
    ap.add_argument("--min-frame-errors", type=int, default=100)
    ap.add_argument("--max-frames", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-early-stop", action="store_true", help="always run max-iters")
    ap.add_argument(
        "--sigma2-override",
        type=float,
        default=None,
        help="mismatched noise variance used for LLR scaling only",
    )
    ap.add_argument("--trace-out", default=None, help="export the schedule trace of frame 0")
    ap.add_argument("--out", default=None, help="CSV output path (appended, resumable)")
    ap.add_argument("--workers", type=int, default=1, help="frame-level worker processes")
    ap.add_argument("--batch-size", type=int, default=512, help="frames per stop-rule check")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start, step, stop = args.ebn0
    cfg = SimConfig(
        code=args.code,
        decoder=args.decoder,
        reliability=args.reliability,
        schedule=args.schedule,
        cutting_back=args.cutting_back,
        ebn0_start=start,
        ebn0_step=step,
        ebn0_stop=stop,
        max_iters=args.max_iters,
        min_frame_errors=args.min_frame_errors,
        max_frames=args.max_frames,
        seed=args.seed,
        early_stop=not args.no_early_stop,
        sigma2_override=args.sigma2_override,
        out=args.out,
        trace_out=args.trace_out,
        workers=args.workers,
        batch_size=args.batch_size,
    )
    rows = run_sweep(cfg)
    print(
        "ebn0_db      frames  bit_errs  frame_errs        ber        fer"
        "   mean_it  mean_it_conv   wall_s"
    )
    for r in rows:
        print(
            f"{r.ebn0_db:7.3f} {r.frames:11d} {r.bit_errors:9d} {r.frame_errors:11d} "
            f"{r.ber:10.3e} {r.fer:10.3e} {r.mean_iters:9.2f} {r.mean_iters_converged:13.2f} "
            f"{r.wall_s:8.1f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
