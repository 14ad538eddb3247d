"""Monte-Carlo BER/FER harness.

Frames are the unit of work: every frame's noise and schedule randomness is
keyed by (seed, frame_index), so totals are identical for any worker count
and an interrupted sweep resumes into the same final CSV. Results append to
the CSV a row per Eb/N0 point; a JSON sidecar holds the full config and a
progress sidecar allows mid-point resume.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import time
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from . import fastpath
from .channel import ChannelConfig, frame_rng, transmit_all_zero
from .decoder import decode_nr
from .tanner import TannerGraph, parse_alist

CSV_HEADER = [
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

DECODERS = ("spa", "ms", "ms-serial", "ms-nr")

# decorrelates schedule tie-break draws from the channel noise stream
_SCHEDULE_SALT = 0x9E3779B97F4A7C15


@dataclass
class SimConfig:
    """One sweep: a code, a decoder variant, and an Eb/N0 grid."""

    code: str
    decoder: str
    ebn0_start: float
    ebn0_step: float
    ebn0_stop: float
    reliability: str = "int"  # int | real (ms-nr only)
    schedule: str = "serial"  # serial | fixed:<p> | variable (ms-nr only)
    cutting_back: bool = False
    max_iters: int = 200
    min_frame_errors: int = 100
    max_frames: int = 10**6
    seed: int = 0
    early_stop: bool = True
    sigma2_override: float | None = None
    out: str | None = None
    trace_out: str | None = None
    workers: int = 1
    batch_size: int = 512

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.ebn0_step <= 0:
            raise ValueError("ebn0 step must be positive")
        if self.ebn0_start > self.ebn0_stop + 1e-12:
            raise ValueError("ebn0 grid start must not exceed stop")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")
        if self.max_frames < 1:
            raise ValueError("impossible stop rule: max_frames < 1")

    def grid(self) -> list[float]:
        pts = []
        x = self.ebn0_start
        while x <= self.ebn0_stop + 1e-9:
            pts.append(round(x, 9))
            x += self.ebn0_step
        return pts

    def schedule_mode(self):
        if self.schedule == "serial":
            return "serial", None
        if self.schedule == "variable":
            return "variable", None
        if self.schedule.startswith("fixed:"):
            return "fixed", int(self.schedule.split(":", 1)[1])
        raise ValueError(f"unknown schedule {self.schedule!r}")


@dataclass
class SimResultRow:
    ebn0_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    mean_iters: float
    mean_iters_converged: float
    wall_s: float

    @classmethod
    def from_tallies(cls, ebn0, t, n_vars, wall_s):
        conv = t["converged"]
        return cls(
            ebn0_db=ebn0,
            frames=t["frames"],
            bit_errors=t["bit_errors"],
            frame_errors=t["frame_errors"],
            ber=t["bit_errors"] / (t["frames"] * n_vars),
            fer=t["frame_errors"] / t["frames"],
            mean_iters=t["iters"] / t["frames"],
            mean_iters_converged=(t["iters_converged"] / conv) if conv else float("nan"),
            wall_s=wall_s,
        )


def _zero_tallies():
    return {
        "frames": 0,
        "bit_errors": 0,
        "frame_errors": 0,
        "iters": 0,
        "iters_converged": 0,
        "converged": 0,
    }


# ---------------------------------------------------------------------------
# Per-frame decoding (worker side)
# ---------------------------------------------------------------------------

_W = {}  # worker globals


def _init_worker(alist_text: str, cfg_dict: dict):
    g = parse_alist(alist_text)
    _W["graph"] = g
    _W["arr"] = fastpath.graph_arrays(g)
    _W["cfg"] = SimConfig(**cfg_dict)
    _W["rate"] = (g.n_vars - g.n_checks) / g.n_vars


def _decode_one(cfg: SimConfig, g: TannerGraph, arr, rate, ebn0, frame_index):
    ch = ChannelConfig(
        ebn0_db=ebn0,
        code_rate=rate,
        seed=cfg.seed,
        sigma2_override=cfg.sigma2_override,
    )
    gamma = np.asarray(transmit_all_zero(ch, g.n_vars, frame_index))
    dec = cfg.decoder
    if dec == "spa":
        hard, conv, used = fastpath.flooding_spa(
            gamma, arr.edge_var, arr.check_ptr, arr.check_edge,
            cfg.max_iters, cfg.early_stop, 30.0, arr.dc_max,
        )
    elif dec == "ms":
        hard, conv, used = fastpath.flooding_ms(
            gamma, arr.edge_var, arr.check_ptr, arr.check_edge,
            cfg.max_iters, cfg.early_stop,
        )
    elif dec == "ms-serial":
        order = np.arange(g.n_checks, dtype=np.int64)
        hard, conv, used = fastpath.serial_ms(
            gamma, arr.edge_var, arr.check_ptr, arr.check_edge,
            arr.var_ptr, arr.var_edge, order, cfg.max_iters, cfg.early_stop,
        )
    elif dec == "ms-nr" and cfg.reliability == "int":
        keys = frame_rng(cfg.seed ^ _SCHEDULE_SALT, frame_index).random(
            (cfg.max_iters, g.n_checks)
        )
        hard, conv, used = fastpath.nr_ms_fbar(
            gamma, arr.edge_var, arr.check_ptr, arr.check_edge,
            arr.var_ptr, arr.var_edge, keys, arr.dc_max,
            cfg.cutting_back, cfg.max_iters, cfg.early_stop,
        )
    else:  # ms-nr with the real-valued reliability: reference path
        mode, p = cfg.schedule_mode()
        out = decode_nr(
            g,
            gamma,
            reliability_kind="real_f",
            mode=mode,
            p=p,
            cutting_back=cfg.cutting_back,
            max_iters=cfg.max_iters,
            rng=frame_rng(cfg.seed ^ _SCHEDULE_SALT, frame_index),
            early_stop=cfg.early_stop,
        )
        hard, conv, used = np.asarray(out.hard_bits), out.converged, out.iterations_used
    nbit = int(np.count_nonzero(hard))
    return nbit, bool(conv), int(used)


def _worker_range(args):
    ebn0, start, stop = args
    cfg, g, arr, rate = _W["cfg"], _W["graph"], _W["arr"], _W["rate"]
    t = _zero_tallies()
    for f in range(start, stop):
        nbit, conv, used = _decode_one(cfg, g, arr, rate, ebn0, f)
        t["frames"] += 1
        t["bit_errors"] += nbit
        t["frame_errors"] += 1 if nbit else 0
        t["iters"] += used
        if conv:
            t["converged"] += 1
            t["iters_converged"] += used
    return t


def _merge(into, part):
    for k in into:
        into[k] += part[k]


# ---------------------------------------------------------------------------
# Sweep driver
# ---------------------------------------------------------------------------


def _read_rows(path) -> list[SimResultRow]:
    rows = []
    with open(path, newline="") as f:
        for rec in csv.DictReader(f):
            rows.append(
                SimResultRow(
                    ebn0_db=float(rec["ebn0_db"]),
                    frames=int(rec["frames"]),
                    bit_errors=int(rec["bit_errors"]),
                    frame_errors=int(rec["frame_errors"]),
                    ber=float(rec["ber"]),
                    fer=float(rec["fer"]),
                    mean_iters=float(rec["mean_iters"]),
                    mean_iters_converged=float(rec["mean_iters_converged"]),
                    wall_s=float(rec["wall_s"]),
                )
            )
    return rows


def _append_row(path, row: SimResultRow, write_header: bool):
    with open(path, "a", newline="") as f:
        w = csv.writer(f)
        if write_header:
            w.writerow(CSV_HEADER)
        w.writerow(
            [
                f"{row.ebn0_db:g}",
                row.frames,
                row.bit_errors,
                row.frame_errors,
                f"{row.ber:.8g}",
                f"{row.fer:.8g}",
                f"{row.mean_iters:.6g}",
                f"{row.mean_iters_converged:.6g}",
                f"{row.wall_s:.3f}",
            ]
        )
        f.flush()
        os.fsync(f.fileno())


def run_sweep(cfg: SimConfig, _abort_after_batches: int | None = None) -> list[SimResultRow]:
    """Decode frames per grid point until a stop rule fires.

    Stop rules are evaluated on fixed batch boundaries so the outcome does
    not depend on the worker count. With an out path, completed points are
    appended to the CSV as they finish and a .progress.json sidecar permits
    resuming an interrupted point; rerunning a finished sweep just loads the
    CSV. `_abort_after_batches` is a test hook simulating a crash.
    """
    with open(cfg.code) as f:
        alist_text = f.read()
    g = parse_alist(alist_text)
    arr = fastpath.graph_arrays(g)
    rate = (g.n_vars - g.n_checks) / g.n_vars
    if rate <= 0:
        raise ValueError("code with M >= N: rate would be nonpositive")

    done_rows: dict[float, SimResultRow] = {}
    progress_path = None
    if cfg.out:
        if os.path.exists(cfg.out):
            for row in _read_rows(cfg.out):
                done_rows[row.ebn0_db] = row
        with open(cfg.out + ".json", "w") as f:
            json.dump(dataclasses.asdict(cfg), f, indent=2)
        progress_path = cfg.out + ".progress.json"

    if cfg.trace_out:
        _export_first_frame_trace(cfg, g, rate)

    pool = None
    if cfg.workers > 1:
        pool = Pool(
            cfg.workers,
            initializer=_init_worker,
            initargs=(alist_text, dataclasses.asdict(cfg)),
        )
    else:
        _init_worker(alist_text, dataclasses.asdict(cfg))

    rows: list[SimResultRow] = []
    batches_done = 0
    try:
        for ebn0 in cfg.grid():
            if ebn0 in done_rows:
                rows.append(done_rows[ebn0])
                continue
            t = _zero_tallies()
            next_frame = 0
            wall_prev = 0.0
            if progress_path and os.path.exists(progress_path):
                with open(progress_path) as f:
                    prog = json.load(f)
                if prog.get("ebn0") == ebn0:
                    t = prog["tallies"]
                    next_frame = prog["next_frame"]
                    wall_prev = prog.get("wall_s", 0.0)
            t0 = time.time()
            while (
                t["frame_errors"] < cfg.min_frame_errors
                and t["frames"] < cfg.max_frames
            ):
                batch = min(cfg.batch_size, cfg.max_frames - t["frames"])
                if pool is not None:
                    per = max(1, batch // cfg.workers)
                    spans = [
                        (ebn0, next_frame + i, min(next_frame + i + per, next_frame + batch))
                        for i in range(0, batch, per)
                    ]
                    for part in pool.map(_worker_range, spans):
                        _merge(t, part)
                else:
                    _merge(t, _worker_range((ebn0, next_frame, next_frame + batch)))
                next_frame += batch
                batches_done += 1
                if progress_path:
                    with open(progress_path + ".tmp", "w") as f:
                        json.dump(
                            {
                                "ebn0": ebn0,
                                "next_frame": next_frame,
                                "tallies": t,
                                "wall_s": wall_prev + time.time() - t0,
                            },
                            f,
                        )
                    os.replace(progress_path + ".tmp", progress_path)
                if _abort_after_batches is not None and batches_done >= _abort_after_batches:
                    raise KeyboardInterrupt("simulated crash (test hook)")
            row = SimResultRow.from_tallies(
                ebn0, t, g.n_vars, wall_prev + time.time() - t0
            )
            rows.append(row)
            if cfg.out:
                _append_row(cfg.out, row, write_header=not os.path.exists(cfg.out))
                if progress_path and os.path.exists(progress_path):
                    os.remove(progress_path)
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return rows


def _export_first_frame_trace(cfg: SimConfig, g: TannerGraph, rate: float):
    """Reference-path decode of frame 0 at the first grid point, trace to file."""
    from .decoder import decode_flooding, decode_serial, export_trace

    ebn0 = cfg.grid()[0]
    ch = ChannelConfig(ebn0, rate, seed=cfg.seed, sigma2_override=cfg.sigma2_override)
    gamma = transmit_all_zero(ch, g.n_vars, 0)
    if cfg.decoder == "spa":
        out = decode_flooding(g, gamma, kernel="spa", max_iters=cfg.max_iters,
                              early_stop=cfg.early_stop, record_trace=True)
    elif cfg.decoder == "ms":
        out = decode_flooding(g, gamma, kernel="minsum", max_iters=cfg.max_iters,
                              early_stop=cfg.early_stop, record_trace=True)
    elif cfg.decoder == "ms-serial":
        out = decode_serial(g, gamma, max_iters=cfg.max_iters,
                            early_stop=cfg.early_stop, record_trace=True)
    else:
        mode, p = cfg.schedule_mode()
        out = decode_nr(
            g,
            gamma,
            reliability_kind="real_f" if cfg.reliability == "real" else "integer_fbar",
            mode=mode,
            p=p,
            cutting_back=cfg.cutting_back,
            max_iters=cfg.max_iters,
            rng=frame_rng(cfg.seed ^ _SCHEDULE_SALT, 0),
            early_stop=cfg.early_stop,
            record_trace=True,
        )
    with open(cfg.trace_out, "w") as f:
        f.write(export_trace(out.trace))


# ---------------------------------------------------------------------------
# Decoder comparison
# ---------------------------------------------------------------------------


def interpolate_crossing(ebn0: list[float], fer: list[float], target: float) -> float | None:
    """Eb/N0 where the curve crosses `target`, log-linear in FER.

    Scans left to right for the first bracketing pair; zero-FER points are
    unusable on the log scale and end the scan.
    """
    pts = [(x, f) for x, f in zip(ebn0, fer) if f > 0]
    for (x0, f0), (x1, f1) in zip(pts, pts[1:]):
        if f0 >= target >= f1:
            if f0 == f1:
                return x0
            lg0, lg1, lgt = np.log10(f0), np.log10(f1), np.log10(target)
            return x0 + (x1 - x0) * (lg0 - lgt) / (lg0 - lg1)
    return None


@dataclass
class ComparisonTable:
    labels: list[str]
    ebn0: list[float]
    fer: dict[str, list[float]]
    frames: dict[str, list[int]]
    frame_errors: dict[str, list[int]]
    mean_iters: dict[str, list[float]]
    target_fer: float
    crossings: dict[str, float | None]
    gaps_db: dict[str, float | None] = field(default_factory=dict)

    def __str__(self):
        ref = self.labels[0]
        head = ["ebn0_db"] + [f"fer[{l}]" for l in self.labels] + [
            f"ratio[{l}/{ref}]" for l in self.labels[1:]
        ]
        lines = ["  ".join(f"{h:>16s}" for h in head)]
        for i, x in enumerate(self.ebn0):
            cells = [f"{x:16.3f}"] + [f"{self.fer[l][i]:16.3e}" for l in self.labels]
            fref = self.fer[ref][i]
            for l in self.labels[1:]:
                r = self.fer[l][i] / fref if fref > 0 else float("inf")
                cells.append(f"{r:16.3f}")
            lines.append("  ".join(cells))
        lines.append(f"target FER {self.target_fer:g} crossings and gaps to {ref}:")
        for l in self.labels:
            c = self.crossings[l]
            gap = self.gaps_db.get(l)
            ctxt = f"{c:.4f} dB" if c is not None else "not bracketed"
            gtxt = f"{gap:+.4f} dB" if gap is not None else "n/a"
            lines.append(f"  {l:12s} crossing {ctxt:>16s}  gap {gtxt}")
        return "\n".join(lines)


def compare_decoders(
    cfgs: list[SimConfig],
    labels: list[str] | None = None,
    target_fer: float = 1e-2,
) -> ComparisonTable:
    """Run (or load) the sweeps and join them: per-point FER ratios against
    the first config plus interpolated SNR gaps at the target FER."""
    if labels is None:
        labels = [c.decoder for c in cfgs]
    if len(set(labels)) != len(labels):
        raise ValueError("labels must be unique")
    grid = cfgs[0].grid()
    code = cfgs[0].code
    for c in cfgs[1:]:
        if c.grid() != grid:
            raise ValueError("mismatched Eb/N0 grids")
        if c.code != code:
            raise ValueError("decoders must share the code")
    fer, frames, fe, mi = {}, {}, {}, {}
    for label, cfg in zip(labels, cfgs):
        rows = run_sweep(cfg)
        fer[label] = [r.fer for r in rows]
        frames[label] = [r.frames for r in rows]
        fe[label] = [r.frame_errors for r in rows]
        mi[label] = [r.mean_iters for r in rows]
    crossings = {l: interpolate_crossing(grid, fer[l], target_fer) for l in labels}
    ref_cross = crossings[labels[0]]
    gaps = {}
    for l in labels:
        c = crossings[l]
        gaps[l] = (c - ref_cross) if (c is not None and ref_cross is not None) else None
    return ComparisonTable(
        labels=labels,
        ebn0=grid,
        fer=fer,
        frames=frames,
        frame_errors=fe,
        mean_iters=mi,
        target_fer=target_fer,
        crossings=crossings,
        gaps_db=gaps,
    )


def bootstrap_gap_ci(
    table: ComparisonTable,
    label: str,
    n_boot: int = 400,
    seed: int = 0,
    level: float = 0.95,
) -> tuple[float, float]:
    """Bootstrap CI for the SNR gap of `label` to the reference curve at the
    table's target FER, resampling per-point frame errors binomially."""
    rng = np.random.default_rng(seed)
    ref = table.labels[0]
    lo_q, hi_q = (1 - level) / 2, 1 - (1 - level) / 2
    gaps = []
    for _ in range(n_boot):
        resampled = {}
        for l in (ref, label):
            fs = []
            for f, n in zip(table.fer[l], table.frames[l]):
                fs.append(rng.binomial(n, min(max(f, 0.0), 1.0)) / n)
            resampled[l] = fs
        ca = interpolate_crossing(table.ebn0, resampled[label], table.target_fer)
        cb = interpolate_crossing(table.ebn0, resampled[ref], table.target_fer)
        if ca is not None and cb is not None:
            gaps.append(ca - cb)
    if not gaps:
        raise ValueError("bootstrap produced no bracketed resamples")
    return float(np.quantile(gaps, lo_q)), float(np.quantile(gaps, hi_q))
