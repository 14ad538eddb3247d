"""Message-passing decoders: flooding SPA/Min-Sum, serial Min-Sum, and
Min-Sum with neighborhood-reliability scheduling and cutting back.

State per frame: a-priori gamma, a-posteriori gamma_post, per-edge
variable-to-check alpha and check-to-variable beta. Every decoder starts
from gamma_post = gamma, beta = 0 and keeps the ledger identity

    gamma_post[n] == gamma[n] + sum of beta over H(n)

exact at every group boundary (serial updates use the withdraw/add
discipline; flooding recomputes the sum). Min-Sum messages are never
clipped, which keeps the decoders exactly equivariant under positive
scaling of gamma; SPA messages are capped at +-LLR_CAP to keep the
arctanh kernel finite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import reliability as rel
from .tanner import TannerGraph, graph_has_4cycle_cached

LLR_CAP = 30.0
_PROD_CLIP = 1.0 - 1e-15

MINSUM = "minsum"
SPA = "spa"

TWO_PHASE = "two_phase"
SEQUENTIAL = "sequential"


# ---------------------------------------------------------------------------
# Check-node kernels
# ---------------------------------------------------------------------------


def check_kernel_minsum(incoming) -> list[float]:
    """Extrinsic Min-Sum outputs: sign product and minimum over the others.

    out_i = (prod_{j != i} sign(in_j)) * min_{j != i} |in_j|, sign(0) = +1.
    """
    d = len(incoming)
    if d < 2:
        raise ValueError("check kernel needs at least 2 incoming messages")
    sign_prod = 1.0
    min1 = math.inf
    min2 = math.inf
    arg1 = -1
    for i in range(d):
        x = incoming[i]
        if x < 0.0:
            sign_prod = -sign_prod
            a = -x
        else:
            a = x
        if a < min1:
            min2 = min1
            min1 = a
            arg1 = i
        elif a < min2:
            min2 = a
    out = [0.0] * d
    for i in range(d):
        s = -sign_prod if incoming[i] < 0.0 else sign_prod
        out[i] = s * (min2 if i == arg1 else min1)
    return out


def check_kernel_spa(incoming) -> list[float]:
    """Extrinsic Sum-Product outputs: 2*atanh of the tanh-half product.

    Inputs are clipped to +-LLR_CAP before tanh and outputs are capped the
    same way, so the kernel saturates instead of overflowing.
    """
    d = len(incoming)
    if d < 2:
        raise ValueError("check kernel needs at least 2 incoming messages")
    t = [0.0] * d
    for i in range(d):
        x = incoming[i]
        if x > LLR_CAP:
            x = LLR_CAP
        elif x < -LLR_CAP:
            x = -LLR_CAP
        t[i] = math.tanh(0.5 * x)
    # leave-one-out products by forward/backward sweeps (no division: exact
    # for zero inputs)
    fwd = [1.0] * (d + 1)
    for i in range(d):
        fwd[i + 1] = fwd[i] * t[i]
    out = [0.0] * d
    back = 1.0
    for i in range(d - 1, -1, -1):
        p = fwd[i] * back
        if p > _PROD_CLIP:
            p = _PROD_CLIP
        elif p < -_PROD_CLIP:
            p = -_PROD_CLIP
        v = 2.0 * math.atanh(p)
        if v > LLR_CAP:
            v = LLR_CAP
        elif v < -LLR_CAP:
            v = -LLR_CAP
        out[i] = v
        back *= t[i]
    return out


_KERNELS = {MINSUM: check_kernel_minsum, SPA: check_kernel_spa}


# ---------------------------------------------------------------------------
# State, outcome, trace containers
# ---------------------------------------------------------------------------


@dataclass
class DecoderState:
    """Live per-frame state, handed to group-boundary callbacks."""

    gamma: object
    gamma_post: object
    alpha: object
    beta: object
    leaf: object = None
    iteration: int = 0


@dataclass
class TraceIteration:
    groups: list[list[int]]
    suppressed: list[list[int]] = field(default_factory=list)


@dataclass
class ScheduleTrace:
    """Per-iteration record of the check groups actually processed.

    kind is TWO_PHASE for flooding decoders (checks inside an iteration see
    only previous-iteration messages) and SEQUENTIAL otherwise (the
    flattened group order is the dataflow order). For reliability-scheduled
    decodes, the per-iteration reliability values used by the scheduler are
    kept so the computation-tree oracle can compare them.
    """

    kind: str
    iterations: list[TraceIteration] = field(default_factory=list)
    reliability_kind: str | None = None
    reliabilities: list[list] = field(default_factory=list)

    def n_iterations(self) -> int:
        return len(self.iterations)

    def flat_positions(self, it: int) -> dict[int, int]:
        """check id -> processing position within iteration `it` (0-based)."""
        pos = {}
        k = 0
        for group in self.iterations[it].groups:
            for m in group:
                pos[m] = k
                k += 1
        return pos

    def suppressed_edges(self, it: int) -> set[int]:
        out: set[int] = set()
        for edges in self.iterations[it].suppressed:
            out.update(edges)
        return out


@dataclass
class DecodeOutcome:
    hard_bits: list[int]
    converged: bool
    iterations_used: int
    trace: ScheduleTrace | None = None
    gamma_post: list[float] | None = None
    trajectory: list[list[int]] | None = None


def export_trace(trace: ScheduleTrace) -> str:
    """Line-oriented trace text: one line per processed group."""
    lines = [f"# kind={trace.kind} iterations={trace.n_iterations()}"]
    for it, rec in enumerate(trace.iterations, start=1):
        for k, group in enumerate(rec.groups):
            sup = rec.suppressed[k] if rec.suppressed else []
            lines.append(
                f"iter={it} group={k} "
                f"checks={','.join(str(m) for m in group)} "
                f"suppressed_edges={','.join(str(e) for e in sup)}"
            )
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> ScheduleTrace:
    """Inverse of export_trace (reliability values are not in the format)."""
    kind = SEQUENTIAL
    iters: dict[int, TraceIteration] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if tok.startswith("kind="):
                    kind = tok[5:]
            continue
        fields = dict(tok.split("=", 1) for tok in line.split())
        it = int(fields["iter"])
        group = [int(x) for x in fields["checks"].split(",") if x]
        sup = [int(x) for x in fields["suppressed_edges"].split(",") if x]
        rec = iters.setdefault(it, TraceIteration(groups=[], suppressed=[]))
        rec.groups.append(group)
        rec.suppressed.append(sup)
    trace = ScheduleTrace(kind=kind)
    for it in sorted(iters):
        trace.iterations.append(iters[it])
    return trace


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _require_decodable(g: TannerGraph):
    for m, edges in enumerate(g.check_edges):
        if len(edges) < 2:
            raise ValueError(
                f"check {m} has degree {len(edges)}: extrinsic kernels need degree >= 2"
            )


def _hard_bits(gamma_post) -> list[int]:
    return [0 if x >= 0.0 else 1 for x in gamma_post]


# Min-Sum copies message magnitudes between edges, so a-posteriori values
# whose exact sum cancels to zero are routine, not measure-zero. Values
# below this fraction of the local L1 mass are rounding residue of such a
# tie and snap to exact zero, which the hard rule then decides as bit 0.
TIE_SNAP_REL = 1e-12


def _resync_gamma_post(g: TannerGraph, gamma, beta, gpost) -> None:
    """Re-establish gamma_post = gamma + sum(beta) exactly, in adjacency
    order, snapping tie residue to zero. The withdraw/add discipline keeps
    the ledger identity to within rounding; recomputing it at iteration
    boundaries drops the accumulated drift.
    """
    var_edges = g.var_edges
    for n in range(g.n_vars):
        acc = gamma[n]
        mass = abs(gamma[n])
        for e in var_edges[n]:
            acc += beta[e]
            mass += abs(beta[e])
        if acc <= TIE_SNAP_REL * mass and -acc <= TIE_SNAP_REL * mass:
            acc = 0.0
        gpost[n] = acc


def _syndrome_zero(g: TannerGraph, hard) -> bool:
    for vars_m in g.check_vars:
        acc = 0
        for n in vars_m:
            acc ^= hard[n]
        if acc:
            return False
    return True


class _FloodArrays:
    """Padded per-check index arrays for the vectorized flooding decoders."""

    def __init__(self, g: TannerGraph):
        m_total, dc = g.n_checks, g.dc_max
        self.ev = np.asarray(g.edge_var, dtype=np.int64)
        self.pad_edge = np.zeros((m_total, dc), dtype=np.int64)
        self.mask = np.zeros((m_total, dc), dtype=bool)
        for m, edges in enumerate(g.check_edges):
            self.pad_edge[m, : len(edges)] = edges
            self.mask[m, : len(edges)] = True
        self.pad_var = self.ev[self.pad_edge]
        self.n_vars = g.n_vars


def _flood_arrays(g: TannerGraph) -> _FloodArrays:
    cache = getattr(g, "_flood_cache", None)
    if cache is None:
        cache = _FloodArrays(g)
        g._flood_cache = cache
    return cache


def _flood_minsum(alpha_pad: np.ndarray, mask: np.ndarray) -> np.ndarray:
    signs = np.where(alpha_pad < 0.0, -1.0, 1.0)
    signs[~mask] = 1.0
    sign_prod = signs.prod(axis=1, keepdims=True)
    mags = np.abs(alpha_pad)
    mags[~mask] = np.inf
    arg1 = mags.argmin(axis=1)
    rows = np.arange(mags.shape[0])
    min1 = mags[rows, arg1]
    mags[rows, arg1] = np.inf
    min2 = mags.min(axis=1)
    out_mag = np.broadcast_to(min1[:, None], mags.shape).copy()
    out_mag[rows, arg1] = min2
    return sign_prod * signs * out_mag


def _flood_spa(alpha_pad: np.ndarray, mask: np.ndarray) -> np.ndarray:
    t = np.tanh(0.5 * np.clip(alpha_pad, -LLR_CAP, LLR_CAP))
    t[~mask] = 1.0
    d = t.shape[1]
    fwd = np.ones_like(t)
    back = np.ones_like(t)
    for j in range(1, d):
        fwd[:, j] = fwd[:, j - 1] * t[:, j - 1]
        back[:, d - 1 - j] = back[:, d - j] * t[:, d - j]
    loo = np.clip(fwd * back, -_PROD_CLIP, _PROD_CLIP)
    return np.clip(2.0 * np.arctanh(loo), -LLR_CAP, LLR_CAP)


# ---------------------------------------------------------------------------
# Flooding decoder (two-phase parallel scheduling)
# ---------------------------------------------------------------------------


def decode_flooding(
    g: TannerGraph,
    gamma,
    kernel: str = MINSUM,
    max_iters: int = 200,
    early_stop: bool = True,
    record_trace: bool = False,
    track_trajectory: bool = False,
    on_group_end=None,
) -> DecodeOutcome:
    """All checks per iteration, computed from previous-iteration messages."""
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if kernel not in _KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    _require_decodable(g)
    arr = _flood_arrays(g)
    kern = _flood_minsum if kernel == MINSUM else _flood_spa

    gamma = np.asarray(gamma, dtype=np.float64)
    gpost = gamma.copy()
    beta = np.zeros(g.n_edges, dtype=np.float64)
    alpha = gpost[arr.ev].copy()

    trace = ScheduleTrace(kind=TWO_PHASE) if record_trace else None
    trajectory: list[list[int]] | None = [] if track_trajectory else None
    state = DecoderState(gamma=gamma, gamma_post=gpost, alpha=alpha, beta=beta)
    all_checks = list(range(g.n_checks))

    used = max_iters
    converged = False
    for it in range(1, max_iters + 1):
        alpha = gpost[arr.ev] - beta
        out = kern(alpha[arr.pad_edge], arr.mask)
        beta = np.zeros(g.n_edges, dtype=np.float64)
        beta[arr.pad_edge[arr.mask]] = out[arr.mask]
        gpost = gamma + np.bincount(arr.ev, weights=beta, minlength=g.n_vars)
        mass = np.abs(gamma) + np.bincount(arr.ev, weights=np.abs(beta), minlength=g.n_vars)
        gpost[np.abs(gpost) <= TIE_SNAP_REL * mass] = 0.0
        state.gamma_post, state.beta, state.alpha, state.iteration = gpost, beta, alpha, it
        if trace is not None:
            trace.iterations.append(TraceIteration(groups=[all_checks], suppressed=[[]]))
        if on_group_end is not None:
            on_group_end(state, it, 0)
        hard = gpost < 0.0
        if trajectory is not None:
            trajectory.append([int(b) for b in hard])
        if early_stop:
            synd = np.bitwise_xor.reduce(np.where(arr.mask, hard[arr.pad_var], False), axis=1)
            if not synd.any():
                converged = True
                used = it
                break

    hard_bits = [int(b) for b in (gpost < 0.0)]
    if not converged:
        converged = _syndrome_zero(g, hard_bits)
    return DecodeOutcome(
        hard_bits=hard_bits,
        converged=converged,
        iterations_used=used,
        trace=trace,
        gamma_post=[float(x) for x in gpost],
        trajectory=trajectory,
    )


# ---------------------------------------------------------------------------
# Serial (layered) decoder with a fixed permutation
# ---------------------------------------------------------------------------


def decode_serial(
    g: TannerGraph,
    gamma,
    kernel: str = MINSUM,
    max_iters: int = 200,
    order=None,
    early_stop: bool = True,
    record_trace: bool = False,
    track_trajectory: bool = False,
    on_group_end=None,
) -> DecodeOutcome:
    """Check-serial scheduling: refresh incoming alpha just before each check,
    then withdraw the old beta from gamma_post and add the new one."""
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if kernel not in _KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    _require_decodable(g)
    if order is None:
        order = list(range(g.n_checks))
    else:
        order = [int(m) for m in order]
        if sorted(order) != list(range(g.n_checks)):
            raise ValueError("order must be a permutation of the check nodes")
    kern = _KERNELS[kernel]

    gamma_l = [float(x) for x in gamma]
    gpost = list(gamma_l)
    beta = [0.0] * g.n_edges
    alpha = [gamma_l[n] for n in g.edge_var]
    state = DecoderState(gamma=gamma_l, gamma_post=gpost, alpha=alpha, beta=beta)

    trace = ScheduleTrace(kind=SEQUENTIAL) if record_trace else None
    trajectory: list[list[int]] | None = [] if track_trajectory else None
    check_edges, check_vars = g.check_edges, g.check_vars

    used = max_iters
    converged = False
    for it in range(1, max_iters + 1):
        state.iteration = it
        for k, m in enumerate(order):
            edges = check_edges[m]
            vars_m = check_vars[m]
            incoming = [gpost[n] - beta[e] for e, n in zip(edges, vars_m)]
            for e, a in zip(edges, incoming):
                alpha[e] = a
            new = kern(incoming)
            for e, n, b_new in zip(edges, vars_m, new):
                gpost[n] += b_new - beta[e]
                beta[e] = b_new
            if on_group_end is not None:
                on_group_end(state, it, k)
        if trace is not None:
            trace.iterations.append(
                TraceIteration(groups=[[m] for m in order], suppressed=[[] for _ in order])
            )
        _resync_gamma_post(g, gamma_l, beta, gpost)
        hard = _hard_bits(gpost)
        if trajectory is not None:
            trajectory.append(hard)
        if early_stop and _syndrome_zero(g, hard):
            converged = True
            used = it
            break

    hard_bits = _hard_bits(gpost)
    if not converged:
        converged = _syndrome_zero(g, hard_bits)
    return DecodeOutcome(
        hard_bits=hard_bits,
        converged=converged,
        iterations_used=used,
        trace=trace,
        gamma_post=list(gpost),
        trajectory=trajectory,
    )


# ---------------------------------------------------------------------------
# Min-Sum with neighborhood reliabilities (and optional cutting back)
# ---------------------------------------------------------------------------


def decode_nr(
    g: TannerGraph,
    gamma,
    reliability_kind: str = rel.INTEGER_FBAR,
    mode: str = rel.SERIAL,
    p: int | None = None,
    cutting_back: bool = True,
    max_iters: int = 200,
    rng=0,
    early_stop: bool = True,
    record_trace: bool = False,
    track_trajectory: bool = False,
    on_group_end=None,
) -> DecodeOutcome:
    """Min-Sum decoding ordered by per-iteration check reliabilities.

    Top of every iteration: hard bits, check verification, reliability view
    (f' uses the beta standing at the end of the previous iteration), leaf
    flags all set. Then the scheduled groups are processed; inside a group
    checks are committed sequentially in the listed order. With cutting_back,
    an alpha message whose variable still has its leaf flag set keeps the
    stored value from the previous iteration instead of being refreshed.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    _require_decodable(g)
    rng = np.random.default_rng(rng)
    if reliability_kind == rel.REAL_F and graph_has_4cycle_cached(g):
        warnings.warn(
            "graph has 4-cycles: f' loses its extrinsic interpretation", stacklevel=2
        )

    gamma_l = [float(x) for x in gamma]
    gpost = list(gamma_l)
    beta = [0.0] * g.n_edges
    alpha = [gamma_l[n] for n in g.edge_var]
    leaf = [1] * g.n_vars
    state = DecoderState(gamma=gamma_l, gamma_post=gpost, alpha=alpha, beta=beta, leaf=leaf)

    trace = (
        ScheduleTrace(kind=SEQUENTIAL, reliability_kind=reliability_kind)
        if record_trace
        else None
    )
    trajectory: list[list[int]] | None = [] if track_trajectory else None
    check_edges, check_vars = g.check_edges, g.check_vars

    used = max_iters
    converged = False
    for it in range(1, max_iters + 1):
        state.iteration = it
        hard = rel.compute_hard_info(g, gpost)
        if early_stop and it > 1 and hard.all_verified():
            converged = True
            used = it - 1
            break
        view = rel.build_reliability_view(
            g, hard, beta=beta if reliability_kind == rel.REAL_F else None, kind=reliability_kind
        )
        groups = rel.order_checks(view, mode, rng, p)
        for n in range(g.n_vars):
            leaf[n] = 1

        rec = TraceIteration(groups=[], suppressed=[]) if trace is not None else None
        for k, group in enumerate(groups):
            sup_edges: list[int] = []
            for m in group:
                edges = check_edges[m]
                vars_m = check_vars[m]
                for e, n in zip(edges, vars_m):
                    if cutting_back and leaf[n]:
                        sup_edges.append(e)
                    else:
                        alpha[e] = gpost[n] - beta[e]
                new = check_kernel_minsum([alpha[e] for e in edges])
                for e, n, b_new in zip(edges, vars_m, new):
                    gpost[n] += b_new - beta[e]
                    beta[e] = b_new
                for n in vars_m:
                    leaf[n] = 0
            if rec is not None:
                rec.groups.append(list(group))
                rec.suppressed.append(sup_edges)
            if on_group_end is not None:
                on_group_end(state, it, k)
        if trace is not None:
            trace.iterations.append(rec)
            trace.reliabilities.append(view.values())
        _resync_gamma_post(g, gamma_l, beta, gpost)
        if trajectory is not None:
            trajectory.append(_hard_bits(gpost))

    final_hard = rel.compute_hard_info(g, gpost)
    if not converged:
        converged = final_hard.all_verified()
    return DecodeOutcome(
        hard_bits=list(final_hard.hard_bits),
        converged=converged,
        iterations_used=used,
        trace=trace,
        gamma_post=list(gpost),
        trajectory=trajectory,
    )
