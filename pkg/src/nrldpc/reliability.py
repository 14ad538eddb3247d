"""Per-check hard syndromes, depth-2 neighborhood reliability, scheduling.

Reliability of a check is measured from the information in its depth-2
graph ball, frozen at the top of each decoder iteration:

  f'(m)   real unreliability: sum of |beta| arriving at unverified checks
          adjacent through m's variables (lower is more reliable),
  f(m)    lexicographic pair (sigma_m, f'(m)),
  fbar(m) integer alternative sigma_m*(dc_max+1) + sum of per-edge flags,
          in [0, dc_max] for verified checks and [dc_max+1, 2*dc_max+1]
          for unverified ones.

Schedules order checks most reliable first; ties are broken by a seeded
random key, which realizes the random order inside each equal-reliability
bucket.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tanner import TannerGraph

REAL_F = "real_f"
INTEGER_FBAR = "integer_fbar"

SERIAL = "serial"
FIXED = "fixed"
VARIABLE = "variable"


@dataclass
class CheckHardInfo:
    """Hard bits, per-check parity values and per-edge unverified flags.

    sigma[m] is the XOR of hard bits over H(m); a check is verified when
    sigma[m] == 0. edge_flags[e] for edge (m, n) is 0 iff every check in
    H(n) other than m is verified.
    """

    hard_bits: list[int]
    sigma: list[int]
    edge_flags: list[int]

    def all_verified(self) -> bool:
        return not any(self.sigma)


def compute_hard_info(g: TannerGraph, gamma_post) -> CheckHardInfo:
    """Hard decisions and check verification state for one iteration.

    The hard decision maps gamma_post >= 0 to bit 0 (ties decide 0).
    """
    s = [0 if x >= 0.0 else 1 for x in gamma_post]
    sigma = []
    for vars_m in g.check_vars:
        acc = 0
        for n in vars_m:
            acc ^= s[n]
        sigma.append(acc)
    # unverified[n]: number of unverified checks adjacent to variable n
    unverified = [0] * g.n_vars
    for m, sm in enumerate(sigma):
        if sm:
            for n in g.check_vars[m]:
                unverified[n] += 1
    edge_flags = [0] * g.n_edges
    ev, ec = g.edge_var, g.edge_check
    for e in range(g.n_edges):
        if unverified[ev[e]] - sigma[ec[e]] > 0:
            edge_flags[e] = 1
    return CheckHardInfo(s, sigma, edge_flags)


def f_prime(g: TannerGraph, hard: CheckHardInfo, beta) -> list[float]:
    """Real-valued depth-2 unreliability of each check.

    f'(m) = sum over n in H(m) of sum over unverified m' in H(n) \\ {m}
    of |beta_{m',n}|. Each check's contributions are summed in sorted
    order: Min-Sum duplicates message magnitudes across edges, so distinct
    checks routinely see the same multiset of contributions, and the
    deterministic order makes such sums compare as exact ties (broken by
    the scheduler's seeded keys) instead of rounding-noise orderings.
    Assumes a 4-cycle free graph for the extrinsic reading; callers check
    and warn.
    """
    sigma = hard.sigma
    ev, ec = g.edge_var, g.edge_check
    var_edges = g.var_edges
    out = [0.0] * g.n_checks
    for m in range(g.n_checks):
        vals = []
        for e in g.check_edges[m]:
            for e2 in var_edges[ev[e]]:
                m2 = ec[e2]
                if m2 != m and sigma[m2]:
                    vals.append(abs(beta[e2]))
        vals.sort()
        acc = 0.0
        for v in vals:
            acc += v
        out[m] = acc
    return out


def f_bar(g: TannerGraph, hard: CheckHardInfo) -> list[int]:
    """Integer-valued reliability fbar(m) = sigma_m*(dc_max+1) + sum of flags."""
    base = g.dc_max + 1
    flags = hard.edge_flags
    out = []
    for m in range(g.n_checks):
        acc = base if hard.sigma[m] else 0
        for e in g.check_edges[m]:
            acc += flags[e]
        out.append(acc)
    return out


@dataclass
class ReliabilityView:
    """Frozen per-iteration reliability values plus the derived ordering.

    kind selects the comparator: REAL_F uses the lexicographic pair
    (sigma, f'), INTEGER_FBAR uses fbar. `order` is the deterministic
    most-reliable-first permutation (ties in input order); `buckets` holds
    the C_f partition for the integer kind, keyed by fbar value ascending.
    """

    kind: str
    sigma: list[int]
    fprime: list[float] | None = None
    fbar: list[int] | None = None
    order: list[int] | None = None
    buckets: dict[int, list[int]] | None = None

    def f_pairs(self) -> list[tuple[int, float]]:
        if self.kind != REAL_F:
            raise ValueError("f pairs only exist for the real-valued kind")
        return list(zip(self.sigma, self.fprime))

    def values(self):
        """Comparator values, index by check id."""
        if self.kind == REAL_F:
            return self.f_pairs()
        return list(self.fbar)


def build_reliability_view(
    g: TannerGraph, hard: CheckHardInfo, beta=None, kind: str = INTEGER_FBAR
) -> ReliabilityView:
    if kind == REAL_F:
        if beta is None:
            raise ValueError("real-valued reliability needs the beta messages")
        fp = f_prime(g, hard, beta)
        order = sorted(range(g.n_checks), key=lambda m: (hard.sigma[m], fp[m]))
        return ReliabilityView(kind=REAL_F, sigma=list(hard.sigma), fprime=fp, order=order)
    if kind == INTEGER_FBAR:
        fb = f_bar(g, hard)
        buckets: dict[int, list[int]] = {}
        for m, f in enumerate(fb):
            buckets.setdefault(f, []).append(m)
        buckets = dict(sorted(buckets.items()))
        return ReliabilityView(kind=INTEGER_FBAR, sigma=list(hard.sigma), fbar=fb, buckets=buckets)
    raise ValueError(f"unknown reliability kind {kind!r}")


def order_checks(
    view: ReliabilityView,
    mode: str,
    rng: np.random.Generator,
    p: int | None = None,
) -> list[list[int]]:
    """Turn a reliability view into an ordered list of check groups.

    serial: singleton groups, most reliable first, random order inside each
    equal-reliability class. fixed: the same flattened order chopped into
    ceil(M/p) groups of size <= p. variable: one group per nonempty
    reliability class, ascending.
    """
    if mode == FIXED:
        if p is None or p <= 0:
            raise ValueError("fixed parallelism needs p >= 1")
    elif mode not in (SERIAL, VARIABLE):
        raise ValueError(f"unknown scheduling mode {mode!r}")

    m_total = len(view.sigma)
    keys = rng.random(m_total)
    if view.kind == INTEGER_FBAR:
        rank = np.lexsort((keys, np.asarray(view.fbar)))
        values = view.fbar
    else:
        rank = np.lexsort((keys, np.asarray(view.fprime), np.asarray(view.sigma)))
        values = view.f_pairs()
    flat = [int(m) for m in rank]

    if mode == SERIAL:
        return [[m] for m in flat]
    if mode == FIXED:
        return [flat[i : i + p] for i in range(0, m_total, p)]
    # variable parallelism: split where the comparator value changes
    groups: list[list[int]] = []
    current: list[int] = []
    last = None
    for m in flat:
        v = values[m]
        if current and v != last:
            groups.append(current)
            current = []
        current.append(m)
        last = v
    if current:
        groups.append(current)
    return groups
