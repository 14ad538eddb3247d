"""Small-instance computation-tree oracle.

Replays a schedule trace to unroll the exact computation tree of one
a-posteriori value, enumerates its minimal deviations (tree codewords with
a 1 at the root covering no smaller nonzero tree codeword), evaluates the
weighted error condition sum_k [x]_k * gamma_k <= 0, and checks that every
minimal subtree of a cutting-back decode keeps an at-least-as-reliable
descendant below each of its non-final checks.

Trees are materialized explicitly under a hard node cap: this is a test
instrument, not a production decoding path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .decoder import ScheduleTrace, SEQUENTIAL
from .tanner import TannerGraph


class TreeCapError(RuntimeError):
    """Raised when a tree or deviation enumeration exceeds its cap."""

    def __init__(self, message: str, count):
        super().__init__(message)
        self.count = count


VAR_NODE = 0
CHECK_NODE = 1


@dataclass
class ComputationTree:
    """Unrolled computation tree of gamma_post[root_var] after `depth` iterations.

    Nodes are stored in BFS order as parallel arrays; children always have
    larger indices than their parent. Variable-node tags give the iteration
    at which the corresponding alpha message was computed (0 means the
    channel initialization: a leaf carrying gamma only); check-node tags give
    the iteration of the beta message.
    """

    root_var: int
    depth: int
    kind: list[int] = field(default_factory=list)
    orig: list[int] = field(default_factory=list)
    tag: list[int] = field(default_factory=list)
    parent: list[int] = field(default_factory=list)
    children: list[list[int]] = field(default_factory=list)

    def n_nodes(self) -> int:
        return len(self.kind)

    def n_var_copies(self) -> int:
        return sum(1 for k in self.kind if k == VAR_NODE)

    def n_check_copies(self) -> int:
        return sum(1 for k in self.kind if k == CHECK_NODE)

    def is_leaf(self, idx: int) -> bool:
        return not self.children[idx]

    def is_iteration_leaf(self, idx: int) -> bool:
        """Variable copy with no child message from its own iteration."""
        if self.kind[idx] != VAR_NODE or self.tag[idx] < 1:
            return False
        t = self.tag[idx]
        return all(self.tag[c] != t for c in self.children[idx])

    def is_final_check(self, idx: int) -> bool:
        """Check copy all of whose child variables are leaves of the tree."""
        if self.kind[idx] != CHECK_NODE:
            return False
        return all(self.is_leaf(c) for c in self.children[idx])

    def iteration_subgraph(self, l: int) -> set[int]:
        """Node indices incident to an iteration-l message edge."""
        out = set()
        for idx in range(self.n_nodes()):
            if self.tag[idx] == l and self.parent[idx] >= 0:
                out.add(idx)
                out.add(self.parent[idx])
        return out


def build_tree(
    g: TannerGraph,
    trace: ScheduleTrace,
    root_var: int,
    depth_iterations: int,
    node_cap: int = 10**6,
) -> ComputationTree:
    """Unroll the computation tree of gamma_post[root_var] from a trace.

    A child check copy lands in iteration l or l-1 according to whether its
    check was processed before the parent variable's check within the
    iteration (two-phase traces put every child in l-1). Suppressed alpha
    updates (cutting back) rewind a variable copy to the last iteration in
    which its message was actually refreshed.
    """
    total = depth_iterations
    if not 1 <= total <= trace.n_iterations():
        raise ValueError(
            f"depth {total} out of range: trace records {trace.n_iterations()} iterations"
        )
    if not 0 <= root_var < g.n_vars:
        raise ValueError(f"root variable {root_var} out of range")

    sequential = trace.kind == SEQUENTIAL
    pos = [None] * (total + 1)
    suppressed = [frozenset()] * (total + 1)
    for l in range(1, total + 1):
        if sequential:
            pos[l] = trace.flat_positions(l - 1)
        suppressed[l] = frozenset(trace.suppressed_edges(l - 1))

    tree = ComputationTree(root_var=root_var, depth=total)

    def add_node(kind, orig, tag, parent):
        idx = len(tree.kind)
        if idx >= node_cap:
            raise TreeCapError(f"tree exceeds the node cap {node_cap}", node_cap)
        tree.kind.append(kind)
        tree.orig.append(orig)
        tree.tag.append(tag)
        tree.parent.append(parent)
        tree.children.append([])
        if parent >= 0:
            tree.children[parent].append(idx)
        return idx

    root = add_node(VAR_NODE, root_var, total, -1)
    queue: list[int] = []
    for m in g.var_checks[root_var]:
        queue.append(add_node(CHECK_NODE, m, total, root))

    head = 0
    while head < len(queue):
        q = queue[head]
        head += 1
        if tree.kind[q] == CHECK_NODE:
            m, l = tree.orig[q], tree.tag[q]
            parent_var = tree.orig[tree.parent[q]]
            for e in g.check_edges[m]:
                n = g.edge_var[e]
                if n == parent_var:
                    continue
                t = l
                while t >= 1 and e in suppressed[t]:
                    t -= 1
                queue.append(add_node(VAR_NODE, n, t, q))
        else:
            n, t = tree.orig[q], tree.tag[q]
            if t == 0:
                continue  # channel leaf
            parent_check = tree.orig[tree.parent[q]]
            my_pos = pos[t][parent_check] if sequential else None
            for m2 in g.var_checks[n]:
                if m2 == parent_check:
                    continue
                if sequential and pos[t][m2] < my_pos:
                    queue.append(add_node(CHECK_NODE, m2, t, q))
                elif t - 1 >= 1:
                    queue.append(add_node(CHECK_NODE, m2, t - 1, q))
    return tree


# ---------------------------------------------------------------------------
# Minimal deviations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinimalDeviation:
    """Support of one minimal tree codeword: x is 1 exactly on var_copies."""

    var_copies: tuple[int, ...]
    check_copies: tuple[int, ...]

    def multiplicity(self, tree: ComputationTree, n_vars: int) -> np.ndarray:
        """[x]_k: number of copies of original variable k carrying a 1."""
        mult = np.zeros(n_vars, dtype=np.int64)
        for p in self.var_copies:
            mult[tree.orig[p]] += 1
        return mult


def count_minimal_deviations(tree: ComputationTree) -> int:
    """Exact deviation count: product over a variable's child checks of the
    sum over each check's variable children (exact big-integer recursion)."""
    n = tree.n_nodes()
    w = [0] * n
    for idx in range(n - 1, -1, -1):
        if tree.kind[idx] == VAR_NODE:
            acc = 1
            for c in tree.children[idx]:
                acc *= w[c]
            w[idx] = acc
        else:
            w[idx] = sum(w[c] for c in tree.children[idx])
    return w[0] if n else 0


def enumerate_minimal_deviations(
    tree: ComputationTree, cap: int = 100_000
) -> list[MinimalDeviation]:
    """Exhaustive, duplicate-free enumeration by the root-down recursion:
    the root joins the support, every check child of a supported variable
    joins, and each supported check picks exactly one variable child.

    Counts first; raises TreeCapError carrying the count when it exceeds cap.
    """
    total = count_minimal_deviations(tree)
    if total > cap:
        raise TreeCapError(f"{total} deviations exceed the cap {cap}", total)
    n = tree.n_nodes()
    sel: list[list[tuple[tuple[int, ...], tuple[int, ...]]] | None] = [None] * n
    for idx in range(n - 1, -1, -1):
        if tree.kind[idx] == VAR_NODE:
            combos = [((idx,), ())]
            for c in tree.children[idx]:
                combos = [
                    (vs + pvs, cs + pcs) for (vs, cs) in combos for (pvs, pcs) in sel[c]
                ]
            sel[idx] = combos
        else:
            out = []
            for c in tree.children[idx]:
                for vs, cs in sel[c]:
                    out.append((vs, (idx,) + cs))
            sel[idx] = out
        for c in tree.children[idx]:
            sel[c] = None  # free
    return [MinimalDeviation(vs, cs) for vs, cs in (sel[0] or [])]


def check_eq1(
    dev: MinimalDeviation, tree: ComputationTree, gamma
) -> tuple[float, bool]:
    """Weighted deviation cost sum_k [x]_k gamma_k and whether it is <= 0."""
    cost = 0.0
    for p in dev.var_copies:
        cost += gamma[tree.orig[p]]
    return cost, cost <= 0.0


# ---------------------------------------------------------------------------
# Proposition check
# ---------------------------------------------------------------------------


@dataclass
class PropositionResult:
    holds: bool
    counterexample: dict | None
    n_subtrees: int
    n_checked: int
    n_vacuous: int
    n_final: int


def check_proposition(
    tree: ComputationTree,
    reliabilities: list[list],
    cap: int = 100_000,
) -> PropositionResult:
    """Verify, over every minimal subtree X, that each non-final check copy
    q in X with descendants in X has one at least as reliable as itself.

    `reliabilities` holds the scheduler's recorded per-check values for each
    iteration (index 0 = iteration 1); comparisons use the natural order of
    those values (integers, or lexicographic sigma/f' pairs), evaluated at
    the descendant's iteration tag. Ties count as "at least as reliable".
    Checks whose branch was cut back all the way to a channel leaf have no
    descendants inside X to compare; these are tallied as vacuous rather
    than treated as violations, matching the final-check carve-out's intent
    (nothing below to pass through).
    """
    devs = enumerate_minimal_deviations(tree, cap=cap)
    final = [tree.is_final_check(q) for q in range(tree.n_nodes())]
    n_checked = 0
    n_vacuous = 0
    n_final = 0
    for di, dev in enumerate(devs):
        in_x = set(dev.var_copies)
        for q in dev.check_copies:
            if final[q]:
                n_final += 1
                continue
            chosen = [c for c in tree.children[q] if c in in_x]
            v = chosen[0]
            descendants = tree.children[v]
            if not descendants:
                n_vacuous += 1
                continue
            n_checked += 1
            m = tree.orig[q]
            ok = False
            for q2 in descendants:
                tau = tree.tag[q2]
                vals = reliabilities[tau - 1]
                if vals[tree.orig[q2]] <= vals[m]:
                    ok = True
                    break
            if not ok:
                return PropositionResult(
                    holds=False,
                    counterexample={
                        "deviation": di,
                        "check_copy": q,
                        "check": m,
                        "iteration": tree.tag[q],
                        "descendants": [
                            (tree.orig[q2], tree.tag[q2]) for q2 in descendants
                        ],
                    },
                    n_subtrees=len(devs),
                    n_checked=n_checked,
                    n_vacuous=n_vacuous,
                    n_final=n_final,
                )
    return PropositionResult(True, None, len(devs), n_checked, n_vacuous, n_final)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def deviation_report(
    g: TannerGraph,
    trace: ScheduleTrace,
    gamma,
    root_var: int,
    depth_iterations: int,
    cap: int = 100_000,
    node_cap: int = 10**6,
) -> str:
    """One-paragraph text summary for (root, L): tree size, deviation count,
    minimum deviation cost, error-condition verdict, proposition verdict."""
    tree = build_tree(g, trace, root_var, depth_iterations, node_cap=node_cap)
    count = count_minimal_deviations(tree)
    lines = [
        f"root variable {root_var}, depth {depth_iterations} iteration(s)",
        f"tree nodes: {tree.n_nodes()} "
        f"({tree.n_var_copies()} variable, {tree.n_check_copies()} check copies)",
        f"minimal deviations: {count}",
    ]
    if count > cap:
        lines.append(f"enumeration skipped: count exceeds cap {cap}")
        return "\n".join(lines) + "\n"
    devs = enumerate_minimal_deviations(tree, cap=cap)
    costs = [check_eq1(d, tree, gamma)[0] for d in devs]
    if costs:
        mn = min(costs)
        lines.append(f"min deviation cost: {mn:.6g}")
        lines.append(f"error condition (cost <= 0): {'met' if mn <= 0 else 'not met'}")
    if trace.reliabilities:
        res = check_proposition(tree, trace.reliabilities, cap=cap)
        verdict = "holds" if res.holds else f"violated ({res.counterexample})"
        lines.append(
            f"reliable-descendant proposition: {verdict} "
            f"[{res.n_checked} compared, {res.n_vacuous} cut to channel, "
            f"{res.n_final} final]"
        )
    else:
        lines.append("reliable-descendant proposition: n/a (no recorded reliabilities)")
    return "\n".join(lines) + "\n"
