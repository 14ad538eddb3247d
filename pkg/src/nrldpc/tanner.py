"""Bipartite Tanner graph representation, alist I/O and test-code generators.

A graph holds N variable nodes and M check nodes. Every edge carries a
stable integer id; all per-edge decoder state elsewhere in the package is
addressed by edge id. Edge ids are assigned in file order (variable-major),
and adjacency lists preserve file order so that parse/serialize round-trips
reproduce the same ids.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

VAR = "var"
CHECK = "check"


class AlistError(ValueError):
    """Malformed alist content. Carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphError(ValueError):
    """Structurally invalid Tanner graph."""


@dataclass(eq=True)
class TannerGraph:
    """Sparse bipartite graph with edge-indexed adjacency in both directions.

    Attributes:
        n_vars: number of variable nodes N.
        n_checks: number of check nodes M.
        edge_var: variable endpoint of each edge, indexed by edge id.
        edge_check: check endpoint of each edge, indexed by edge id.
        var_edges: per-variable ordered list of incident edge ids.
        check_edges: per-check ordered list of incident edge ids.
        dv_max: maximum variable degree.
        dc_max: maximum check degree.
    """

    n_vars: int
    n_checks: int
    edge_var: list[int]
    edge_check: list[int]
    var_edges: list[list[int]]
    check_edges: list[list[int]]
    dv_max: int = field(default=0)
    dc_max: int = field(default=0)

    def __post_init__(self):
        self._validate()
        # Derived per-check variable lists, kept in edge order (hot path for
        # the decoders).
        self.check_vars = [[self.edge_var[e] for e in edges] for edges in self.check_edges]
        self.var_checks = [[self.edge_check[e] for e in edges] for edges in self.var_edges]
        self._has_4cycle: bool | None = None

    def _validate(self):
        if self.n_vars < 1 or self.n_checks < 1:
            raise GraphError("graph needs at least one variable and one check node")
        n_edges = len(self.edge_var)
        if len(self.edge_check) != n_edges:
            raise GraphError("edge endpoint arrays disagree in length")
        seen_var = [0] * n_edges
        seen_check = [0] * n_edges
        for n, edges in enumerate(self.var_edges):
            if not edges:
                raise GraphError(f"isolated node: variable {n} has degree 0")
            for e in edges:
                if self.edge_var[e] != n:
                    raise GraphError(f"edge {e} listed under variable {n} but points elsewhere")
                seen_var[e] += 1
        for m, edges in enumerate(self.check_edges):
            if not edges:
                raise GraphError(f"isolated node: check {m} has degree 0")
            for e in edges:
                if self.edge_check[e] != m:
                    raise GraphError(f"edge {e} listed under check {m} but points elsewhere")
                seen_check[e] += 1
        if any(c != 1 for c in seen_var) or any(c != 1 for c in seen_check):
            raise GraphError("every edge id must appear exactly once on each side")
        pairs = set(zip(self.edge_check, self.edge_var))
        if len(pairs) != n_edges:
            raise GraphError("duplicate (check, variable) pair: graph must be simple")
        dv = max(len(x) for x in self.var_edges)
        dc = max(len(x) for x in self.check_edges)
        if self.dv_max == 0:
            self.dv_max = dv
        if self.dc_max == 0:
            self.dc_max = dc
        if self.dv_max != dv or self.dc_max != dc:
            raise GraphError("declared dv_max/dc_max do not match adjacency")

    @property
    def n_edges(self) -> int:
        return len(self.edge_var)

    def var_degree(self, n: int) -> int:
        return len(self.var_edges[n])

    def check_degree(self, m: int) -> int:
        return len(self.check_edges[m])

    def dense_matrix(self) -> np.ndarray:
        """Dense 0/1 parity-check matrix, for small-instance tests."""
        h = np.zeros((self.n_checks, self.n_vars), dtype=np.uint8)
        h[self.edge_check, self.edge_var] = 1
        return h


def from_dense(h) -> TannerGraph:
    """Build a graph from a dense 0/1 matrix (rows are checks)."""
    h = np.asarray(h)
    n_checks, n_vars = h.shape
    edge_var: list[int] = []
    edge_check: list[int] = []
    var_edges: list[list[int]] = [[] for _ in range(n_vars)]
    check_edges: list[list[int]] = [[] for _ in range(n_checks)]
    # Variable-major enumeration, matching alist file order.
    for n in range(n_vars):
        for m in range(n_checks):
            if h[m, n]:
                e = len(edge_var)
                edge_var.append(n)
                edge_check.append(m)
                var_edges[n].append(e)
                check_edges[m].append(e)
    return TannerGraph(n_vars, n_checks, edge_var, edge_check, var_edges, check_edges)


# ---------------------------------------------------------------------------
# alist parsing / serialization
#
# Format: line 1 "N M"; line 2 "dv_max dc_max"; line 3 the N variable
# degrees; line 4 the M check degrees; then N lines of 1-based check indices
# per variable (zero padding allowed); then M lines of 1-based variable
# indices per check.
# ---------------------------------------------------------------------------


def _int_fields(line: str, lineno: int) -> list[int]:
    out = []
    for tok in line.split():
        try:
            out.append(int(tok))
        except ValueError:
            raise AlistError(f"non-integer token {tok!r}", lineno) from None
    return out


def parse_alist(text: str | bytes) -> TannerGraph:
    """Parse alist text into a TannerGraph.

    1-based file indices become 0-based node indices. Zero entries are
    padding and are skipped. Raises AlistError with the offending line
    number on malformed input.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii")
    raw_lines = text.splitlines()
    lines = [(i + 1, ln) for i, ln in enumerate(raw_lines) if ln.strip()]
    if len(lines) < 4:
        raise AlistError("truncated file: header lines missing")

    lineno, header = lines[0]
    fields = _int_fields(header, lineno)
    if len(fields) != 2:
        raise AlistError("header must be 'N M'", lineno)
    n_vars, n_checks = fields
    if n_vars < 1 or n_checks < 1:
        raise AlistError("N and M must be positive", lineno)

    lineno, dmax_line = lines[1]
    fields = _int_fields(dmax_line, lineno)
    if len(fields) != 2:
        raise AlistError("second line must be 'dv_max dc_max'", lineno)
    dv_max, dc_max = fields

    lineno, vdeg_line = lines[2]
    var_degrees = _int_fields(vdeg_line, lineno)
    if len(var_degrees) != n_vars:
        raise AlistError(f"expected {n_vars} variable degrees, got {len(var_degrees)}", lineno)
    if any(d < 1 for d in var_degrees):
        raise AlistError("isolated node: zero variable degree", lineno)

    lineno, cdeg_line = lines[3]
    check_degrees = _int_fields(cdeg_line, lineno)
    if len(check_degrees) != n_checks:
        raise AlistError(f"expected {n_checks} check degrees, got {len(check_degrees)}", lineno)
    if any(d < 1 for d in check_degrees):
        raise AlistError("isolated node: zero check degree", lineno)

    if max(var_degrees) != dv_max or max(check_degrees) != dc_max:
        raise AlistError("declared dv_max/dc_max disagree with the degree lists", lines[1][0])
    if sum(var_degrees) != sum(check_degrees):
        raise AlistError("variable and check degree sums differ", lines[3][0])

    if len(lines) < 4 + n_vars + n_checks:
        raise AlistError("truncated file: adjacency lines missing")

    edge_var: list[int] = []
    edge_check: list[int] = []
    var_edges: list[list[int]] = [[] for _ in range(n_vars)]
    check_edges: list[list[int]] = [[] for _ in range(n_checks)]
    edge_id: dict[tuple[int, int], int] = {}
    var_lists: list[list[int]] = []

    for n in range(n_vars):
        lineno, ln = lines[4 + n]
        entries = [x for x in _int_fields(ln, lineno) if x != 0]
        if len(entries) != var_degrees[n]:
            raise AlistError(
                f"variable {n + 1} lists {len(entries)} checks, degree says {var_degrees[n]}",
                lineno,
            )
        seen = set()
        for m1 in entries:
            if not 1 <= m1 <= n_checks:
                raise AlistError(f"check index {m1} out of range", lineno)
            if m1 in seen:
                raise AlistError(f"duplicate entry {m1}", lineno)
            seen.add(m1)
        var_lists.append([m1 - 1 for m1 in entries])

    # Edge ids in file order: variable-major scan.
    for n, checks in enumerate(var_lists):
        for m in checks:
            e = len(edge_var)
            edge_var.append(n)
            edge_check.append(m)
            var_edges[n].append(e)
            edge_id[(m, n)] = e

    for m in range(n_checks):
        lineno, ln = lines[4 + n_vars + m]
        entries = [x for x in _int_fields(ln, lineno) if x != 0]
        if len(entries) != check_degrees[m]:
            raise AlistError(
                f"check {m + 1} lists {len(entries)} variables, degree says {check_degrees[m]}",
                lineno,
            )
        seen = set()
        for n1 in entries:
            if not 1 <= n1 <= n_vars:
                raise AlistError(f"variable index {n1} out of range", lineno)
            if n1 in seen:
                raise AlistError(f"duplicate entry {n1}", lineno)
            seen.add(n1)
            key = (m, n1 - 1)
            if key not in edge_id:
                raise AlistError(
                    f"check {m + 1} lists variable {n1} but the variable lists disagree", lineno
                )
            check_edges[m].append(edge_id[key])

    return TannerGraph(
        n_vars, n_checks, edge_var, edge_check, var_edges, check_edges, dv_max, dc_max
    )


def serialize_alist(g: TannerGraph) -> str:
    """Serialize a graph to alist text (unpadded entries, LF endings)."""
    out = [f"{g.n_vars} {g.n_checks}", f"{g.dv_max} {g.dc_max}"]
    out.append(" ".join(str(len(edges)) for edges in g.var_edges))
    out.append(" ".join(str(len(edges)) for edges in g.check_edges))
    for n in range(g.n_vars):
        out.append(" ".join(str(g.edge_check[e] + 1) for e in g.var_edges[n]))
    for m in range(g.n_checks):
        out.append(" ".join(str(g.edge_var[e] + 1) for e in g.check_edges[m]))
    return "\n".join(out) + "\n"


def load_alist(path) -> TannerGraph:
    with open(path, "rb") as f:
        return parse_alist(f.read())


def save_alist(g: TannerGraph, path) -> None:
    with open(path, "w") as f:
        f.write(serialize_alist(g))


# ---------------------------------------------------------------------------
# Neighborhood and cycle queries
# ---------------------------------------------------------------------------


def neighborhood(g: TannerGraph, node: tuple[str, int], d: int) -> set[tuple[str, int]]:
    """Breadth-first ball of radius d around a node, including the node.

    Nodes are addressed as ("var", n) or ("check", m); the returned set uses
    the same convention.
    """
    kind, idx = node
    if kind == VAR:
        if not 0 <= idx < g.n_vars:
            raise ValueError(f"variable index {idx} out of range")
    elif kind == CHECK:
        if not 0 <= idx < g.n_checks:
            raise ValueError(f"check index {idx} out of range")
    else:
        raise ValueError(f"unknown node kind {kind!r}")
    if d < 0:
        raise ValueError("depth must be nonnegative")

    ball = {node}
    frontier = [node]
    for _ in range(d):
        nxt = []
        for kind, idx in frontier:
            if kind == VAR:
                neigh = ((CHECK, m) for m in g.var_checks[idx])
            else:
                neigh = ((VAR, n) for n in g.check_vars[idx])
            for other in neigh:
                if other not in ball:
                    ball.add(other)
                    nxt.append(other)
        if not nxt:
            break
        frontier = nxt
    return ball


def _shared_var_pairs(g: TannerGraph):
    """Count, per unordered check pair, how many variables they share."""
    pair_count: dict[tuple[int, int], int] = {}
    for checks in g.var_checks:
        cs = sorted(checks)
        for i in range(len(cs)):
            for j in range(i + 1, len(cs)):
                key = (cs[i], cs[j])
                pair_count[key] = pair_count.get(key, 0) + 1
    return pair_count


def has_4cycle(g: TannerGraph) -> bool:
    """True iff two distinct checks share two or more variables."""
    return any(c >= 2 for c in _shared_var_pairs(g).values())


def count_4cycles(g: TannerGraph) -> int:
    """Number of 4-cycles: one per extra shared variable beyond the first,
    counted as C(shared, 2) per check pair."""
    total = 0
    for c in _shared_var_pairs(g).values():
        if c >= 2:
            total += c * (c - 1) // 2
    return total


def graph_has_4cycle_cached(g: TannerGraph) -> bool:
    if g._has_4cycle is None:
        g._has_4cycle = has_4cycle(g)
    return g._has_4cycle


# ---------------------------------------------------------------------------
# Random code construction (test harness codes)
# ---------------------------------------------------------------------------


def _expand_degrees(spec, count: int, side: str) -> list[int]:
    if isinstance(spec, int):
        return [spec] * count
    degrees = list(spec)
    if len(degrees) != count:
        raise ValueError(f"{side} degree list has length {len(degrees)}, expected {count}")
    return degrees


def random_graph(
    n_vars: int,
    n_checks: int,
    var_degrees,
    check_degrees=None,
    seed: int = 0,
    swap_retries: int = 100,
) -> TannerGraph:
    """Random simple bipartite graph with the given degree sequences.

    var_degrees / check_degrees are an int (regular) or a per-node list.
    When check_degrees is None the edges are spread as evenly as possible
    over the checks. Construction is a configuration-model socket matching,
    followed by bounded-retry edge swaps that first remove duplicate edges
    and then 4-cycles. Deterministic for a fixed seed. Residual 4-cycles are
    reported through count_4cycles and a log warning, not an error.
    """
    vdeg = _expand_degrees(var_degrees, n_vars, "variable")
    if any(d < 1 for d in vdeg):
        raise ValueError("variable degrees must be at least 1")
    n_edges = sum(vdeg)
    if check_degrees is None:
        base, extra = divmod(n_edges, n_checks)
        if base < 1:
            raise ValueError("fewer edges than check nodes")
        cdeg = [base + 1] * extra + [base] * (n_checks - extra)
    else:
        cdeg = _expand_degrees(check_degrees, n_checks, "check")
    if sum(cdeg) != n_edges:
        raise ValueError(
            f"infeasible degree distribution: {n_edges} variable sockets vs "
            f"{sum(cdeg)} check sockets"
        )

    rng = np.random.default_rng(seed)
    var_sockets = np.repeat(np.arange(n_vars), vdeg)
    check_sockets = np.repeat(np.arange(n_checks), cdeg)
    rng.shuffle(var_sockets)
    edges = list(zip(check_sockets.tolist(), var_sockets.tolist()))

    count: dict[tuple[int, int], int] = {}
    for e in edges:
        count[e] = count.get(e, 0) + 1

    def try_swap(i: int) -> bool:
        """Cross-swap edges[i] with a random partner; keeps both degree
        sequences and never introduces a duplicate pair."""
        m1, v1 = edges[i]
        for _ in range(swap_retries):
            j = int(rng.integers(len(edges)))
            if j == i:
                continue
            m2, v2 = edges[j]
            if m1 == m2 or v1 == v2:
                continue
            if count.get((m1, v2), 0) or count.get((m2, v1), 0):
                continue
            count[(m1, v1)] -= 1
            count[(m2, v2)] -= 1
            edges[i] = (m1, v2)
            edges[j] = (m2, v1)
            count[(m1, v2)] = count.get((m1, v2), 0) + 1
            count[(m2, v1)] = count.get((m2, v1), 0) + 1
            return True
        return False

    # Phase 1: make the configuration-model multigraph simple.
    for _ in range(10):
        to_fix = [i for i, e in enumerate(edges) if count[e] > 1]
        if not to_fix:
            break
        for i in to_fix:
            if count[edges[i]] > 1:
                try_swap(i)
    if any(c > 1 for c in count.values()):
        raise ValueError("could not remove duplicate edges; distribution too dense")

    # Phase 2: best-effort 4-cycle removal by swapping one shared edge per
    # offending check pair. Residual cycles are reported, not fatal.
    for _ in range(4):
        shared: dict[tuple[int, int], list[int]] = {}
        var_checks: dict[int, list[int]] = {}
        for m, v in edges:
            var_checks.setdefault(v, []).append(m)
        for v, cs in var_checks.items():
            cs = sorted(cs)
            for a in range(len(cs)):
                for b in range(a + 1, len(cs)):
                    shared.setdefault((cs[a], cs[b]), []).append(v)
        offenders = [(pair, vs) for pair, vs in shared.items() if len(vs) >= 2]
        if not offenders:
            break
        pos_of = {e: i for i, e in enumerate(edges)}
        for (m_a, m_b), vs in offenders:
            v = vs[int(rng.integers(len(vs)))]
            i = pos_of.get((m_b, v))
            if i is None or edges[i] != (m_b, v):
                continue  # already moved by an earlier swap this pass
            if try_swap(i):
                pos_of = {e: k for k, e in enumerate(edges)}

    g = _graph_from_edge_list(n_vars, n_checks, edges)
    residual = count_4cycles(g)
    if residual:
        logger.warning("random_graph: %d residual 4-cycle(s) after swaps", residual)
    return g


def _graph_from_edge_list(n_vars, n_checks, edges) -> TannerGraph:
    edge_var: list[int] = []
    edge_check: list[int] = []
    var_edges: list[list[int]] = [[] for _ in range(n_vars)]
    check_edges: list[list[int]] = [[] for _ in range(n_checks)]
    # variable-major id assignment, as in alist files
    by_var: list[list[int]] = [[] for _ in range(n_vars)]
    for m, v in edges:
        by_var[v].append(m)
    for v in range(n_vars):
        for m in by_var[v]:
            e = len(edge_var)
            edge_var.append(v)
            edge_check.append(m)
            var_edges[v].append(e)
            check_edges[m].append(e)
    return TannerGraph(n_vars, n_checks, edge_var, edge_check, var_edges, check_edges)


def random_tree_graph(
    n_vars: int,
    n_checks: int,
    seed: int = 0,
    max_var_degree: int = 3,
    max_check_degree: int = 5,
) -> TannerGraph:
    """Random cycle-free Tanner graph (a tree) with all check degrees >= 2.

    Grows a tree from a root variable: each check attaches to an existing
    variable and brings at least one fresh child variable, so no check ends
    up degree 1. Requires n_vars >= n_checks + 1.
    """
    if n_vars < n_checks + 1:
        raise ValueError("a tree with degree-2 checks needs n_vars >= n_checks + 1")
    rng = np.random.default_rng(seed)
    # children per check: 1 + extras, capped at max_check_degree - 1
    children = [1] * n_checks
    spare = n_vars - 1 - n_checks
    if spare < 0:
        raise ValueError("not enough variables")
    capacity = [max_check_degree - 2] * n_checks
    while spare > 0:
        cands = [m for m in range(n_checks) if capacity[m] > 0]
        if not cands:
            raise ValueError("max_check_degree too small for this size")
        m = int(cands[rng.integers(len(cands))])
        children[m] += 1
        capacity[m] -= 1
        spare -= 1

    edges: list[tuple[int, int]] = []
    var_degree = [0] * n_vars
    placed_vars = [0]  # variable 0 is the root
    next_var = 1
    for m in range(n_checks):
        attachable = [v for v in placed_vars if var_degree[v] < max_var_degree]
        if not attachable:
            attachable = placed_vars  # soft cap: never fail on degree
        parent = int(attachable[rng.integers(len(attachable))])
        edges.append((m, parent))
        var_degree[parent] += 1
        for _ in range(children[m]):
            v = next_var
            next_var += 1
            edges.append((m, v))
            var_degree[v] += 1
            placed_vars.append(v)
    assert next_var == n_vars
    return _graph_from_edge_list(n_vars, n_checks, edges)
