"""Numba-compiled decode loops for the Monte-Carlo harness.

These are feature-reduced twins of the reference decoders in decoder.py
(no traces, no callbacks) that return only what a sweep needs: hard bits,
convergence and the iteration count. They follow the reference float-op
order so results agree with the reference paths; the equivalence is pinned
by tests. The reliability-scheduled path covers the integer kind only; the
real-valued kind runs on the reference implementation.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .tanner import TannerGraph

F8 = np.float64
I8 = np.int64


class GraphArrays:
    """Flat CSR-style graph arrays consumable from nopython code."""

    def __init__(self, g: TannerGraph):
        self.n_vars = g.n_vars
        self.n_checks = g.n_checks
        self.n_edges = g.n_edges
        self.dc_max = g.dc_max
        self.edge_var = np.asarray(g.edge_var, dtype=I8)
        self.check_ptr = np.zeros(g.n_checks + 1, dtype=I8)
        self.check_edge = np.zeros(g.n_edges, dtype=I8)
        k = 0
        for m, edges in enumerate(g.check_edges):
            for e in edges:
                self.check_edge[k] = e
                k += 1
            self.check_ptr[m + 1] = k
        self.var_ptr = np.zeros(g.n_vars + 1, dtype=I8)
        self.var_edge = np.zeros(g.n_edges, dtype=I8)
        k = 0
        for n, edges in enumerate(g.var_edges):
            for e in edges:
                self.var_edge[k] = e
                k += 1
            self.var_ptr[n + 1] = k


def graph_arrays(g: TannerGraph) -> GraphArrays:
    cache = getattr(g, "_fast_cache", None)
    if cache is None:
        cache = GraphArrays(g)
        g._fast_cache = cache
    return cache


TIE_SNAP_REL = 1e-12  # must match decoder.TIE_SNAP_REL


@njit(cache=True)
def _resync(gamma, beta, var_ptr, var_edge, gpost):
    for n in range(gamma.shape[0]):
        acc = gamma[n]
        mass = abs(gamma[n])
        for k in range(var_ptr[n], var_ptr[n + 1]):
            acc += beta[var_edge[k]]
            mass += abs(beta[var_edge[k]])
        if acc <= TIE_SNAP_REL * mass and -acc <= TIE_SNAP_REL * mass:
            acc = 0.0
        gpost[n] = acc


@njit(cache=True)
def _syndrome_ok(gpost, edge_var, check_ptr, check_edge):
    for m in range(check_ptr.shape[0] - 1):
        acc = 0
        for k in range(check_ptr[m], check_ptr[m + 1]):
            if gpost[edge_var[check_edge[k]]] < 0.0:
                acc ^= 1
        if acc:
            return False
    return True


@njit(cache=True)
def flooding_ms(gamma, edge_var, check_ptr, check_edge, max_iters, early_stop):
    n_vars = gamma.shape[0]
    n_edges = edge_var.shape[0]
    n_checks = check_ptr.shape[0] - 1
    gpost = gamma.copy()
    beta = np.zeros(n_edges, dtype=F8)
    beta_new = np.zeros(n_edges, dtype=F8)
    mass = np.zeros(n_vars, dtype=F8)
    used = max_iters
    converged = False
    for it in range(1, max_iters + 1):
        for m in range(n_checks):
            lo = check_ptr[m]
            hi = check_ptr[m + 1]
            sign_prod = 1.0
            min1 = np.inf
            min2 = np.inf
            arg1 = -1
            for k in range(lo, hi):
                e = check_edge[k]
                a = gpost[edge_var[e]] - beta[e]
                if a < 0.0:
                    sign_prod = -sign_prod
                    a = -a
                if a < min1:
                    min2 = min1
                    min1 = a
                    arg1 = k
                elif a < min2:
                    min2 = a
            for k in range(lo, hi):
                e = check_edge[k]
                a = gpost[edge_var[e]] - beta[e]
                s = -sign_prod if a < 0.0 else sign_prod
                beta_new[e] = s * (min2 if k == arg1 else min1)
        for e in range(n_edges):
            beta[e] = beta_new[e]
        for n in range(n_vars):
            gpost[n] = 0.0
            mass[n] = 0.0
        for e in range(n_edges):
            gpost[edge_var[e]] += beta[e]
            mass[edge_var[e]] += abs(beta[e])
        for n in range(n_vars):
            gpost[n] = gamma[n] + gpost[n]
            m_n = abs(gamma[n]) + mass[n]
            if gpost[n] <= TIE_SNAP_REL * m_n and -gpost[n] <= TIE_SNAP_REL * m_n:
                gpost[n] = 0.0
        if early_stop and _syndrome_ok(gpost, edge_var, check_ptr, check_edge):
            converged = True
            used = it
            break
    if not converged:
        converged = _syndrome_ok(gpost, edge_var, check_ptr, check_edge)
    hard = (gpost < 0.0).astype(np.uint8)
    return hard, converged, used


@njit(cache=True)
def flooding_spa(gamma, edge_var, check_ptr, check_edge, max_iters, early_stop, cap, dc_max):
    n_vars = gamma.shape[0]
    n_edges = edge_var.shape[0]
    n_checks = check_ptr.shape[0] - 1
    gpost = gamma.copy()
    beta = np.zeros(n_edges, dtype=F8)
    beta_new = np.zeros(n_edges, dtype=F8)
    mass = np.zeros(n_vars, dtype=F8)
    t = np.zeros(dc_max, dtype=F8)
    fwd = np.zeros(dc_max + 1, dtype=F8)
    prod_clip = 1.0 - 1e-15
    used = max_iters
    converged = False
    for it in range(1, max_iters + 1):
        for m in range(n_checks):
            lo = check_ptr[m]
            d = check_ptr[m + 1] - lo
            for j in range(d):
                e = check_edge[lo + j]
                x = gpost[edge_var[e]] - beta[e]
                if x > cap:
                    x = cap
                elif x < -cap:
                    x = -cap
                t[j] = np.tanh(0.5 * x)
            fwd[0] = 1.0
            for j in range(d):
                fwd[j + 1] = fwd[j] * t[j]
            back = 1.0
            for j in range(d - 1, -1, -1):
                p = fwd[j] * back
                if p > prod_clip:
                    p = prod_clip
                elif p < -prod_clip:
                    p = -prod_clip
                v = 2.0 * np.arctanh(p)
                if v > cap:
                    v = cap
                elif v < -cap:
                    v = -cap
                beta_new[check_edge[lo + j]] = v
                back *= t[j]
        for e in range(n_edges):
            beta[e] = beta_new[e]
        for n in range(n_vars):
            gpost[n] = 0.0
            mass[n] = 0.0
        for e in range(n_edges):
            gpost[edge_var[e]] += beta[e]
            mass[edge_var[e]] += abs(beta[e])
        for n in range(n_vars):
            gpost[n] = gamma[n] + gpost[n]
            m_n = abs(gamma[n]) + mass[n]
            if gpost[n] <= TIE_SNAP_REL * m_n and -gpost[n] <= TIE_SNAP_REL * m_n:
                gpost[n] = 0.0
        if early_stop and _syndrome_ok(gpost, edge_var, check_ptr, check_edge):
            converged = True
            used = it
            break
    if not converged:
        converged = _syndrome_ok(gpost, edge_var, check_ptr, check_edge)
    hard = (gpost < 0.0).astype(np.uint8)
    return hard, converged, used


@njit(cache=True)
def serial_ms(
    gamma, edge_var, check_ptr, check_edge, var_ptr, var_edge, order, max_iters, early_stop
):
    n_edges = edge_var.shape[0]
    gpost = gamma.copy()
    beta = np.zeros(n_edges, dtype=F8)
    used = max_iters
    converged = False
    for it in range(1, max_iters + 1):
        for oi in range(order.shape[0]):
            m = order[oi]
            lo = check_ptr[m]
            hi = check_ptr[m + 1]
            sign_prod = 1.0
            min1 = np.inf
            min2 = np.inf
            arg1 = -1
            for k in range(lo, hi):
                e = check_edge[k]
                a = gpost[edge_var[e]] - beta[e]
                if a < 0.0:
                    sign_prod = -sign_prod
                    a = -a
                if a < min1:
                    min2 = min1
                    min1 = a
                    arg1 = k
                elif a < min2:
                    min2 = a
            for k in range(lo, hi):
                e = check_edge[k]
                n = edge_var[e]
                a = gpost[n] - beta[e]
                s = -sign_prod if a < 0.0 else sign_prod
                b_new = s * (min2 if k == arg1 else min1)
                gpost[n] += b_new - beta[e]
                beta[e] = b_new
        _resync(gamma, beta, var_ptr, var_edge, gpost)
        if early_stop and _syndrome_ok(gpost, edge_var, check_ptr, check_edge):
            converged = True
            used = it
            break
    if not converged:
        converged = _syndrome_ok(gpost, edge_var, check_ptr, check_edge)
    hard = (gpost < 0.0).astype(np.uint8)
    return hard, converged, used


@njit(cache=True)
def nr_ms_fbar(
    gamma,
    edge_var,
    check_ptr,
    check_edge,
    var_ptr,
    var_edge,
    keys,
    dc_max,
    cutting_back,
    max_iters,
    early_stop,
):
    """Min-Sum with integer neighborhood reliabilities and optional cutting
    back. `keys` is the (max_iters, n_checks) tie-break matrix; the sort by
    fbar + key reproduces the reference scheduler's bucket shuffle."""
    n_vars = gamma.shape[0]
    n_edges = edge_var.shape[0]
    n_checks = check_ptr.shape[0] - 1
    gpost = gamma.copy()
    beta = np.zeros(n_edges, dtype=F8)
    alpha = np.zeros(n_edges, dtype=F8)
    for e in range(n_edges):
        alpha[e] = gamma[edge_var[e]]
    leaf = np.ones(n_vars, dtype=np.uint8)
    s = np.zeros(n_vars, dtype=np.uint8)
    sigma = np.zeros(n_checks, dtype=np.uint8)
    unver = np.zeros(n_vars, dtype=I8)
    score = np.zeros(n_checks, dtype=F8)

    used = max_iters
    converged = False
    for it in range(1, max_iters + 1):
        if it > 1:
            _resync(gamma, beta, var_ptr, var_edge, gpost)
        for n in range(n_vars):
            s[n] = 1 if gpost[n] < 0.0 else 0
        all_ok = True
        for m in range(n_checks):
            acc = 0
            for k in range(check_ptr[m], check_ptr[m + 1]):
                acc ^= s[edge_var[check_edge[k]]]
            sigma[m] = acc
            if acc:
                all_ok = False
        if early_stop and it > 1 and all_ok:
            converged = True
            used = it - 1
            break
        for n in range(n_vars):
            unver[n] = 0
        for m in range(n_checks):
            if sigma[m]:
                for k in range(check_ptr[m], check_ptr[m + 1]):
                    unver[edge_var[check_edge[k]]] += 1
        for m in range(n_checks):
            fb = (dc_max + 1) if sigma[m] else 0
            for k in range(check_ptr[m], check_ptr[m + 1]):
                if unver[edge_var[check_edge[k]]] - sigma[m] > 0:
                    fb += 1
            score[m] = fb + keys[it - 1, m]
        order = np.argsort(score)
        for n in range(n_vars):
            leaf[n] = 1
        for oi in range(n_checks):
            m = order[oi]
            lo = check_ptr[m]
            hi = check_ptr[m + 1]
            for k in range(lo, hi):
                e = check_edge[k]
                n = edge_var[e]
                if cutting_back and leaf[n] == 1:
                    pass
                else:
                    alpha[e] = gpost[n] - beta[e]
            sign_prod = 1.0
            min1 = np.inf
            min2 = np.inf
            arg1 = -1
            for k in range(lo, hi):
                a = alpha[check_edge[k]]
                if a < 0.0:
                    sign_prod = -sign_prod
                    a = -a
                if a < min1:
                    min2 = min1
                    min1 = a
                    arg1 = k
                elif a < min2:
                    min2 = a
            for k in range(lo, hi):
                e = check_edge[k]
                n = edge_var[e]
                sgn = -sign_prod if alpha[e] < 0.0 else sign_prod
                b_new = sgn * (min2 if k == arg1 else min1)
                gpost[n] += b_new - beta[e]
                beta[e] = b_new
            for k in range(lo, hi):
                leaf[edge_var[check_edge[k]]] = 0
    _resync(gamma, beta, var_ptr, var_edge, gpost)
    final_ok = _syndrome_ok(gpost, edge_var, check_ptr, check_edge)
    if not converged:
        converged = final_ok
    hard = (gpost < 0.0).astype(np.uint8)
    return hard, converged, used
