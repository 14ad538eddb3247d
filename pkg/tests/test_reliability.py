import numpy as np
import pytest

from nrldpc import (
    FIXED,
    INTEGER_FBAR,
    REAL_F,
    SERIAL,
    VARIABLE,
    build_reliability_view,
    compute_hard_info,
    f_bar,
    f_prime,
    from_dense,
    order_checks,
    random_graph,
)


def edge_of(g, m, n):
    for e in g.check_edges[m]:
        if g.edge_var[e] == n:
            return e
    raise KeyError((m, n))


class TestHardInfo:
    def test_all_positive_gives_all_zero(self, g23):
        hard = compute_hard_info(g23, [1.0, 2.0, 3.0])
        assert hard.hard_bits == [0, 0, 0]
        assert hard.sigma == [0, 0]
        assert hard.edge_flags == [0] * g23.n_edges
        assert hard.all_verified()

    def test_tie_at_zero_decides_zero(self, g23):
        hard = compute_hard_info(g23, [0.0, -0.0, 1.0])
        assert hard.hard_bits == [0, 0, 0]

    def test_hand_example_s_100(self, g23):
        # s = (1, 0, 0): sigma = (1, 0); the edge (check 1, var 1) is flagged
        # because var 1's other check (check 0) is unverified
        hard = compute_hard_info(g23, [-1.0, 1.0, 1.0])
        assert hard.hard_bits == [1, 0, 0]
        assert hard.sigma == [1, 0]
        e = edge_of(g23, 1, 1)
        assert hard.edge_flags[e] == 1
        # var 2 has no other check: unflagged
        assert hard.edge_flags[edge_of(g23, 1, 2)] == 0

    def test_flipping_two_vars_preserves_parity(self, g23):
        a = compute_hard_info(g23, [1.0, 1.0, 1.0])
        b = compute_hard_info(g23, [-1.0, -1.0, 1.0])
        assert a.sigma[0] == b.sigma[0]


class TestFPrime:
    def test_all_verified_gives_zero(self, g23):
        hard = compute_hard_info(g23, [1.0, 1.0, 1.0])
        assert f_prime(g23, hard, [5.0] * g23.n_edges) == [0.0, 0.0]

    def test_hand_example(self, g23):
        # sigma = (1, 0); beta on check 0's edges: var0 -> -1.5, var1 -> +2.0
        hard = compute_hard_info(g23, [-1.0, 1.0, 1.0])
        beta = [0.0] * g23.n_edges
        beta[edge_of(g23, 0, 0)] = -1.5
        beta[edge_of(g23, 0, 1)] = 2.0
        fp = f_prime(g23, hard, beta)
        # check 1 sees check 0 (unverified) through shared var 1
        assert fp[1] == pytest.approx(2.0)
        # check 0 is itself unverified and sees no other unverified check
        assert fp[0] == pytest.approx(0.0)

    def test_absolute_homogeneity(self):
        g = random_graph(20, 10, 3, seed=4)
        rng = np.random.default_rng(0)
        gpost = rng.normal(size=20)
        beta = rng.normal(size=g.n_edges)
        hard = compute_hard_info(g, gpost)
        base = np.array(f_prime(g, hard, beta))
        scaled = np.array(f_prime(g, hard, 3.5 * beta))
        assert np.allclose(scaled, 3.5 * base)

    def test_matches_direct_double_sum(self):
        g = random_graph(16, 8, 2, seed=9)
        rng = np.random.default_rng(3)
        gpost = rng.normal(size=16)
        beta = rng.normal(size=g.n_edges)
        hard = compute_hard_info(g, gpost)
        fp = f_prime(g, hard, beta)
        for m in range(g.n_checks):
            expect = 0.0
            for n in g.check_vars[m]:
                for e2 in g.var_edges[n]:
                    m2 = g.edge_check[e2]
                    if m2 != m and hard.sigma[m2]:
                        expect += abs(beta[e2])
            assert fp[m] == pytest.approx(expect)


class TestFBar:
    def test_fully_verified_is_zero(self, g23):
        hard = compute_hard_info(g23, [1.0, 1.0, 1.0])
        assert f_bar(g23, hard) == [0, 0]

    def test_max_value_is_2dcmax_plus_1(self):
        # one check of degree 6 plus a ring of unverified partners
        h = np.zeros((7, 12), dtype=int)
        h[0, :6] = 1
        for k in range(6):
            h[k + 1, k] = 1
            h[k + 1, 6 + k] = 1
        g = from_dense(h)
        assert g.dc_max == 6
        # s on check 0's vars: odd weight (1,0,0,0,0,0); each partner check
        # k sees s_k xor s_{6+k} = 1, so every check is unverified
        gpost = np.ones(12)
        gpost[0] = -1.0
        gpost[7:] = -1.0
        hard = compute_hard_info(g, gpost)
        assert all(s == 1 for s in hard.sigma)
        fb = f_bar(g, hard)
        assert fb[0] == 2 * g.dc_max + 1 == 13

    def test_partial_flags(self):
        # dc_max=6, sigma_m=0, exactly 2 of 6 neighbors flagged
        h = np.zeros((3, 8), dtype=int)
        h[0, :6] = 1
        h[1, 0] = 1
        h[1, 6] = 1
        h[2, 1] = 1
        h[2, 7] = 1
        g = from_dense(h)
        gpost = np.ones(8)
        gpost[6] = -1.0
        gpost[7] = -1.0
        hard = compute_hard_info(g, gpost)
        assert hard.sigma == [0, 1, 1]
        assert f_bar(g, hard)[0] == 2

    def test_range_split_randomized(self):
        rng = np.random.default_rng(42)
        for seed in range(4):
            g = random_graph(24, 12, 3, seed=seed)
            for _ in range(50):
                gpost = rng.normal(size=24)
                hard = compute_hard_info(g, gpost)
                for m, f in enumerate(f_bar(g, hard)):
                    if hard.sigma[m] == 0:
                        assert 0 <= f <= g.dc_max
                    else:
                        assert g.dc_max + 1 <= f <= 2 * g.dc_max + 1

    def test_magnitude_blind(self):
        g = random_graph(20, 10, 3, seed=1)
        rng = np.random.default_rng(7)
        gpost = rng.normal(size=20)
        hard = compute_hard_info(g, gpost)
        assert f_bar(g, hard) == f_bar(g, compute_hard_info(g, 100.0 * np.asarray(gpost)))


class TestOrderChecks:
    def setup_view(self, g, gpost, beta=None, kind=INTEGER_FBAR):
        hard = compute_hard_info(g, gpost)
        return build_reliability_view(g, hard, beta=beta, kind=kind)

    def test_single_bucket_serial_is_uniform_shuffle(self):
        g = random_graph(12, 6, 2, seed=0)
        view = self.setup_view(g, np.ones(12))
        seen = set()
        for seed in range(40):
            groups = order_checks(view, SERIAL, np.random.default_rng(seed))
            assert sorted(m for (m,) in [tuple(x) for x in groups]) == list(range(6))
            seen.add(tuple(m for (m,) in [tuple(x) for x in groups]))
        assert len(seen) > 20  # genuinely random order

    def test_variable_mode_groups_by_bucket(self):
        from nrldpc.reliability import ReliabilityView

        fbar = [7, 2, 9, 0, 9, 2]
        view = ReliabilityView(kind=INTEGER_FBAR, sigma=[0] * 6, fbar=fbar)
        groups = order_checks(view, VARIABLE, np.random.default_rng(0))
        assert [sorted(grp) for grp in groups] == [[3], [1, 5], [0], [2, 4]]

    def test_fixed_p_equals_m_single_group(self):
        g = random_graph(12, 6, 2, seed=0)
        view = self.setup_view(g, np.ones(12))
        groups = order_checks(view, FIXED, np.random.default_rng(0), p=6)
        assert len(groups) == 1
        assert sorted(groups[0]) == list(range(6))

    def test_fixed_chunking(self):
        g = random_graph(14, 7, 2, seed=0)
        view = self.setup_view(g, np.ones(14))
        groups = order_checks(view, FIXED, np.random.default_rng(0), p=3)
        assert [len(grp) for grp in groups] == [3, 3, 1]

    def test_invalid_p(self):
        g = random_graph(12, 6, 2, seed=0)
        view = self.setup_view(g, np.ones(12))
        with pytest.raises(ValueError):
            order_checks(view, FIXED, np.random.default_rng(0), p=0)

    def test_verified_precede_unverified_both_kinds(self):
        rng = np.random.default_rng(11)
        for seed in range(5):
            g = random_graph(20, 10, 3, seed=seed)
            gpost = rng.normal(size=20)
            beta = rng.normal(size=g.n_edges)
            hard = compute_hard_info(g, gpost)
            for kind in (INTEGER_FBAR, REAL_F):
                view = build_reliability_view(g, hard, beta=beta, kind=kind)
                for mode, p in ((SERIAL, None), (FIXED, 3), (VARIABLE, None)):
                    groups = order_checks(view, mode, np.random.default_rng(seed), p=p)
                    flat = [m for grp in groups for m in grp]
                    states = [hard.sigma[m] for m in flat]
                    assert states == sorted(states)

    def test_real_order_invariant_under_scaling(self):
        g = random_graph(20, 10, 3, seed=2)
        rng = np.random.default_rng(5)
        gpost = rng.normal(size=20)
        beta = rng.normal(size=g.n_edges)
        hard = compute_hard_info(g, gpost)
        va = build_reliability_view(g, hard, beta=beta, kind=REAL_F)
        vb = build_reliability_view(g, hard, beta=[2.5 * b for b in beta], kind=REAL_F)
        assert va.order == vb.order
        ga = order_checks(va, SERIAL, np.random.default_rng(3))
        gb = order_checks(vb, SERIAL, np.random.default_rng(3))
        assert ga == gb

    def test_view_order_most_reliable_first(self):
        g = random_graph(20, 10, 3, seed=2)
        rng = np.random.default_rng(5)
        gpost = rng.normal(size=20)
        beta = rng.normal(size=g.n_edges)
        hard = compute_hard_info(g, gpost)
        view = build_reliability_view(g, hard, beta=beta, kind=REAL_F)
        pairs = view.f_pairs()
        ordered = [pairs[m] for m in view.order]
        assert ordered == sorted(ordered)
