import math

import numpy as np
import pytest

from digitprimes.digits import build_windows, eval_f, f_values, make_constraint, mean_f
from digitprimes.empirics import (
    DiophantineInstance,
    choose_window,
    diophantine_count,
    is_odd_squarefree,
    kappa_formula,
    kappa_weighted_sum,
    measure_alpha,
    measure_kappa,
    measure_kappa_refined,
    sample_instance,
)
from digitprimes.errors import ParameterError, ResourceError


@pytest.fixture(scope="module")
def wins16():
    return build_windows(16)


@pytest.fixture(scope="module")
def c16(wins16):
    return make_constraint(16, [(9, 1)])


@pytest.fixture(scope="module")
def fv16(c16, wins16):
    return f_values(c16, wins16)


class TestKappa:
    def test_q0_one_vanishes(self, c16, wins16, fv16):
        rep = measure_kappa(1, c16, wins16, fv16)
        assert rep.measured <= 1e-9

    def test_even_q0_rejected(self, c16, wins16):
        with pytest.raises(ParameterError):
            measure_kappa(6, c16, wins16)

    def test_parity_only_small(self, wins16):
        c = make_constraint(16, [])
        rep = measure_kappa(3, c, wins16)
        assert rep.measured <= 2.0 ** -8

    def test_large_modulus_sanity_envelope(self, wins16):
        c = make_constraint(16, [(5, 1), (9, 1)])
        rep = measure_kappa(105, c, wins16)
        assert rep.measured <= 1.0
        assert rep.squarefree

    def test_non_squarefree_flagged_not_rejected(self, c16, wins16, fv16):
        rep = measure_kappa(9, c16, wins16, fv16)
        assert not rep.squarefree and rep.measured >= 0

    def test_matches_definition(self, c16, wins16, fv16):
        q0 = 5
        N = 1 << 16
        direct = float(np.sum(fv16[::q0]))
        expected = abs(direct - mean_f(c16, wins16) * N / q0) * q0 * 2 / N
        assert measure_kappa(q0, c16, wins16, fv16).measured == pytest.approx(expected, rel=1e-12)

    def test_determinism(self, c16, wins16):
        a = measure_kappa(15, c16, wins16).measured
        b = measure_kappa(15, c16, wins16).measured
        assert a == b


class TestKappaRefined:
    def test_q0_one(self, c16, wins16, fv16):
        assert measure_kappa_refined(1, 0, 2, 1, c16, wins16, fv16) == 0.0

    def test_small_at_n16(self, wins16):
        c = make_constraint(16, [])
        dev = measure_kappa_refined(3, 1, 2, 1, c, wins16)
        assert dev <= 2.0 ** -6

    def test_mean_over_residues_bounded_by_max(self, c16, wins16, fv16):
        devs = [measure_kappa_refined(5, a0, 3, 1, c16, wins16, fv16) for a0 in range(5)]
        assert np.mean(devs) <= max(devs) + 1e-15

    def test_m_cap(self, c16, wins16):
        with pytest.raises(ParameterError):
            measure_kappa_refined(3, 1, 8, 1, c16, wins16)

    def test_matches_direct_slices(self, c16, wins16, fv16):
        q0, a0, m, ap = 5, 2, 3, 3
        N = 1 << 16
        k = np.arange(N)
        base = fv16[(k % (1 << m)) == ap].sum()
        joint = fv16[((k % (1 << m)) == ap) & (k % q0 == a0)].sum()
        expected = abs(joint * q0 / base - 1)
        got = measure_kappa_refined(q0, a0, m, ap, c16, wins16, fv16)
        assert got == pytest.approx(expected, rel=1e-12)


class TestWeightedSum:
    def test_b2_only_trivial_modulus(self, c16, wins16):
        summ = kappa_weighted_sum(2, c16, wins16)
        assert summ.weighted_sum <= 1e-9
        assert [r.q0 for r in summ.reports] == [1]

    def test_decreasing_in_n(self):
        values = []
        for n in (14, 16, 18):
            wins = build_windows(n)
            c = make_constraint(n, [(9, 1)])
            values.append(kappa_weighted_sum(1 << 6, c, wins).weighted_sum)
        assert values[2] < values[0]

    def test_r0_and_r2_small(self, wins16):
        for pairs in ([], [(3, 1), (13, 0)]):
            c = make_constraint(16, pairs)
            summ = kappa_weighted_sum(1 << 6, c, wins16)
            assert summ.weighted_sum <= 0.1

    def test_cap(self, c16, wins16):
        with pytest.raises(ResourceError):
            kappa_weighted_sum(1 << 13, c16, wins16)

    def test_only_odd_squarefree_moduli(self, c16, wins16):
        summ = kappa_weighted_sum(50, c16, wins16)
        assert all(r.q0 % 2 == 1 and is_odd_squarefree(r.q0) for r in summ.reports)


class TestAlpha:
    def test_degenerate_trivial_character(self, c16, wins16, fv16):
        rep = measure_alpha(1, 0, 1, (1, 1 << 8), c16, wins16, fv16)
        k = np.arange(1, 1 + (1 << 8))
        expected = abs(np.sum(fv16[k])) * 2 / (1 << 8)
        assert rep.measured == pytest.approx(expected, rel=1e-12)

    def test_trivial_bound(self, c16, wins16, fv16):
        q0, length = 5, 1 << 8
        rep = measure_alpha(3, 1, q0, (1, length), c16, wins16, fv16)
        assert rep.measured <= 2 ** c16.r * (1 + q0 / length)

    def test_rejects_non_primitive(self, c16, wins16):
        # index 0 is principal mod 3, conductor 1
        with pytest.raises(ParameterError):
            measure_alpha(3, 0, 5, (1, 256), c16, wins16)

    def test_rejects_common_factor(self, c16, wins16):
        with pytest.raises(ParameterError):
            measure_alpha(3, 1, 9, (1, 256), c16, wins16)

    def test_rejects_even_q0(self, c16, wins16):
        with pytest.raises(ParameterError):
            measure_alpha(3, 1, 4, (1, 256), c16, wins16)

    def test_interval_inside_range(self, c16, wins16):
        with pytest.raises(ParameterError):
            measure_alpha(3, 1, 5, (1 << 16, 16), c16, wins16)


class TestWindowPlacement:
    def test_flags_and_span(self):
        c = make_constraint(20, [(9, 1)])
        place = choose_window(c, 1 << 4)
        assert 1 <= place.j1 < place.j2 <= 19
        assert place.j2 - place.j1 == min(40, 18)
        assert set(place.flags) == {"distance_ok", "density_ok", "formula_applicable"}

    def test_r0_window(self):
        c = make_constraint(20, [])
        place = choose_window(c, 1 << 8)
        assert place.inside == () and all(place.flags.values())

    def test_leftmost_optimum_is_deterministic(self):
        c = make_constraint(24, [(11, 1)])
        a = choose_window(c, 1 << 4)
        b = choose_window(c, 1 << 4)
        assert (a.j1, a.j2) == (b.j1, b.j2)


class TestKappaFormula:
    @pytest.fixture(scope="class")
    def c7(self):
        return make_constraint(16, [(7, 1)])

    def test_empty_window_is_zero(self, wins16):
        c = make_constraint(16, [(15, 1)])
        assert kappa_formula(3, 1, 8, c, wins16) == 0.0

    def test_dominates_direct_deviation(self, c7, wins16):
        j1, j2 = 1, 15
        dj = j2 - j1
        v = np.arange(1 << dj, dtype=np.int64)
        sh = 7 + 1 - j1
        g = wins16.h1.on_grid(sh)[v & ((1 << sh) - 1)]
        for q0 in (3, 5, 9):
            worst = max(
                abs(float(np.sum(g[a::q0])) - g.mean() * v.size / q0) for a in range(q0)
            ) * q0 * 2 / v.size
            formula = kappa_formula(q0, j1, j2, c7, wins16, prune_tol=1e-10)
            assert formula >= worst - 1e-9

    def test_widening_never_increases(self, c7, wins16):
        narrow = kappa_formula(3, 1, 7, c7, wins16, prune_tol=1e-10)
        wide = kappa_formula(3, 1, 13, c7, wins16, prune_tol=1e-10)
        assert wide <= narrow + 1e-12

    def test_too_many_positions_rejected(self, wins16):
        c = make_constraint(16, [(3, 1), (5, 1), (7, 1), (9, 1)])
        with pytest.raises(ParameterError):
            kappa_formula(3, 1, 12, c, wins16)


class TestDiophantine:
    def test_tight_threshold_counts_zero(self):
        inst = DiophantineInstance(n=12, Q=256, delta_j=200, D=15,
                                   exponents=(20,), numerators=(1,))
        rep = diophantine_count(inst)
        assert rep.count == 0 and rep.within_bound and not rep.degenerate

    def test_loose_threshold_counts_all_odd(self):
        inst = DiophantineInstance(n=64, Q=256, delta_j=21, D=2,
                                   exponents=(2,), numerators=(1,))
        rep = diophantine_count(inst)
        assert rep.count == 256 // 2 and rep.degenerate

    def test_vanishing_frequency_rejected(self):
        inst = DiophantineInstance(n=12, Q=256, delta_j=300, D=10,
                                   exponents=(1, 3), numerators=(4, -16))
        with pytest.raises(ParameterError):
            inst.validate()

    def test_separation_precondition(self):
        with pytest.raises(ParameterError):
            DiophantineInstance(n=12, Q=256, delta_j=100, D=15,
                                exponents=(20,), numerators=(1,)).validate()

    def test_range_cap(self):
        inst = DiophantineInstance(n=12, Q=1 << 25, delta_j=200, D=15,
                                   exponents=(20,), numerators=(1,))
        with pytest.raises(ResourceError):
            diophantine_count(inst)

    def test_sampler_deterministic_and_admissible(self):
        a = sample_instance(np.random.default_rng(5), 20, 2, 12, 300, 1 << 10)
        b = sample_instance(np.random.default_rng(5), 20, 2, 12, 300, 1 << 10)
        assert a == b
        a.validate()
        gaps = np.diff(a.exponents)
        assert (gaps > a.D).all()

    def test_seeded_ensemble_within_bound(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            inst = sample_instance(rng, 20, int(rng.integers(1, 4)), 14,
                                   500, 1 << 10)
            assert diophantine_count(inst).within_bound
