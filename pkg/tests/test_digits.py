import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digitprimes.digits import (
    build_window,
    build_windows,
    eval_f,
    exact_indicator,
    f_values,
    fourier_rep,
    in_transition_band,
    make_constraint,
    mean_f,
    period_exponent,
    write_fourier_csv,
)
from digitprimes.errors import ParameterError, RangeError, TermOverflowError


@pytest.fixture(scope="module")
def wins16():
    return build_windows(16)


@pytest.fixture(scope="module")
def wins12():
    return build_windows(12)


class TestConstraint:
    def test_empty(self):
        c = make_constraint(10, [])
        assert c.r == 0 and c.pairs == ()

    def test_sorted_normalisation(self):
        c = make_constraint(10, [(7, 0), (3, 1)])
        assert c.pairs == ((3, 1), (7, 0)) and c.r == 2

    @pytest.mark.parametrize("pairs", [[(0, 1)], [(10, 1)], [(3, 1), (3, 0)], [(4, 2)]])
    def test_rejects_bad_pairs(self, pairs):
        with pytest.raises(ParameterError):
            make_constraint(10, pairs)


class TestWindow:
    @pytest.mark.parametrize("n", [8, 12, 16, 20])
    @pytest.mark.parametrize("bit", [0, 1])
    def test_grid_invariants(self, n, bit):
        win = build_window(n, bit)
        grid = win.on_grid(16)
        t = np.arange(1 << 16) / float(1 << 16)
        eps = 2.0 ** -40
        assert np.all(grid >= -eps) and np.all(grid <= 1 + eps)
        if bit == 0:
            plateau = (t >= 1.0 / n) & (t <= 0.5 - 1.0 / n)
            zero = t >= 0.5
        else:
            plateau = (t >= 0.5 + 1.0 / n) & (t <= 1.0 - 1.0 / n)
            zero = t <= 0.5
        assert np.all(grid[plateau] >= 1 - eps)
        assert np.max(np.abs(grid[zero])) <= eps

    def test_point_reconstruction_at_075(self):
        win = build_window(16, 0)
        assert abs(win.eval(0.75)) <= 2.0 ** -40

    def test_mean_coefficient_range(self):
        for n in (8, 16, 32):
            h0 = build_window(n, 0).coefficient(0)
            assert 0.5 - 2.0 / n <= h0.real <= 0.5 and abs(h0.imag) == 0.0

    def test_conjugate_symmetry(self):
        win = build_window(12, 1)
        for b in (1, 5, 100, win.bmax):
            assert win.coefficient(-b) == pytest.approx(np.conj(win.coefficient(b)), abs=0)

    def test_support_within_cube(self):
        for n in (8, 16, 20):
            win = build_window(n, 0)
            assert win.bmax <= n ** 3

    @pytest.mark.parametrize("n", [8, 16, 64, 1024])
    def test_l1_bound(self, n):
        assert build_window(n, 0).l1() <= 8 * math.log(n)

    def test_translate_relation(self):
        # digit-1 window is the half-period translate of the digit-0 window
        wins = build_windows(16)
        grid0 = wins.h0.on_grid(12)
        grid1 = wins.h1.on_grid(12)
        assert np.allclose(np.roll(grid1, 1 << 11), grid0, atol=1e-12)

    def test_rejects_small_n(self):
        with pytest.raises(ParameterError):
            build_window(6, 0)


class TestEvalF:
    def test_even_is_zero(self, wins16):
        c = make_constraint(16, [(5, 1)])
        x = np.arange(0, 1 << 16, 2)
        assert not eval_f(x, c, wins16).any()

    def test_empty_constraint_odd_is_one(self, wins16):
        c = make_constraint(16, [])
        assert eval_f(12345, c, wins16) == 1.0

    def test_plateau_agreement(self):
        wins = build_windows(12)
        c = make_constraint(12, [(3, 1), (7, 0)])
        x = np.arange(1 << 12)
        band = in_transition_band(x, c)
        dev = np.abs(eval_f(x, c, wins) - exact_indicator(x, c))
        assert np.max(dev[~band]) <= 2.0 ** -39

    def test_range_error(self, wins16):
        with pytest.raises(RangeError):
            eval_f(1 << 16, make_constraint(16, []), wins16)

    def test_mismatched_windows(self, wins16):
        with pytest.raises(ParameterError):
            eval_f(1, make_constraint(12, []), wins16)


class TestExactIndicator:
    def test_examples(self):
        c1 = make_constraint(10, [(1, 1)])
        assert exact_indicator(11, c1) == 1  # 11 = 0b1011
        c2 = make_constraint(10, [(2, 1)])
        assert exact_indicator(11, c2) == 0
        assert exact_indicator(4, c1) == 0  # even

    @given(st.integers(0, (1 << 14) - 1), st.data())
    @settings(max_examples=60, deadline=None)
    def test_matches_bit_arithmetic(self, x, data):
        positions = data.draw(st.lists(st.integers(1, 13), max_size=3, unique=True))
        pairs = [(j, data.draw(st.integers(0, 1))) for j in positions]
        c = make_constraint(14, pairs)
        want = int(x % 2 == 1 and all((x >> j) & 1 == b for j, b in pairs))
        assert exact_indicator(x, c) == want


class TestBands:
    @pytest.mark.parametrize("n,pairs", [
        (12, [(3, 1)]),
        (16, [(1, 0), (7, 1)]),
        (20, [(2, 1), (5, 0), (11, 1)]),
        (20, [(9, 1), (13, 0), (17, 1), (19, 1)]),
    ])
    def test_band_fraction(self, n, pairs):
        c = make_constraint(n, pairs)
        x = np.arange(1 << n)
        frac = in_transition_band(x, c).mean()
        assert frac <= 4 * c.r / n


class TestMean:
    def test_parity_only(self, wins16):
        assert mean_f(make_constraint(16, []), wins16) == 0.5

    def test_single_constraint_range(self, wins16):
        m = mean_f(make_constraint(16, [(9, 1)]), wins16)
        assert 0.25 - 1.0 / 16 <= m <= 0.25

    def test_matches_direct_summation(self, wins16):
        c = make_constraint(16, [(5, 1), (9, 1)])
        direct = float(np.mean(eval_f(np.arange(1 << 16), c, wins16)))
        assert mean_f(c, wins16) == pytest.approx(direct, rel=1e-10)

    @pytest.mark.parametrize("pairs", [[(5, 0)], [(3, 1), (9, 0)], [(2, 1), (7, 1), (11, 0)]])
    def test_normalised_mean_near_one(self, pairs, wins16):
        c = make_constraint(16, pairs)
        m = mean_f(c, wins16)
        assert abs(m * 2 ** (c.r + 1) - 1) <= 8 * c.r / 16


class TestFourierRep:
    def test_parity_terms(self, wins16):
        rep = fourier_rep(make_constraint(16, []), wins16)
        assert rep.term_count == 2
        assert rep.theta_num.tolist() == [0, 1] and rep.s == 1
        assert rep.coeff.tolist() == [0.5 + 0j, -0.5 + 0j]

    def test_term_count_bound_r1(self, wins12):
        c = make_constraint(12, [(3, 1)])
        rep = fourier_rep(c, wins12, prune_tol=0.0)
        assert rep.term_count <= 2 * (2 * 12 ** 3 + 1)

    def test_reconstruction(self, wins12):
        c = make_constraint(12, [(3, 1)])
        rep = fourier_rep(c, wins12, prune_tol=1e-12)
        k = np.arange(1 << 12)
        err = np.max(np.abs(eval_f(k, c, wins12) - rep.evaluate(k)))
        assert err <= 1e-9

    def test_l1_bound(self, wins16):
        c = make_constraint(16, [(5, 1), (11, 0)])
        rep = fourier_rep(c, wins16, prune_tol=1e-10)
        assert rep.l1() <= (8 * math.log(16)) ** (c.r + 1)

    def test_term_cap_overflow(self, wins16):
        c = make_constraint(16, [(5, 1), (11, 0)])
        with pytest.raises(TermOverflowError):
            fourier_rep(c, wins16, prune_tol=1e-14, term_cap=1000)

    def test_negative_tolerance_rejected(self, wins16):
        with pytest.raises(ParameterError):
            fourier_rep(make_constraint(16, []), wins16, prune_tol=-1.0)

    def test_csv_export(self, wins12, tmp_path):
        c = make_constraint(12, [(3, 1)])
        rep = fourier_rep(c, wins12, prune_tol=1e-6)
        out = tmp_path / "rep.csv"
        write_fourier_csv(rep, out)
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == rep.term_count
        # exact dyadic round trip
        for row, num, coeff in zip(rows, rep.theta_num.tolist(), rep.coeff.tolist()):
            assert int(row["theta_num"]) / 2 ** int(row["theta_den_pow2"]) == num / 2 ** rep.s
            assert float(row["coeff_re"]) == coeff.real


class TestPeriodHelpers:
    def test_period_exponent(self):
        assert period_exponent(make_constraint(16, [])) == 1
        assert period_exponent(make_constraint(16, [(3, 1), (9, 0)])) == 10

    def test_f_values_tiles(self, wins16):
        c = make_constraint(16, [(5, 1)])
        vals = f_values(c, wins16)
        assert vals.size == 1 << 16
        spot = np.array([3, 77, 1000, 65535])
        assert np.allclose(vals[spot], eval_f(spot, c, wins16), atol=0)
