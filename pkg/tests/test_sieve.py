import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digitprimes.digits import make_constraint
from digitprimes.errors import CacheError, ParameterError, RangeError
from digitprimes.sieve import (
    MangoldtTable,
    build_mangoldt_table,
    build_prime_table,
    chebyshev_psi,
    count_exact,
)


def trial_division_bits(n: int) -> np.ndarray:
    """Independent primality oracle: plain trial division for every k < 2^n."""
    N = 1 << n
    flags = np.zeros(N, dtype=bool)
    for k in range(2, N):
        for d in range(2, math.isqrt(k) + 1):
            if k % d == 0:
                break
        else:
            flags[k] = True
    return np.packbits(flags, bitorder="little")


def mangoldt_oracle(limit: int) -> np.ndarray:
    """Lambda(k) for k < limit by direct prime-power enumeration."""
    values = np.zeros(limit)
    bits = np.unpackbits(trial_division_bits(max(4, limit.bit_length())), bitorder="little")
    for p in range(2, limit):
        if p < bits.size and bits[p]:
            pk = p
            while pk < limit:
                values[pk] = math.log(p)
                pk *= p
    return values


@pytest.fixture(scope="module")
def table10():
    return build_prime_table(10)


class TestPrimeTable:
    def test_small_pattern_matches_definition(self):
        table = build_prime_table(4)
        want = np.packbits(
            np.array([k in (2, 3, 5, 7, 11, 13) for k in range(16)]), bitorder="little"
        )
        assert np.array_equal(table.bits, want)

    def test_pi_128_against_trial_division(self):
        table = build_prime_table(7)
        assert table.popcount() == 31
        assert np.array_equal(table.bits, trial_division_bits(7))

    @pytest.mark.parametrize("n", range(4, 15))
    def test_bit_exact_vs_trial_division(self, n):
        assert np.array_equal(build_prime_table(n).bits, trial_division_bits(n))

    def test_pi_1024(self, table10):
        oracle = trial_division_bits(10)
        assert table10.popcount() == int(np.unpackbits(oracle, bitorder="little").sum())

    def test_structural_invariants(self, table10):
        assert not table10.is_prime(0) and not table10.is_prime(1)
        assert table10.is_prime(2) and table10.is_prime(3)
        evens = np.arange(4, 1 << 10, 2)
        assert not table10.is_prime(evens).any()

    def test_exponent_range(self):
        with pytest.raises(ParameterError):
            build_prime_table(3)
        with pytest.raises(ParameterError):
            build_prime_table(35)

    def test_threads_do_not_change_bits(self):
        a = build_prime_table(18, threads=1)
        b = build_prime_table(18, threads=4)
        assert np.array_equal(a.bits, b.bits)


class TestMangoldt:
    def test_prime_power_values(self):
        table = build_mangoldt_table(4)
        assert table.values[8] == pytest.approx(math.log(2), abs=0)
        assert table.values[6] == 0.0
        assert table.values[1] == 0.0
        assert table.values[9] == pytest.approx(math.log(3), abs=0)

    def test_against_enumeration_oracle(self):
        table = build_mangoldt_table(12)
        assert np.array_equal(table.values, mangoldt_oracle(1 << 12))

    def test_psi_10(self):
        # direct enumeration: Lambda over {2,3,4,5,7,8,9} summed
        expected = 3 * math.log(2) + 2 * math.log(3) + math.log(5) + math.log(7)
        table = build_mangoldt_table(4)
        assert chebyshev_psi(10, table) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(7.832, abs=1e-3)

    def test_psi_monotone_and_empty(self):
        table = build_mangoldt_table(8)
        values = [chebyshev_psi(x, table) for x in range(0, 256, 17)]
        assert values == sorted(values)
        assert chebyshev_psi(1, table) == 0.0

    def test_psi_near_x_at_2_20(self):
        table = build_mangoldt_table(20)
        x = 1 << 20
        assert abs(chebyshev_psi(x, table) - x) <= 0.005 * x

    @pytest.mark.parametrize("n", [10, 14, 18])
    def test_psi_envelope(self, n):
        table = build_mangoldt_table(n)
        N = 1 << n
        assert abs(chebyshev_psi(N, table) - N) <= 0.03 * N

    def test_range_errors(self):
        table = build_mangoldt_table(8)
        with pytest.raises(RangeError):
            chebyshev_psi(257, table)
        with pytest.raises(ParameterError):
            build_mangoldt_table(31)


class TestCountExact:
    def test_empty_constraint_counts_all_primes(self, table10):
        assert count_exact(make_constraint(10, []), table10) == table10.popcount()

    def test_single_bit_against_filtered_enumeration(self, table10):
        # digit 1 set: all odd primes = 3 mod 4, plus p = 2 whose bit 1 is set
        c = make_constraint(10, [(1, 1)])
        primes = np.flatnonzero(np.unpackbits(trial_division_bits(10), bitorder="little"))
        oracle = int(np.sum((primes >> 1) & 1 == 1))
        assert count_exact(c, table10) == oracle
        assert oracle == int(np.sum(primes % 4 == 3)) + 1  # the +1 is p=2

    def test_two_bits_mod8(self):
        table = build_prime_table(12)
        c = make_constraint(12, [(1, 1), (2, 1)])
        primes = np.flatnonzero(np.unpackbits(trial_division_bits(12), bitorder="little"))
        assert count_exact(c, table) == int(np.sum(primes % 8 == 7))

    @given(st.data())
    @settings(max_examples=25, deadline=None)
    def test_matches_filtered_enumeration(self, table10, data):
        positions = data.draw(
            st.lists(st.integers(1, 9), min_size=0, max_size=4, unique=True))
        pairs = [(j, data.draw(st.integers(0, 1))) for j in positions]
        c = make_constraint(10, pairs)
        primes = np.flatnonzero(np.unpackbits(trial_division_bits(10), bitorder="little"))
        keep = np.ones(primes.size, dtype=bool)
        for j, bit in pairs:
            keep &= ((primes >> j) & 1) == bit
        assert count_exact(c, table10) == int(keep.sum())

    @pytest.mark.parametrize("positions", [(1,), (3, 7), (2, 5, 9)])
    def test_partition_over_assignments(self, table10, positions):
        total = 0
        for mask in range(1 << len(positions)):
            pairs = [(j, (mask >> i) & 1) for i, j in enumerate(positions)]
            total += count_exact(make_constraint(10, pairs), table10)
        assert total == table10.popcount()

    def test_parity_position_rejected(self):
        with pytest.raises(ParameterError):
            make_constraint(10, [(0, 1)])

    def test_mismatched_n(self, table10):
        with pytest.raises(ParameterError):
            count_exact(make_constraint(12, []), table10)


class TestCache:
    def test_roundtrip(self, tmp_path):
        a = build_prime_table(12, cache_dir=tmp_path)
        assert (tmp_path / "prime_12.dpsv").exists()
        b = build_prime_table(12, cache_dir=tmp_path)
        assert np.array_equal(a.bits, b.bits)
        m1 = build_mangoldt_table(10, cache_dir=tmp_path)
        m2 = build_mangoldt_table(10, cache_dir=tmp_path)
        assert np.array_equal(m1.values, m2.values)

    def test_corruption_triggers_rebuild(self, tmp_path):
        a = build_prime_table(10, cache_dir=tmp_path)
        path = tmp_path / "prime_10.dpsv"
        raw = bytearray(path.read_bytes())
        raw[40] ^= 0xFF
        path.write_bytes(bytes(raw))
        b = build_prime_table(10, cache_dir=tmp_path)  # rebuilds silently
        assert np.array_equal(a.bits, b.bits)
        # and the rewritten file is valid again
        c = build_prime_table(10, cache_dir=tmp_path)
        assert np.array_equal(a.bits, c.bits)

    def test_env_var_selects_directory(self, tmp_path, monkeypatch):
        monkeypatch.setenv("DIGITPRIMES_CACHE_DIR", str(tmp_path))
        build_prime_table(8)
        assert (tmp_path / "prime_08.dpsv").exists()


@pytest.mark.slow
def test_pi_2_24_against_sympy():
    import sympy

    table = build_prime_table(24)
    assert table.popcount() == sympy.primepi((1 << 24) - 1)
