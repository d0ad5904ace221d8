"""Empirical measurement of the two equidistribution inputs of the argument,
plus the brute-force dyadic Diophantine counting experiment.

* ``measure_kappa``: how far the smoothed indicator f deviates from perfect
  equidistribution over the multiples of an odd squarefree modulus, in the
  normalisation  |sum_{q0|k} f(k) - E[f] N/q0| * q0 2^r / N.
* ``measure_alpha``: cancellation of f twisted by a primitive character on a
  short interval along multiples of q0, normalised by 2^-r |J|/q0.
* ``kappa_formula``: the explicit spectral upper bound for the windowed
  deviation, a starred sum over window frequency tuples whose combined
  dyadic frequency nearly annihilates q0.
* ``diophantine_count``: exact count of odd q ~ Q with ||q xi|| below the
  window threshold, against the 2^(-D/2) Q budget.

Every measurement is a pure function of its inputs; ensemble drivers take an
explicit seed and echo it in their reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from digitprimes.digits import (
    DigitConstraint,
    SmoothWindow,
    Windows,
    f_values,
    mean_f,
)
from digitprimes.charsums import DirichletCharacter, characters_mod, is_primitive
from digitprimes.errors import ParameterError, ResourceError, TermOverflowError

KAPPA_ENUMERATION_CAP = 1 << 12
DIOPHANTINE_RANGE_CAP = 1 << 24
_FORMULA_TERM_CAP = 5_000_000


def is_odd_squarefree(q: int) -> bool:
    if q % 2 == 0:
        return False
    d = 3
    while d * d <= q:
        if q % (d * d) == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class KappaReport:
    q0: int
    measured: float
    squarefree: bool


def _kappa_from_values(q0: int, fvals: np.ndarray, mean: float, r: int) -> float:
    N = fvals.size
    total = float(np.sum(fvals[::q0]))
    return abs(total - mean * N / q0) * q0 * (1 << r) / N


def measure_kappa(q0: int, constraint: DigitConstraint, windows: Windows,
                  fvals: np.ndarray | None = None) -> KappaReport:
    """Normalised deviation of sum of f over multiples of q0.

    q0 must be odd; a non-squarefree q0 is measured anyway and flagged.
    """
    if q0 < 1 or q0 % 2 == 0:
        raise ParameterError("q0 must be odd and positive")
    if fvals is None:
        fvals = f_values(constraint, windows)
    measured = _kappa_from_values(q0, fvals, mean_f(constraint, windows), constraint.r)
    return KappaReport(q0=q0, measured=measured, squarefree=is_odd_squarefree(q0))


def measure_kappa_refined(q0: int, a0: int, m: int, a_prime: int,
                          constraint: DigitConstraint, windows: Windows,
                          fvals: np.ndarray | None = None) -> float:
    """Relative deviation of the doubly-constrained sum
    sum_{x = a0 (q0), x = a' (2^m)} f(x) from 1/q0 of its 2^m-only version."""
    n = constraint.n
    if m < 0 or m >= n / 2:
        raise ParameterError("need 0 <= m < n/2")
    if q0 < 1 or q0 % 2 == 0:
        raise ParameterError("q0 must be odd and positive")
    if fvals is None:
        fvals = f_values(constraint, windows)
    N = fvals.size
    step = 1 << m
    base = float(np.sum(fvals[a_prime % step :: step]))
    if q0 == 1:
        return 0.0
    t = (a0 - a_prime) * pow(step, -1, q0) % q0
    start = (a_prime % step) + step * t
    joint = float(np.sum(fvals[start :: step * q0])) if start < N else 0.0
    if base == 0.0:
        return 0.0 if joint == 0.0 else math.inf
    return abs(joint * q0 / base - 1.0)


@dataclass(frozen=True)
class KappaSummary:
    B: int
    reports: list[KappaReport]
    weighted_sum: float


def kappa_weighted_sum(B: int, constraint: DigitConstraint, windows: Windows) -> KappaSummary:
    """sum over odd squarefree q0 < B of measure_kappa(q0)/q0."""
    if B > KAPPA_ENUMERATION_CAP:
        raise ResourceError(f"B above enumeration cap {KAPPA_ENUMERATION_CAP}")
    fvals = f_values(constraint, windows)
    mean = mean_f(constraint, windows)
    reports = []
    total = 0.0
    for q0 in range(1, B, 2):
        if not is_odd_squarefree(q0):
            continue
        measured = _kappa_from_values(q0, fvals, mean, constraint.r)
        reports.append(KappaReport(q0=q0, measured=measured, squarefree=True))
        total += measured / q0
    return KappaSummary(B=B, reports=reports, weighted_sum=total)


@dataclass(frozen=True)
class AlphaReport:
    q1: int
    chi_index: int
    q0: int
    start: int
    length: int
    measured: float


def measure_alpha(q1: int, chi_index: int, q0: int, interval: tuple[int, int],
                  constraint: DigitConstraint, windows: Windows,
                  fvals: np.ndarray | None = None) -> AlphaReport:
    """|sum_{k in J, q0|k} f(k) chi1(k)| * q0 2^r / |J| for primitive chi1."""
    if q0 < 1 or q0 % 2 == 0 or not is_odd_squarefree(q0):
        raise ParameterError("q0 must be odd and squarefree")
    if math.gcd(q0, q1) != 1:
        raise ParameterError("q0 and q1 must be coprime")
    chi = characters_mod(q1)[chi_index]
    if not is_primitive(chi):
        raise ParameterError("character must be primitive")
    start, length = interval
    N = 1 << constraint.n
    if length <= 0 or start < 1 or start + length > N + 1:
        raise ParameterError("interval must sit inside [1, N]")
    if fvals is None:
        fvals = f_values(constraint, windows)
    k0 = -(-start // q0) * q0  # first multiple of q0 in J
    k = np.arange(k0, min(start + length, N), q0, dtype=np.int64)
    if k.size:
        values = chi.values()
        total = complex(np.dot(fvals[k], values[k % q1]))
    else:
        total = 0.0
    measured = abs(total) * q0 * (1 << constraint.r) / length
    return AlphaReport(q1=q1, chi_index=chi_index, q0=q0, start=start,
                       length=length, measured=measured)


def alpha_interval_starts(n: int, length: int, intervals: int) -> list[int]:
    """Interval origins spread across [1, N] with a non-dyadic stride, so
    short intervals sample different phases of every window period."""
    N = 1 << n
    if intervals == 1:
        return [1]
    stride = (N - length) // (intervals - 1)
    return [1 + i * stride for i in range(intervals)]


@dataclass(frozen=True)
class AlphaEnsemble:
    reports: list[AlphaReport]
    medians: dict[int, float]
    max_measured: float


def alpha_ensemble(constraint: DigitConstraint, windows: Windows,
                   moduli: tuple[int, ...] = (3, 5, 7, 9, 27, 25),
                   q0_max: int = 30, intervals: int = 8,
                   fvals: np.ndarray | None = None) -> AlphaEnsemble:
    """Short-interval twisted-sum measurements over every primitive
    character of each modulus, every admissible q0, and spread intervals of
    length N / 2^8."""
    if fvals is None:
        fvals = f_values(constraint, windows)
    N = 1 << constraint.n
    length = max(1, N >> 8)
    starts = alpha_interval_starts(constraint.n, length, intervals)
    reports = []
    medians = {}
    max_measured = 0.0
    for q1 in moduli:
        values = []
        primitive = [i for i, chi in enumerate(characters_mod(q1)) if is_primitive(chi)]
        q0s = [q for q in range(1, q0_max + 1, 2)
               if is_odd_squarefree(q) and math.gcd(q, q1) == 1]
        for idx in primitive:
            for q0 in q0s:
                for start in starts:
                    rep = measure_alpha(q1, idx, q0, (start, length), constraint,
                                        windows, fvals)
                    reports.append(rep)
                    values.append(rep.measured)
        medians[q1] = float(np.median(values))
        max_measured = max(max_measured, max(values))
    return AlphaEnsemble(reports=reports, medians=medians, max_measured=max_measured)


# ---------------------------------------------------------------------------
# window placement and the explicit spectral formula

@dataclass(frozen=True)
class WindowPlacement:
    j1: int
    j2: int
    inside: tuple[int, ...]
    flags: dict


def choose_window(constraint: DigitConstraint, B: int) -> WindowPlacement:
    """Deterministic digit window: span min(10 log2 B, n-2), placed to
    maximise the distance from {J1, J2} to the constrained positions
    (leftmost optimum).  Desk-scale guideline violations are flagged."""
    n = constraint.n
    span = min(10 * max(1, math.ceil(math.log2(B))), n - 2)
    best = None
    positions = constraint.positions
    for j1 in range(1, n - span):
        j2 = j1 + span
        dist = min([min(abs(j - j1), abs(j - j2)) for j in positions], default=n)
        if best is None or dist > best[0]:
            best = (dist, j1, j2)
    dist, j1, j2 = best
    inside = tuple(j for j in positions if j1 < j <= j2)
    r = constraint.r
    flags = {
        "distance_ok": r == 0 or dist > n / (10 * r),
        "density_ok": r == 0 or len(inside) < 10 * r * span / n,
        "formula_applicable": len(inside) <= 3,
    }
    return WindowPlacement(j1=j1, j2=j2, inside=inside, flags=flags)


def _sorted_coefficients(window: SmoothWindow, tol: float) -> list[tuple[float, int]]:
    mags = np.abs(window.coeffs)
    keep = mags > tol
    freqs = window.frequencies()[keep]
    mags = mags[keep]
    order = np.argsort(-mags, kind="stable")
    return list(zip(mags[order].tolist(), freqs[order].tolist()))


def kappa_formula(q0: int, j1: int, j2: int, constraint: DigitConstraint,
                  windows: Windows, prune_tol: float = 1e-8,
                  term_cap: int = _FORMULA_TERM_CAP) -> float:
    """Spectral upper-bound formula for the windowed deviation: the starred
    sum of |prod h_hat(b_j)| over frequency tuples whose combined dyadic
    frequency xi has ||q0 xi|| < n^2 q0 / 2^(j2-j1), scaled by 2^(r1).

    Positions inside the window are those j with j1 < j <= j2; at most
    three are supported (enumeration cost).
    """
    if q0 < 1 or q0 % 2 == 0:
        raise ParameterError("q0 must be odd and positive")
    n = constraint.n
    if not 1 <= j1 < j2 <= n:
        raise ParameterError("need 1 <= J1 < J2 <= n")
    inside = [(j, bit) for j, bit in constraint.pairs if j1 < j <= j2]
    r1 = len(inside)
    if r1 == 0:
        return 0.0
    if r1 > 3:
        raise ParameterError("more than three constrained digits in the window")
    delta_j = j2 - j1
    shifts = [j + 1 - j1 for j, _ in inside]
    s = max(shifts)
    lists = [_sorted_coefficients(windows.for_bit(bit), prune_tol / 4.0)
             for _, bit in inside]
    suffix_max = [1.0] * (r1 + 1)
    for i in range(r1 - 1, -1, -1):
        suffix_max[i] = suffix_max[i + 1] * (lists[i][0][0] if lists[i] else 0.0)
    mod = 1 << s
    thresh_lhs_scale = 1 << delta_j  # compare min(v, mod-v) * 2^dJ < n^2 q0 mod
    thresh_rhs = n * n * q0 * mod
    total = 0.0
    count = 0
    stack_b = [0] * r1
    stack_m = [1.0] * (r1 + 1)

    def descend(level: int) -> float:
        nonlocal count
        acc = 0.0
        rem = suffix_max[level + 1]
        prod = stack_m[level]
        for mag, b in lists[level]:
            if prod * mag * rem <= prune_tol:
                break
            stack_b[level] = b
            stack_m[level + 1] = prod * mag
            if level + 1 < r1:
                acc += descend(level + 1)
                continue
            count += 1
            if count > term_cap:
                raise TermOverflowError("frequency tuple budget exceeded; raise prune_tol")
            num = sum(bb << (s - sh) for bb, sh in zip(stack_b, shifts))
            num_mod = num % mod
            if num_mod == 0:  # starred sum: combined frequency must be nonzero
                continue
            v = (q0 * num) % mod
            if min(v, mod - v) * thresh_lhs_scale < thresh_rhs:
                acc += stack_m[level + 1]
        return acc

    total = descend(0)
    return float((1 << r1) * total)


# ---------------------------------------------------------------------------
# Diophantine counting

@dataclass(frozen=True)
class DiophantineInstance:
    """Count target: odd q ~ Q with ||q * sum_s beta_s / 2^(exp_s)|| below
    n^2 Q / 2^delta_j, under separation parameter D."""

    n: int
    Q: int
    delta_j: int
    D: int
    exponents: tuple[int, ...]
    numerators: tuple[int, ...]

    def validate(self) -> None:
        r1 = len(self.exponents)
        if r1 == 0 or r1 != len(self.numerators):
            raise ParameterError("need matching nonempty exponents/numerators")
        if list(self.exponents) != sorted(set(self.exponents)):
            raise ParameterError("exponents must be strictly increasing")
        if self.exponents[0] < 1 or self.exponents[-1] > self.delta_j:
            raise ParameterError("exponents must lie in [1, delta_j]")
        cube = self.n ** 3
        if any(b == 0 or abs(b) > cube for b in self.numerators):
            raise ParameterError("numerators must be nonzero with |b| <= n^3")
        if 10 * r1 * self.D >= self.delta_j:
            raise ParameterError("separation violates r1 * D < delta_j / 10")
        if self.scaled_numerator() % (1 << self.exponents[-1]) == 0:
            raise ParameterError("combined frequency vanishes mod 1")

    def scaled_numerator(self) -> int:
        """P with xi = P / 2^(max exponent)."""
        top = self.exponents[-1]
        return sum(b << (top - e) for b, e in zip(self.numerators, self.exponents))


@dataclass(frozen=True)
class DiophantineReport:
    count: int
    bound: float
    within_bound: bool
    degenerate: bool


def diophantine_count(inst: DiophantineInstance) -> DiophantineReport:
    """Exact enumeration of odd q in [Q, 2Q) with ||q xi|| < n^2 Q / 2^dJ."""
    inst.validate()
    if inst.Q > DIOPHANTINE_RANGE_CAP:
        raise ResourceError(f"Q above enumeration cap {DIOPHANTINE_RANGE_CAP}")
    s = inst.exponents[-1]
    mod = 1 << s
    P = inst.scaled_numerator() % mod
    # ||v/mod|| < theta  <=>  min(v, mod - v) * 2^dJ < n^2 Q mod
    rhs = inst.n * inst.n * inst.Q << s
    scale = 1 << inst.delta_j
    degenerate = 2 * inst.n * inst.n * inst.Q >= scale
    count = 0
    q0 = inst.Q + (inst.Q % 2 == 0)
    for q in range(q0, 2 * inst.Q, 2):
        v = (q * P) % mod
        if min(v, mod - v) * scale < rhs:
            count += 1
    bound = 2.0 ** (-inst.D / 2) * inst.Q
    return DiophantineReport(count=count, bound=bound,
                             within_bound=count <= bound, degenerate=degenerate)


def sample_instance(rng: np.random.Generator, n: int, r1: int, D: int,
                    delta_j: int, Q: int) -> DiophantineInstance:
    """Random admissible instance: exponents with gaps > D inside the
    window, numerators uniform in [-n^3, n^3] minus 0; rejection keeps the
    combined frequency nonzero mod 1."""
    if 10 * r1 * D >= delta_j:
        raise ParameterError("separation violates r1 * D < delta_j / 10")
    span = delta_j - (r1 - 1) * D
    cube = n ** 3
    while True:
        base = np.sort(rng.choice(np.arange(1, span + 1), size=r1, replace=False))
        exponents = tuple(int(b) + i * D for i, b in enumerate(base))
        numerators = []
        for _ in range(r1):
            b = 0
            while b == 0:
                b = int(rng.integers(-cube, cube + 1))
            numerators.append(b)
        inst = DiophantineInstance(n=n, Q=Q, delta_j=delta_j, D=D,
                                   exponents=exponents, numerators=tuple(numerators))
        try:
            inst.validate()
        except ParameterError:
            continue
        return inst
