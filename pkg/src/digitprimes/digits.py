"""Digit constraints, smooth digit-indicator windows, and the sparse Fourier
form of the smoothed indicator f.

The window selecting digit value 0 is built as the indicator of
``[3/(4n), 1/2 - 3/(4n)]`` convolved ``m`` times with a box kernel of width
``1/(2nm)``.  The total transition width is then exactly ``1/(2n)`` per side,
so the reconstruction satisfies, exactly up to the truncation tail,

* ``h = 1`` on ``[1/n, 1/2 - 1/n]`` and ``h = 0`` on ``[1/2, 1]`` (digit 0),
* the half-period translate of the same for digit 1,

with closed-form coefficients ``I_hat(b) * sinc(pi b w)^m`` decaying like
``b^-(m+1)``.  The smoothing order m is the smallest value, at least
``ceil(log2 n)``, whose analytic coefficient tail beyond the support cut is
below 2^-44; that keeps every grid reconstruction within 2^-40 of the ideal
window.  Coefficient support never exceeds ``n^3``.

``f(x) = 1[x odd] * prod_j h_{bit_j}(x / 2^(j+1))``: parity is exact (spectral
lines at 0 and 1/2), the constrained digits are smooth.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from digitprimes.errors import ParameterError, RangeError, ResourceError, TermOverflowError

_TAIL_TARGET = 2.0 ** -44
_GRID_CAP = 24  # largest log2 grid size materialised for window values
_DEFAULT_TERM_CAP = 2_000_000


@dataclass(frozen=True)
class DigitConstraint:
    """Prescribed binary digits: ordered (position, bit) pairs, positions in
    [1, n-1] (position 0 is parity and stays implicit)."""

    n: int
    pairs: tuple[tuple[int, int], ...]

    @property
    def r(self) -> int:
        return len(self.pairs)

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self.pairs)

    def describe(self) -> str:
        return ",".join(f"{j}:{b}" for j, b in self.pairs) or "(none)"


def make_constraint(n: int, pairs) -> DigitConstraint:
    """Validate and normalise a digit constraint (sorted by position)."""
    if n < 4:
        raise ParameterError("n must be at least 4")
    seen = set()
    normalised = []
    for j, bit in pairs:
        j, bit = int(j), int(bit)
        if not 1 <= j <= n - 1:
            raise ParameterError(f"digit position {j} outside [1, {n - 1}]")
        if bit not in (0, 1):
            raise ParameterError(f"digit value {bit} is not a bit")
        if j in seen:
            raise ParameterError(f"duplicate digit position {j}")
        seen.add(j)
        normalised.append((j, bit))
    normalised.sort()
    return DigitConstraint(n, tuple(normalised))


def _tail_bound(n: int, m: int, cut: int) -> float:
    # sum_{|b| > cut} |h_hat(b)| <= (2/(pi m)) * (2 n m / (pi cut))^m
    return (2.0 / (math.pi * m)) * ((2.0 * n * m) / (math.pi * cut)) ** m


def _smoothing_order(n: int) -> int:
    m = max(2, math.ceil(math.log2(n)))
    while _tail_bound(n, m, n ** 3) > _TAIL_TARGET:
        m += 1
    return m


def _support_cut(n: int, m: int) -> int:
    cut = (2.0 * n * m / math.pi) * (2.0 / (math.pi * m * _TAIL_TARGET)) ** (1.0 / m)
    return min(n ** 3, max(int(math.ceil(cut)), 4 * n * m))


@dataclass(frozen=True)
class SmoothWindow:
    """1-periodic window stored as truncated Fourier coefficients.

    ``coeffs[i]`` is the coefficient of frequency ``i - bmax``; conjugate
    symmetry holds because the window is real.
    """

    n: int
    bit: int
    order: int
    bmax: int
    coeffs: np.ndarray  # complex128, length 2*bmax + 1
    _grids: dict = field(default_factory=dict, repr=False, compare=False)

    def coefficient(self, b: int) -> complex:
        if abs(b) > self.bmax:
            return 0.0 + 0.0j
        return complex(self.coeffs[b + self.bmax])

    def l1(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def frequencies(self) -> np.ndarray:
        return np.arange(-self.bmax, self.bmax + 1, dtype=np.int64)

    def eval(self, t) -> np.ndarray | float:
        """Direct trig-sum reconstruction; meant for spot checks."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        freqs = self.frequencies()
        out = np.empty(t.shape, dtype=np.float64)
        for lo in range(0, t.size, 64):
            block = t[lo : lo + 64, None] * freqs[None, :]
            out[lo : lo + 64] = np.exp(2j * np.pi * block) @ self.coeffs
        return out if out.size > 1 else float(out[0])

    def on_grid(self, log2_size: int) -> np.ndarray:
        """Window values at i / 2^log2_size, exact coefficient folding."""
        if log2_size > _GRID_CAP:
            raise ResourceError(f"window grid 2^{log2_size} exceeds cap 2^{_GRID_CAP}")
        cached = self._grids.get(log2_size)
        if cached is None:
            size = 1 << log2_size
            folded = np.zeros(size, dtype=np.complex128)
            np.add.at(folded, self.frequencies() % size, self.coeffs)
            cached = (np.fft.ifft(folded) * size).real
            self._grids[log2_size] = cached
        return cached


def build_window(n: int, bit: int) -> SmoothWindow:
    """Construct the smooth window selecting digit value ``bit``."""
    if n < 8:
        raise ParameterError("window construction needs n >= 8")
    if bit not in (0, 1):
        raise ParameterError("bit must be 0 or 1")
    m = _smoothing_order(n)
    bmax = _support_cut(n, m)
    w = 1.0 / (2.0 * n * m)
    left = 3.0 / (4.0 * n)
    right = 0.5 - 3.0 / (4.0 * n)
    b = np.arange(1, bmax + 1, dtype=np.float64)
    interval = (np.exp(-2j * np.pi * b * left) - np.exp(-2j * np.pi * b * right)) / (
        2j * np.pi * b
    )
    x = np.pi * b * w
    positive = interval * (np.sin(x) / x) ** m
    coeffs = np.empty(2 * bmax + 1, dtype=np.complex128)
    coeffs[bmax] = right - left
    coeffs[bmax + 1 :] = positive
    coeffs[:bmax] = np.conj(positive[::-1])
    if bit == 1:
        signs = np.where(np.arange(-bmax, bmax + 1) % 2 == 0, 1.0, -1.0)
        coeffs = coeffs * signs
    return SmoothWindow(n=n, bit=bit, order=m, bmax=bmax, coeffs=coeffs)


@dataclass(frozen=True)
class Windows:
    """The digit-0 and digit-1 windows for one exponent n."""

    h0: SmoothWindow
    h1: SmoothWindow

    @property
    def n(self) -> int:
        return self.h0.n

    def for_bit(self, bit: int) -> SmoothWindow:
        return self.h1 if bit else self.h0


def build_windows(n: int) -> Windows:
    return Windows(build_window(n, 0), build_window(n, 1))


def _window_values(window: SmoothWindow, x: np.ndarray, log2_period: int) -> np.ndarray:
    mask = (1 << log2_period) - 1
    if log2_period <= _GRID_CAP:
        return window.on_grid(log2_period)[x & mask]
    scale = 1.0 / (1 << log2_period)
    return np.asarray(window.eval((x & mask) * scale))


def eval_f(x, constraint: DigitConstraint, windows: Windows):
    """Smoothed indicator: parity times the constrained window product."""
    if windows.n != constraint.n:
        raise ParameterError("windows were built for a different n")
    scalar = np.isscalar(x) or getattr(x, "ndim", 1) == 0
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    if np.any(x < 0) or np.any(x >= (1 << constraint.n)):
        raise RangeError(f"x outside [0, 2^{constraint.n})")
    out = (x & 1).astype(np.float64)
    for j, bit in constraint.pairs:
        out *= _window_values(windows.for_bit(bit), x, j + 1)
    return float(out[0]) if scalar else out


def exact_indicator(x, constraint: DigitConstraint):
    """1 iff x is odd and every constrained digit matches."""
    scalar = np.isscalar(x) or getattr(x, "ndim", 1) == 0
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    ok = (x & 1) == 1
    for j, bit in constraint.pairs:
        ok &= ((x >> j) & 1) == bit
    out = ok.astype(np.int64)
    return int(out[0]) if scalar else out


def in_transition_band(x, constraint: DigitConstraint):
    """True where some constrained fractional part x / 2^(j+1) lies within
    1/n of a window breakpoint (0 or 1/2 mod 1).

    Even x are never in a band: parity forces f and the exact indicator to
    agree (both zero) there, so only odd arguments can sit on a window
    transition.
    """
    scalar = np.isscalar(x) or getattr(x, "ndim", 1) == 0
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    band = np.zeros(x.shape, dtype=bool)
    n = constraint.n
    for j, _ in constraint.pairs:
        v = x & ((1 << j) - 1) if j else np.zeros_like(x)
        dist = np.minimum(v, (1 << j) - v)  # numerator over 2^(j+1)
        band |= n * dist < (1 << (j + 1))
    band &= (x & 1) == 1
    return bool(band[0]) if scalar else band


def period_exponent(constraint: DigitConstraint) -> int:
    """f is periodic with period 2^s; this returns s (>= 1 for parity)."""
    return max([1] + [j + 1 for j, _ in constraint.pairs])


def f_period(constraint: DigitConstraint, windows: Windows) -> np.ndarray:
    """One full period of f (length 2^s)."""
    s = period_exponent(constraint)
    idx = np.arange(1 << s, dtype=np.int64)
    vals = (idx & 1).astype(np.float64)
    for j, bit in constraint.pairs:
        vals *= _window_values(windows.for_bit(bit), idx, j + 1)
    return vals


def mean_f(constraint: DigitConstraint, windows: Windows) -> float:
    """Exact normalised average of f over [0, 2^n).

    Computed in closed form as the mean over one period 2^s (s = highest
    constrained position + 1), which divides 2^n.  This equals
    ``(1/2) * prod_j h_hat_j(0)`` plus the dyadic aliasing corrections; the
    corrections die off like the coefficient tail once every constrained
    position exceeds ~log2(2nm), but are kept exactly here so that the
    deviation measurements over multiples of q0 = 1 vanish identically.
    """
    if constraint.r == 0:
        return 0.5
    return float(np.mean(f_period(constraint, windows)))


def f_values(constraint: DigitConstraint, windows: Windows) -> np.ndarray:
    """f(k) for every k < 2^n (tiled periods)."""
    period = f_period(constraint, windows)
    reps = (1 << constraint.n) // period.size
    return np.tile(period, reps)


@dataclass(frozen=True)
class FourierRep:
    """Sparse spectral form of f: terms c * e(k * theta) with dyadic
    frequencies theta = num / 2^s (exact integers)."""

    n: int
    s: int
    theta_num: np.ndarray  # int64, reduced mod 2^s
    coeff: np.ndarray  # complex128

    @property
    def term_count(self) -> int:
        return int(self.theta_num.size)

    def thetas(self) -> np.ndarray:
        return self.theta_num / float(1 << self.s)

    def l1(self) -> float:
        return float(np.sum(np.abs(self.coeff)))

    def evaluate(self, k) -> np.ndarray | complex:
        """Spot evaluation sum_theta c * e(k theta); k scalar or 1-d array."""
        scalar = np.isscalar(k)
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        out = np.empty(k.shape, dtype=np.complex128)
        for i, kv in enumerate(k):
            phases = _mulmod_pow2(int(kv), self.theta_num, self.s)
            out[i] = np.sum(self.coeff * np.exp(2j * np.pi * (phases / float(1 << self.s))))
        return complex(out[0]) if scalar else out


def _mulmod_pow2(k: int, nums: np.ndarray, s: int) -> np.ndarray:
    """(k * nums) mod 2^s without int64 overflow for s <= 34."""
    mod = np.int64(1) << s
    k = np.int64(k & (int(mod) - 1))
    if 2 * s <= 62:
        return (k * nums) & (mod - 1)
    hi = nums >> 17
    lo = nums & ((1 << 17) - 1)
    part = ((k * hi) & (mod - 1)) << 17
    return (part + k * lo) & (mod - 1)


def fourier_rep(constraint: DigitConstraint, windows: Windows,
                prune_tol: float = 0.0, term_cap: int = _DEFAULT_TERM_CAP) -> FourierRep:
    """Expand f into dyadic-frequency product terms, pruning coefficients
    with magnitude <= prune_tol.

    Raises TermOverflowError when the kept term count would exceed
    ``term_cap``; the caller should raise prune_tol.
    """
    if prune_tol < 0:
        raise ParameterError("prune_tol must be >= 0")
    if windows.n != constraint.n:
        raise ParameterError("windows were built for a different n")
    s = period_exponent(constraint)
    half = np.int64(1 << (s - 1))
    nums = np.array([0, half], dtype=np.int64)
    coeffs = np.array([0.5, -0.5], dtype=np.complex128)
    maxima = [float(np.max(np.abs(windows.for_bit(bit).coeffs))) for _, bit in constraint.pairs]
    for i, (j, bit) in enumerate(constraint.pairs):
        win = windows.for_bit(bit)
        shift = np.int64(1 << (s - j - 1))
        wnums = (win.frequencies() * shift) % np.int64(1 << s)
        rem = math.prod(maxima[i + 1 :]) if i + 1 < len(maxima) else 1.0
        new_nums = (nums[:, None] + wnums[None, :]) & np.int64((1 << s) - 1)
        new_coeffs = coeffs[:, None] * win.coeffs[None, :]
        keep = np.abs(new_coeffs) * rem > prune_tol
        nums = new_nums[keep]
        coeffs = new_coeffs[keep]
        if nums.size > term_cap:
            raise TermOverflowError(
                f"{nums.size} terms exceed cap {term_cap}; raise prune_tol")
        if nums.size == 0:
            break
    return FourierRep(n=constraint.n, s=s, theta_num=nums, coeff=coeffs)


def write_fourier_csv(rep: FourierRep, path) -> None:
    """Dump the expansion with exact dyadic frequencies (num over 2^pow)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_num", "theta_den_pow2", "coeff_re", "coeff_im"])
        for num, c in zip(rep.theta_num.tolist(), rep.coeff.tolist()):
            pow2 = rep.s
            while num and num % 2 == 0:
                num //= 2
                pow2 -= 1
            if num == 0:
                pow2 = 0
            writer.writerow([num, pow2, repr(c.real), repr(c.imag)])
