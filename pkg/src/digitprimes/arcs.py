"""Exponential sums over the weighted integers, the exact discrete form of
the circle-method integral, major/minor arc decomposition, and the
asymptotic parameter planner.

The unit circle is discretised to M equispaced frequencies m/M with M a
power of two strictly greater than N = 2^n.  On that grid the correlation

    (1/M) sum_m S(m/M) conj(S_f(m/M)) = sum_{k<N} Lambda(k) f(k)

is an exact identity (no aliasing), so every acceptance check against the
direct correlation is testing floating-point round-off only.

All "much less than" envelope checks are reported as measured ratios with
the implicit constant fixed to 1; logs are natural throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from digitprimes.digits import FourierRep
from digitprimes.errors import (
    AliasingError,
    ConsistencyError,
    ParameterError,
    ResourceError,
)
from digitprimes.numutil import cis, phase_mod1
from digitprimes.sieve import MangoldtTable

_CHUNK = 1 << 20
_GRID_BYTES_CAP = 2 << 30  # complex grid allocation guard


def s_at(alpha: float, table: MangoldtTable) -> complex:
    """S(alpha) = sum_{k<N} Lambda(k) e(k alpha), direct summation."""
    total = 0.0 + 0.0j
    N = table.limit
    for lo in range(0, N, _CHUNK):
        k = np.arange(lo, min(lo + _CHUNK, N), dtype=np.int64)
        total += np.dot(table.values[k[0] : k[-1] + 1], cis(phase_mod1(k, alpha)))
    return complex(total)


def geometric_sum(n: int, theta_num: np.ndarray, s: int, alpha: float) -> np.ndarray:
    """G_N(theta + alpha) = sum_{k<N} e(k (theta + alpha)) for dyadic
    frequencies theta = theta_num / 2^s with s <= n.

    Since 2^n * theta is an integer, e(N x) = e(N alpha) for every term, and
    the ratio form stays cancellation-free via 2i sin(pi t) e(t/2) factors.
    """
    if s > n:
        raise ParameterError("dyadic denominator exceeds the range length")
    N = 1 << n
    x = np.mod(theta_num / float(1 << s) + (alpha - math.floor(alpha)), 1.0)
    n_alpha = float(phase_mod1(N, alpha))
    sin_x = np.sin(np.pi * x)
    out = np.empty(x.shape, dtype=np.complex128)
    degenerate = np.abs(sin_x) < 1e-12
    out[degenerate] = N
    ratio = np.sin(np.pi * n_alpha) / np.where(degenerate, 1.0, sin_x)
    phase = np.exp(1j * np.pi * (n_alpha - x))
    out[~degenerate] = (ratio * phase)[~degenerate]
    return out


def s_f_at(alpha: float, rep: FourierRep, n: int) -> complex:
    """S_f(alpha) = sum_{k<N} f(k) e(k alpha) via the sparse expansion:
    each dyadic line theta contributes c * G_N(alpha + theta)."""
    g = geometric_sum(n, rep.theta_num, rep.s, alpha)
    return complex(np.dot(rep.coeff, g))


def grid_transform(values: np.ndarray, M: int) -> np.ndarray:
    """Exact DFT of the zero-padded sequence: output[m] = sum_k v[k] e(km/M)."""
    values = np.asarray(values)
    N = values.shape[0]
    if M & (M - 1) or M <= N:
        raise AliasingError("M must be a power of two strictly above the sequence length")
    if 16 * M > _GRID_BYTES_CAP:
        raise ResourceError(f"grid of {M} complex entries exceeds the memory cap")
    padded = np.zeros(M, dtype=np.complex128)
    padded[:N] = values
    return np.fft.ifft(padded) * M


def parseval_integral(s_grid: np.ndarray, sf_grid: np.ndarray, M: int) -> float:
    """(1/M) sum_m S(m/M) conj(S_f(m/M)); equals sum_k Lambda(k) f(k)
    exactly when both grids came from sequences of length < M."""
    if s_grid.shape[0] != M or sf_grid.shape[0] != M:
        raise ParameterError("grid length mismatch")
    return float(np.real(np.dot(s_grid, np.conj(sf_grid)))) / M


@dataclass(frozen=True)
class MajorArc:
    q: int
    a: int
    indices: np.ndarray  # grid indices inside |alpha - a/q| < B/(qN), mod M


@dataclass(frozen=True)
class ArcDecomposition:
    n: int
    M: int
    B: int
    arcs: list[MajorArc]
    major_mask: np.ndarray  # bool, length M

    @property
    def major_count(self) -> int:
        return int(self.major_mask.sum())

    def minor_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.major_mask)


def decompose_arcs(B: int, M: int, n: int) -> ArcDecomposition:
    """Partition the M grid points into major arcs (q < B, gcd(a,q)=1,
    |m/M - a/q| < B/(qN)) and their complement.

    Exact integer criterion: m belongs to arc (q, a) iff
    |m q - a M| < B M / N (M and N are powers of two, so the bound is an
    integer).  Arcs must be pairwise disjoint: centers a/q, a'/q' differ by
    at least 1/(qq') while the half-widths sum to B(q+q')/(qq'N), so
    N >= 2B^2 suffices; overlap is additionally detected exactly.
    """
    N = 1 << n
    if B < 2:
        raise ParameterError("B must be at least 2")
    if 2 * B * B > N:
        raise ParameterError("need 2 B^2 <= N for disjoint major arcs")
    if M & (M - 1) or M <= N:
        raise AliasingError("M must be a power of two strictly above N")
    width = B * (M // N)  # strict bound on |m q - a M|
    marks = np.zeros(M, dtype=np.uint8)
    arcs = []
    for q in range(1, B):
        for a in range(q) if q > 1 else [0]:
            if math.gcd(a, q) != 1 and q > 1:
                continue
            center = a * M  # over q
            lo = -(-(center - width + 1) // q)  # ceil((center-width+1)/q)
            hi = (center + width - 1) // q
            m = np.arange(lo, hi + 1, dtype=np.int64)
            m = m[np.abs(m * q - center) < width] % M
            arcs.append(MajorArc(q, a, m))
            marks[m] += 1
    if marks.max(initial=0) > 1:
        raise ConsistencyError("major arcs overlap; B too large for this N")
    mask = marks.astype(bool)
    total = sum(arc.indices.size for arc in arcs)
    if total != int(mask.sum()):
        raise ConsistencyError("arc index bookkeeping lost grid points")
    return ArcDecomposition(n=n, M=M, B=B, arcs=arcs, major_mask=mask)


@dataclass(frozen=True)
class MinorArcReport:
    sup: float
    ratio: float  # sup * sqrt(B) / (N (log N)^3)
    empty: bool


def minor_arc_sup(dec: ArcDecomposition, s_grid: np.ndarray) -> MinorArcReport:
    """Largest |S| over the minor arcs plus its normalised envelope ratio."""
    minor = ~dec.major_mask
    if not minor.any():
        return MinorArcReport(0.0, 0.0, True)
    sup = float(np.max(np.abs(s_grid[minor])))
    N = 1 << dec.n
    ratio = sup * math.sqrt(dec.B) / (N * math.log(N) ** 3)
    return MinorArcReport(sup, ratio, False)


@dataclass(frozen=True)
class MajorArcReport:
    value: float
    main_term: float
    residual: float
    minor_value: float


def major_arc_integral(dec: ArcDecomposition, s_grid: np.ndarray,
                       sf_grid: np.ndarray, mean_f: float) -> MajorArcReport:
    """Major-arc share of the grid correlation, against 2 E[f] N."""
    prod = s_grid * np.conj(sf_grid)
    value = float(np.real(np.sum(prod[dec.major_mask]))) / dec.M
    minor_value = float(np.real(np.sum(prod[~dec.major_mask]))) / dec.M
    main = 2.0 * mean_f * (1 << dec.n)
    return MajorArcReport(value, main, value - main, minor_value)


def sf_l1(sf_grid: np.ndarray, M: int) -> float:
    """(1/M) sum_m |S_f(m/M)|, the grid L1 norm."""
    if sf_grid.shape[0] != M:
        raise ParameterError("grid length mismatch")
    return float(np.sum(np.abs(sf_grid))) / M


WINDOW_L1_CONSTANT = 8.0  # frozen constant in the (C log n)^r envelopes


@dataclass(frozen=True)
class ParameterPlan:
    n: int
    r: int
    gamma: float
    C: float
    B: float
    T: float
    flags: dict[str, bool]

    @property
    def all_satisfied(self) -> bool:
        return all(self.flags.values())


def plan_parameters(n: int, r: int, gamma: float) -> ParameterPlan:
    """Asymptotic cutoffs B = n^6 (C log n)^(2r) / gamma^2 and
    T = n^8 (C log n)^(3r) / gamma^3, with the side-condition flags.

    Flags never reject: they report whether each growth condition holds
    with its implicit constant set to 1 (natural logs).
    """
    if n < 8 or r < 0 or not 0 < gamma < 1:
        raise ParameterError("need n >= 8, r >= 0, 0 < gamma < 1")
    C = WINDOW_L1_CONSTANT
    log_n = math.log(n)
    B = n ** 6 * (C * log_n) ** (2 * r) * gamma ** -2
    T = n ** 8 * (C * log_n) ** (3 * r) * gamma ** -3
    log_T, log_B = math.log(T), math.log(B)
    flags = {
        "r_budget": r < (n / log_n) ** (4 / 7),
        "log_T_vs_sqrt_r": r == 0 or log_T <= n / math.sqrt(r),
        "log_B_vs_r_squared": r == 0 or log_B <= n ** 2 / r ** 2,
        "log_T_powerful_moduli": log_T <= n ** (4 / 7) * log_n ** (-3 / 7),
    }
    return ParameterPlan(n=n, r=r, gamma=gamma, C=C, B=B, T=T, flags=flags)
