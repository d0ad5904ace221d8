"""Shared numeric helpers: phase-accurate reduction of k*alpha mod 1 and
stable complex-exponential primitives.

Naively computing exp(2*pi*i*k*alpha) loses ~log2(k) bits of phase for large
k.  ``phase_mod1`` splits alpha into a 26-bit dyadic head plus a small tail,
reduces the head in exact integer arithmetic, and keeps the total phase error
below ~2^-46 for k up to 2^34.
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi
_HEAD_BITS = 26
_HEAD = 1 << _HEAD_BITS


def phase_mod1(k, alpha: float) -> np.ndarray:
    """(k * alpha) mod 1 for integer k (scalar or int64 array), |error| < 2^-45."""
    k = np.asarray(k, dtype=np.int64)
    a = float(alpha) - math.floor(float(alpha))
    head = int(round(a * _HEAD))
    tail = a - head / _HEAD  # exact: |tail| <= 2^-27
    int_part = (k * head) & (_HEAD - 1)  # k*head < 2^34 * 2^26 fits int64
    frac = int_part / float(_HEAD) + k * tail
    return np.mod(frac, 1.0)


def cis(phase) -> np.ndarray:
    """exp(2 pi i phase)."""
    phase = np.asarray(phase, dtype=np.float64)
    return np.exp(2j * np.pi * phase)


def cis_minus_one(phase) -> np.ndarray:
    """exp(2 pi i phase) - 1 without cancellation: 2i sin(pi x) e(x/2)."""
    phase = np.asarray(phase, dtype=np.float64)
    s = np.sin(np.pi * phase)
    return 2j * s * np.exp(1j * np.pi * phase)
