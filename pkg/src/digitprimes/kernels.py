"""Kernel selection: compiled sieve loop when the extension built, numpy
fallback otherwise.  ``DIGITPRIMES_PURE_PYTHON=1`` forces the fallback."""

import os

from digitprimes import _sievefallback

HAVE_COMPILED_KERNEL = False
_impl = _sievefallback

if os.environ.get("DIGITPRIMES_PURE_PYTHON") != "1":
    try:
        from digitprimes import _sievekernel as _impl  # type: ignore[no-redef]

        HAVE_COMPILED_KERNEL = True
    except ImportError:
        pass

#: Odd-only entries per sieve segment; keeps the inner loop cache-resident.
SEGMENT_ODDS = 1 << 16


def mark_range(flags, lo, hi, primes, segment=SEGMENT_ODDS):
    """Clear composite odd entries of ``flags`` on index window [lo, hi)."""
    _impl.mark_range(flags, lo, hi, primes, segment)


def kernel_name():
    return "compiled" if HAVE_COMPILED_KERNEL else "numpy"
