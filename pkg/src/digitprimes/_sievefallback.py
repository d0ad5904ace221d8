"""Pure-numpy stand-in for the compiled sieve kernel.

Same contract as ``_sievekernel.mark_range``: clear composite entries of the
odd-only flag array on the index window ``[lo, hi)``.  Strided slice
assignment replaces the C loop; segmentation is kept so the memory traffic
pattern matches the compiled path.
"""

import numpy as np


def mark_range(flags, lo, hi, primes, segment):
    for seg_lo in range(lo, hi, segment):
        seg_hi = min(seg_lo + segment, hi)
        v_lo = 2 * seg_lo + 1
        for p in primes:
            p = int(p)
            first = ((v_lo + p - 1) // p) * p
            if first % 2 == 0:
                first += p
            first = max(first, p * p)
            idx = (first - 1) // 2
            if idx < seg_hi:
                flags[idx:seg_hi:p] = 0
