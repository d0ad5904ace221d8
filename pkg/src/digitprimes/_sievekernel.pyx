# cython: boundscheck=False, wraparound=False, cdivision=True
"""Hot inner loop of the odd-only segmented sieve.

``flags[i]`` stands for the odd number ``2*i + 1``.  ``mark_range`` clears
every entry in the index window ``[lo, hi)`` that is a proper multiple of a
base prime, walking the window in cache-resident segments.  Releases the GIL
so disjoint windows can be marked from worker threads.
"""


def mark_range(unsigned char[::1] flags, Py_ssize_t lo, Py_ssize_t hi,
               long long[::1] primes, Py_ssize_t segment):
    cdef Py_ssize_t seg_lo, seg_hi, idx, j, nprimes
    cdef long long p, v, first
    nprimes = primes.shape[0]
    with nogil:
        seg_lo = lo
        while seg_lo < hi:
            seg_hi = seg_lo + segment
            if seg_hi > hi:
                seg_hi = hi
            for j in range(nprimes):
                p = primes[j]
                # smallest odd multiple of p that is >= max(p*p, 2*seg_lo+1)
                v = 2 * seg_lo + 1
                first = ((v + p - 1) // p) * p
                if first % 2 == 0:
                    first += p
                if first < p * p:
                    first = p * p
                idx = (first - 1) // 2
                while idx < seg_hi:
                    flags[idx] = 0
                    idx += p
            seg_lo = seg_hi
