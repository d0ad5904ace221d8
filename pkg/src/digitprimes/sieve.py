"""Prime and von Mangoldt tables up to N = 2^n, plus exact digit-constrained
prime counts.

Storage conventions
-------------------
* ``PrimeTable.bits`` packs one bit per integer ``k < N`` in little bit
  order: bit ``k`` lives at ``bits[k >> 3] >> (k & 7)``.
* ``MangoldtTable.values`` holds binary64 ``Lambda(k)`` for ``0 <= k < N``;
  all weighted sums in this package run over the half-open range ``k < N``
  (``Lambda(2^n) = log 2`` itself is never included; it is far below every
  tolerance used here).
* Reductions use numpy's deterministic pairwise summation, so results are
  bit-stable across runs and across ``threads`` settings.

Cache files: magic ``DPSV``, version u32 LE, kind u8 (0 = prime bits,
1 = Lambda), n u64 LE, raw payload, trailing CRC32 (u32 LE) over everything
before it.  ``DIGITPRIMES_CACHE_DIR`` selects the directory.
"""

from __future__ import annotations

import math
import os
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from digitprimes import kernels
from digitprimes.errors import CacheError, ParameterError, RangeError

MAX_PRIME_EXPONENT = 34
MAX_MANGOLDT_EXPONENT = 30

_CACHE_MAGIC = b"DPSV"
_CACHE_VERSION = 1
_KIND_PRIME = 0
_KIND_MANGOLDT = 1

# popcount of each byte value
_POPCOUNT = np.array([bin(v).count("1") for v in range(256)], dtype=np.uint8)


@dataclass(frozen=True)
class PrimeTable:
    """Bit-packed primality table for all k < 2^n."""

    n: int
    bits: np.ndarray  # uint8, length 2^(n-3)

    @property
    def limit(self) -> int:
        return 1 << self.n

    def popcount(self) -> int:
        """Number of set bits, i.e. pi(2^n)."""
        return int(_POPCOUNT[self.bits].sum(dtype=np.int64))

    def is_prime(self, k) -> np.ndarray | bool:
        k = np.asarray(k)
        if np.any(k < 0) or np.any(k >= self.limit):
            raise RangeError(f"k outside [0, 2^{self.n})")
        out = (self.bits[k >> 3] >> (k & 7)) & 1
        return out.astype(bool) if out.ndim else bool(out)

    def bool_block(self, lo: int, hi: int) -> np.ndarray:
        """Primality as a bool array for 8-aligned [lo, hi)."""
        if lo % 8 or hi % 8:
            raise ParameterError("block bounds must be multiples of 8")
        chunk = np.unpackbits(self.bits[lo >> 3 : hi >> 3], bitorder="little")
        return chunk.astype(bool)


@dataclass(frozen=True)
class MangoldtTable:
    """values[k] = log p when k = p^m, else 0, for all k < 2^n."""

    n: int
    values: np.ndarray  # float64, length 2^n

    @property
    def limit(self) -> int:
        return 1 << self.n


def _base_primes(limit: int) -> np.ndarray:
    """Odd primes <= limit by a plain byte sieve (limit is at most 2^17)."""
    if limit < 3:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    primes = np.flatnonzero(flags).astype(np.int64)
    return primes[primes % 2 == 1]


def _odd_flags(n: int, threads: int = 1) -> np.ndarray:
    """flags[i] = 1 iff 2*i + 1 is prime, for 2*i + 1 < 2^n."""
    half = 1 << (n - 1)
    flags = np.ones(half, dtype=np.uint8)
    flags[0] = 0  # 1 is not prime
    base = _base_primes(math.isqrt((1 << n) - 1))
    if threads <= 1 or half < 4 * kernels.SEGMENT_ODDS:
        kernels.mark_range(flags, 0, half, base)
    else:
        # disjoint index windows: deterministic regardless of thread count
        step = -(-half // threads)
        step += (-step) % kernels.SEGMENT_ODDS
        windows = [(lo, min(lo + step, half)) for lo in range(0, half, step)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda w: kernels.mark_range(flags, w[0], w[1], base), windows))
    return flags


def _pack_odd_flags(flags: np.ndarray) -> np.ndarray:
    """Pack odd-only flags into the full little-bit-order byte table."""
    quads = flags.reshape(-1, 4).astype(np.uint8)
    packed = (
        (quads[:, 0] << 1) | (quads[:, 1] << 3) | (quads[:, 2] << 5) | (quads[:, 3] << 7)
    ).astype(np.uint8)
    packed[0] |= 0b0100  # k = 2
    return packed


def build_prime_table(n: int, cache_dir: str | os.PathLike | None = None,
                      threads: int = 1) -> PrimeTable:
    """Sieve all k < 2^n and return the packed table.

    Args:
        n: bit-length exponent, 4 <= n <= 34.
        cache_dir: directory for the persisted table; defaults to
            ``DIGITPRIMES_CACHE_DIR`` when that is set, else no caching.
            A corrupt cache file is rebuilt and rewritten.
        threads: worker cap for segment marking; does not change the output.
    """
    if not 4 <= n <= MAX_PRIME_EXPONENT:
        raise ParameterError(f"prime table exponent must be in [4, {MAX_PRIME_EXPONENT}]")
    directory = _resolve_cache_dir(cache_dir)
    if directory is not None:
        path = directory / f"prime_{n:02d}.dpsv"
        if path.exists():
            try:
                return PrimeTable(n, _load_payload(path, _KIND_PRIME, n, np.uint8))
            except CacheError:
                pass
    bits = _pack_odd_flags(_odd_flags(n, threads))
    table = PrimeTable(n, bits)
    if directory is not None:
        _store_payload(directory / f"prime_{n:02d}.dpsv", _KIND_PRIME, n, bits)
    return table


def build_mangoldt_table(n: int, prime_table: PrimeTable | None = None,
                         cache_dir: str | os.PathLike | None = None,
                         threads: int = 1) -> MangoldtTable:
    """Fill Lambda(k) for k < 2^n.

    log p is computed directly for every prime power (never by repeated
    addition), so each entry is correctly rounded binary64.
    """
    if not 4 <= n <= MAX_MANGOLDT_EXPONENT:
        raise ParameterError(f"Mangoldt exponent must be in [4, {MAX_MANGOLDT_EXPONENT}]")
    directory = _resolve_cache_dir(cache_dir)
    if directory is not None:
        path = directory / f"mangoldt_{n:02d}.dpsv"
        if path.exists():
            try:
                payload = _load_payload(path, _KIND_MANGOLDT, n, np.float64)
                return MangoldtTable(n, payload)
            except CacheError:
                pass
    if prime_table is None or prime_table.n != n:
        prime_table = build_prime_table(n, cache_dir=cache_dir, threads=threads)
    N = 1 << n
    values = np.zeros(N, dtype=np.float64)
    block = 1 << min(n, 22)
    for lo in range(0, N, block):
        hi = lo + block
        primes = np.flatnonzero(prime_table.bool_block(lo, hi)) + lo
        values[primes] = np.log(primes)
    # proper prime powers p^m, m >= 2: only p <= sqrt(N) contribute
    root = math.isqrt(N - 1)
    small = np.flatnonzero(prime_table.bool_block(0, (root // 8 + 1) * 8))
    for p in small[small <= root]:
        p = int(p)
        logp = math.log(p)
        pk = p * p
        while pk < N:
            values[pk] = logp
            pk *= p
    table = MangoldtTable(n, values)
    if directory is not None:
        _store_payload(directory / f"mangoldt_{n:02d}.dpsv", _KIND_MANGOLDT, n, values)
    return table


def chebyshev_psi(x: int, table: MangoldtTable) -> float:
    """Sum of Lambda(k) for k <= x (and k < 2^n); monotone in x."""
    if x < 0 or x > table.limit:
        raise RangeError(f"x outside [0, 2^{table.n}]")
    hi = min(int(x), table.limit - 1)
    return float(np.sum(table.values[: hi + 1]))


def _masked_popcount_lut(low_constraints: dict[int, int]) -> np.ndarray:
    """Per-byte count of set bits whose within-byte position matches the
    constrained low digit positions (0..2)."""
    positions = np.arange(8)
    keep = np.ones(8, dtype=bool)
    for j, bit in low_constraints.items():
        keep &= ((positions >> j) & 1) == bit
    mask = int(np.sum((1 << positions)[keep]))
    return _POPCOUNT[np.arange(256) & mask]


def count_exact(constraint, table: PrimeTable) -> int:
    """Number of primes p < 2^n whose digit at position j equals the
    prescribed bit for every constrained j.

    Note p = 2 is counted whenever its digits happen to match (the empty
    constraint therefore counts all of pi(2^n)).
    """
    if constraint.n != table.n:
        raise ParameterError(
            f"constraint has n={constraint.n} but table has n={table.n}")
    n = table.n
    view = table.bits.reshape((2,) * (n - 3))
    index: list = [slice(None)] * (n - 3)
    low: dict[int, int] = {}
    for j, bit in constraint.pairs:
        if j >= 3:
            index[n - 1 - j] = bit  # axis t holds digit n-1-t of k
        else:
            low[j] = bit
    selected = view[tuple(index)].ravel()
    lut = _masked_popcount_lut(low)
    return int(lut[selected].sum(dtype=np.int64))


# ---------------------------------------------------------------------------
# cache plumbing

def _resolve_cache_dir(cache_dir) -> Path | None:
    if cache_dir is not None:
        path = Path(cache_dir)
    else:
        env = os.environ.get("DIGITPRIMES_CACHE_DIR")
        if not env:
            return None
        path = Path(env)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _store_payload(path: Path, kind: int, n: int, array: np.ndarray) -> None:
    header = _CACHE_MAGIC + struct.pack("<IBQ", _CACHE_VERSION, kind, n)
    payload = array.astype(array.dtype.newbyteorder("<"), copy=False).tobytes()
    crc = zlib.crc32(header + payload) & 0xFFFFFFFF
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(header + payload + struct.pack("<I", crc))
    tmp.replace(path)


def _load_payload(path: Path, kind: int, n: int, dtype) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < 21 or raw[:4] != _CACHE_MAGIC:
        raise CacheError(f"{path}: bad magic")
    version, file_kind, file_n = struct.unpack("<IBQ", raw[4:17])
    if version != _CACHE_VERSION or file_kind != kind or file_n != n:
        raise CacheError(f"{path}: header mismatch")
    body, crc_stored = raw[:-4], struct.unpack("<I", raw[-4:])[0]
    if zlib.crc32(body) & 0xFFFFFFFF != crc_stored:
        raise CacheError(f"{path}: checksum mismatch")
    expected = (1 << n) // 8 if kind == _KIND_PRIME else (1 << n) * 8
    payload = raw[17:-4]
    if len(payload) != expected:
        raise CacheError(f"{path}: wrong payload size")
    return np.frombuffer(payload, dtype=np.dtype(dtype).newbyteorder("<")).copy()
