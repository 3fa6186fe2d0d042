"""Bloom filter and the analytic false-positive estimators."""

from __future__ import annotations

import math
import struct
from typing import Callable, Iterable

from .errors import ConfigError, FormatError
from .hashfns import DEFAULT_K, FAMILY, HASHES, check_k, family_indices

IndexFn = Callable[[bytes, int, int], list]

DEFAULT_BITS = 512
HEADER = struct.Struct(">IBII")  # m, k, inserted, epoch
HEADER_SIZE = HEADER.size


def p_zero(m: int, k: int, p: int) -> float:
    """Probability a given bit is still 0 after `p` insertions of `k` bits each."""
    return (1.0 - 1.0 / m) ** (k * p)


def p_zero_exp(m: int, k: int, p: int) -> float:
    """Exponential approximation of :func:`p_zero`, ``exp(-k*p/m)``."""
    return math.exp(-k * p / m)


def fp_exact(m: int, k: int, p: int) -> float:
    return (1.0 - p_zero(m, k, p)) ** k


def fp_approx(k: int) -> float:
    """False-positive rate at the optimal (half full) operating point."""
    return 2.0 ** -k


def default_fp_max(k: int) -> float:
    return 2.0 * fp_approx(k)


def half_fill_insertions(m: int, k: int) -> int:
    """Insertions that bring the expected fill of an m-bit, k-hash filter closest to 50%."""
    return max(0, round(math.log(0.5) / (k * math.log1p(-1.0 / m)))) if m > 1 else 1


class BloomFilter:
    """Flat bit array of `m` bits queried through `k` index functions.

    Bits are stored most-significant-bit first: bit ``i`` lives in byte
    ``i // 8`` under mask ``0x80 >> (i % 8)``.
    """

    def __init__(self, m: int = DEFAULT_BITS, k: int = DEFAULT_K,
                 index_fn: IndexFn = family_indices):
        if not isinstance(m, int) or isinstance(m, bool) or m < 1 or m > 0xFFFFFFFF:
            raise ConfigError(f"filter size m must be in 1..2**32-1 bits, got {m!r}", "filter_bits")
        check_k(k)
        self.m = m
        self.k = k
        self.index_fn = index_fn
        self.bits = bytearray((m + 7) // 8)
        self.inserted = 0
        self.ones = 0
        self.epoch = 0

    def __repr__(self) -> str:
        return (f"BloomFilter(m={self.m}, k={self.k}, inserted={self.inserted}, "
                f"ones={self.ones}, epoch={self.epoch})")

    def _get(self, i: int) -> bool:
        return bool(self.bits[i >> 3] & (0x80 >> (i & 7)))

    def _set(self, i: int) -> None:
        mask = 0x80 >> (i & 7)
        if not self.bits[i >> 3] & mask:
            self.bits[i >> 3] |= mask
            self.ones += 1

    def indices(self, tag: bytes) -> list[int]:
        return self.index_fn(tag, self.k, self.m)

    def contains(self, tag: bytes) -> bool:
        if self.index_fn is family_indices:
            # stop hashing at the first clear bit
            tag = bytes(tag)
            return all(self._get(HASHES[name](tag) % self.m) for name in FAMILY[:self.k])
        return all(self._get(i) for i in self.indices(tag))

    def query_insert(self, tag: bytes) -> bool:
        """Return whether `tag` was already a member, then insert it."""
        idx = self.indices(tag)
        present = all(self._get(i) for i in idx)
        for i in idx:
            self._set(i)
        self.inserted += 1
        return present

    def add(self, tag: bytes) -> None:
        self.query_insert(tag)

    def update(self, tags: Iterable[bytes]) -> None:
        for tag in tags:
            self.query_insert(tag)

    def fill_ratio(self) -> float:
        return self.ones / self.m

    def fp_estimate(self) -> float:
        return fp_exact(self.m, self.k, self.inserted)

    def reset(self) -> None:
        self.bits = bytearray(len(self.bits))
        self.inserted = 0
        self.ones = 0
        self.epoch += 1

    def maybe_reset(self, fp_max: float) -> bool:
        """Clear the filter if its predicted false-positive rate exceeds `fp_max`."""
        if self.fp_estimate() > fp_max:
            self.reset()
            return True
        return False

    def nbytes(self) -> int:
        return HEADER_SIZE + len(self.bits)

    def to_bytes(self) -> bytes:
        return HEADER.pack(self.m, self.k, self.inserted, self.epoch) + bytes(self.bits)

    @classmethod
    def from_bytes(cls, data: bytes, index_fn: IndexFn = family_indices) -> "BloomFilter":
        if len(data) < HEADER_SIZE:
            raise FormatError(f"filter snapshot shorter than its {HEADER_SIZE}-byte header")
        m, k, inserted, epoch = HEADER.unpack_from(data)
        f = cls(m, k, index_fn)
        body = data[HEADER_SIZE:]
        if len(body) != len(f.bits):
            raise FormatError(f"m={m} needs {len(f.bits)} bit bytes, snapshot has {len(body)}")
        f.bits = bytearray(body)
        f.inserted = inserted
        f.epoch = epoch
        f.ones = sum(bin(b).count("1") for b in f.bits)
        return f


def measure_fp_rate(m: int, k: int, inserted: int, probes: int, rng,
                    tag_len: int = 20) -> tuple[int, BloomFilter]:
    """Load a fresh multi-hash filter with `inserted` random tags, then count
    how many of `probes` never-inserted random tags it reports as members."""
    f = BloomFilter(m, k)
    members = set()
    while len(members) < inserted:
        tag = rng.randbytes(tag_len)
        if tag not in members:
            members.add(tag)
            f.add(tag)
    hits = 0
    done = 0
    while done < probes:
        tag = rng.randbytes(tag_len)
        if tag in members:
            continue
        done += 1
        hits += f.contains(tag)
    return hits, f
