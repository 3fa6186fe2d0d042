"""SHA-1 and the classic 32-bit general-purpose string hashes.

All arithmetic is reduced modulo 2**32 after every step so results match a
C implementation using ``uint32_t``.
"""

from __future__ import annotations

import hashlib
from typing import Callable

from .errors import ConfigError

MASK = 0xFFFFFFFF
FAMILY = ("RS", "JS", "PJW", "ELF", "BKDR", "SDBM", "DJB", "DEK", "AP")
MAX_K = len(FAMILY)
DEFAULT_K = 8


def sha1(data: bytes) -> bytes:
    return hashlib.sha1(data).digest()


def rs_hash(data: bytes) -> int:
    a, b, h = 63689, 378551, 0
    for c in data:
        h = (h * a + c) & MASK
        a = (a * b) & MASK
    return h


def js_hash(data: bytes) -> int:
    h = 1315423911
    for c in data:
        h ^= (((h << 5) & MASK) + c + (h >> 2)) & MASK
    return h


def pjw_hash(data: bytes) -> int:
    h = 0
    for c in data:
        h = ((h << 4) + c) & MASK
        g = h & 0xF0000000
        if g:
            h ^= g >> 24
            h &= ~g & MASK
    return h


def elf_hash(data: bytes) -> int:
    # 32-bit ELF shares PJW's recurrence exactly
    h = 0
    for c in data:
        h = ((h << 4) + c) & MASK
        x = h & 0xF0000000
        if x:
            h ^= x >> 24
        h &= ~x & MASK
    return h


def bkdr_hash(data: bytes) -> int:
    h = 0
    for c in data:
        h = (h * 131 + c) & MASK
    return h


def sdbm_hash(data: bytes) -> int:
    h = 0
    for c in data:
        h = (c + (h << 6) + (h << 16) - h) & MASK
    return h


def djb_hash(data: bytes) -> int:
    h = 5381
    for c in data:
        h = ((h << 5) + h + c) & MASK
    return h


def dek_hash(data: bytes) -> int:
    h = len(data) & MASK
    for c in data:
        h = (((h << 5) & MASK) ^ (h >> 27)) ^ c
    return h


def ap_hash(data: bytes) -> int:
    h = 0xAAAAAAAA
    for i, c in enumerate(data):
        if i & 1 == 0:
            h ^= ((h << 7) & MASK) ^ ((c * (h >> 3)) & MASK)
        else:
            h ^= ~((((h << 11) & MASK) + (c ^ (h >> 5))) & MASK) & MASK
    return h


HASHES: dict[str, Callable[[bytes], int]] = {
    "RS": rs_hash,
    "JS": js_hash,
    "PJW": pjw_hash,
    "ELF": elf_hash,
    "BKDR": bkdr_hash,
    "SDBM": sdbm_hash,
    "DJB": djb_hash,
    "DEK": dek_hash,
    "AP": ap_hash,
}


def hash32(fn_name: str, data: bytes) -> int:
    try:
        fn = HASHES[fn_name]
    except KeyError:
        raise ConfigError(f"unknown hash function {fn_name!r}; expected one of {FAMILY}") from None
    return fn(bytes(data))


def check_k(k: int) -> None:
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= MAX_K:
        raise ConfigError(f"hash count k must be in 1..{MAX_K}, got {k!r}", "k")


def family_indices(tag: bytes, k: int, m: int) -> list[int]:
    """Bit positions for `tag` under the first `k` family members, mod `m`."""
    check_k(k)
    if m < 1:
        raise ConfigError(f"filter size must be >= 1 bit, got {m}", "filter_bits")
    tag = bytes(tag)
    return [HASHES[name](tag) % m for name in FAMILY[:k]]


def sha1_index(tag: bytes, k: int, m: int) -> list[int]:
    """Single position from the first 4 digest bytes (big-endian) mod `m`.

    Used by the single-hash Bloom scheme; `k` is accepted for signature
    compatibility with :func:`family_indices` and must be 1.
    """
    if k != 1:
        raise ConfigError(f"SHA-1 indexing yields one position, k must be 1 (got {k})", "k")
    if m < 1:
        raise ConfigError(f"filter size must be >= 1 bit, got {m}", "filter_bits")
    return [int.from_bytes(sha1(tag)[:4], "big") % m]
