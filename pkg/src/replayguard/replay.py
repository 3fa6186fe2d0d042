"""Replay detectors and their storage accounting.

Four schemes share one interface, ``detector.check(packet) -> Verdict``:

``counter``
    Per-neighbor highest counter plus a W-bit presence bitmap covering
    ``(H - W, H]``. Reads the ``src || ctr`` IV tail of AE packets.
``hash_window``
    Per-neighbor FIFO of the last W accepted SHA-1 digests of whole packets.
``bloom_single``
    One filter per node, one bit per packet taken from the SHA-1 digest.
``bloom_multi``
    One filter per node, k bits per packet from the 32-bit hash family.
"""

from __future__ import annotations

import enum
import math
import struct
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Hashable

from .bloom import DEFAULT_BITS, HEADER_SIZE, BloomFilter, default_fp_max, fp_approx
from .errors import ConfigError
from .hashfns import DEFAULT_K, MAX_K, family_indices, sha1, sha1_index
from .wire import Packet, PacketAE, replay_tag

SCHEMES = ("counter", "hash_window", "bloom_single", "bloom_multi")
DIGEST_SIZE = 20
COUNTER_SIZE = 2
CTR_MAX = 0xFFFF
DEFAULT_WINDOW = 8
RAM_BUDGET = 4096


class Verdict(str, enum.Enum):
    FRESH = "fresh"
    REPLAYED = "replayed"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DetectorConfig:
    scheme: str = "bloom_multi"
    window: int = DEFAULT_WINDOW
    filter_bits: int = DEFAULT_BITS
    k: int = DEFAULT_K
    fp_max: float | None = None  # None -> 2 * 2**-k

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}", "scheme")
        for name in ("window", "filter_bits", "k"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}", name)
        if self.k > MAX_K:
            raise ConfigError(f"k must be at most {MAX_K}, got {self.k}", "k")
        if self.filter_bits > 0xFFFFFFFF:
            raise ConfigError("filter_bits must fit in 32 bits", "filter_bits")
        if self.fp_max is not None and (
                isinstance(self.fp_max, bool) or not isinstance(self.fp_max, (int, float))
                or math.isnan(self.fp_max) or self.fp_max <= 0):
            raise ConfigError(f"fp_max must be a positive number, got {self.fp_max!r}", "fp_max")

    @property
    def effective_k(self) -> int:
        return 1 if self.scheme == "bloom_single" else self.k

    @property
    def effective_fp_max(self) -> float:
        if self.fp_max is not None:
            return float(self.fp_max)
        return default_fp_max(self.effective_k)

    @property
    def is_bloom(self) -> bool:
        return self.scheme.startswith("bloom")

    def with_(self, **changes) -> "DetectorConfig":
        return replace(self, **changes)


# ---------------------------------------------------------------- counter

@dataclass
class _CounterRecord:
    high: int
    bitmap: int  # bit i set <=> counter (high - i) seen


@dataclass
class CounterWindow:
    """Sliding anti-replay window over 16-bit per-sender counters."""

    window: int = DEFAULT_WINDOW
    records: dict[Hashable, _CounterRecord] = field(default_factory=dict)
    wraps: int = 0

    def check(self, src: Hashable, ctr: int) -> Verdict:
        rec = self.records.get(src)
        if rec is not None and ctr == 0 and rec.high == CTR_MAX:
            # counter wrapped: forget the neighbor and start over
            del self.records[src]
            self.wraps += 1
            rec = None
        if rec is None:
            self.records[src] = _CounterRecord(ctr, 1)
            return Verdict.FRESH
        if ctr > rec.high:
            shift = ctr - rec.high
            rec.bitmap = ((rec.bitmap << shift) | 1) & ((1 << self.window) - 1)
            rec.high = ctr
            return Verdict.FRESH
        offset = rec.high - ctr
        if offset >= self.window:
            return Verdict.REPLAYED
        bit = 1 << offset
        if rec.bitmap & bit:
            return Verdict.REPLAYED
        rec.bitmap |= bit
        return Verdict.FRESH

    def seen(self, src: Hashable) -> set[int]:
        """Counters currently marked present for `src`."""
        rec = self.records.get(src)
        if rec is None:
            return set()
        return {rec.high - i for i in range(self.window) if rec.bitmap >> i & 1}

    def high(self, src: Hashable) -> int | None:
        rec = self.records.get(src)
        return None if rec is None else rec.high


# ------------------------------------------------------------ hash window

@dataclass
class HashWindow:
    """Per-neighbor ring of the W most recent accepted digests."""

    window: int = DEFAULT_WINDOW
    rings: dict[Hashable, deque] = field(default_factory=dict)

    def check_digest(self, neighbor: Hashable, digest: bytes) -> Verdict:
        ring = self.rings.get(neighbor)
        if ring is None:
            ring = self.rings[neighbor] = deque(maxlen=self.window)
        if digest in ring:
            return Verdict.REPLAYED
        ring.append(digest)
        return Verdict.FRESH


def _neighbor(p: Packet) -> Hashable:
    # Auth packets carry no source address; they share one ring
    return p.src if isinstance(p, PacketAE) else None


# --------------------------------------------------------------- detectors

class Detector:
    """Common interface: one verdict per delivered packet."""

    scheme: str

    def __init__(self, config: DetectorConfig):
        self.config = config

    def check(self, packet: Packet) -> Verdict:
        raise NotImplementedError

    @property
    def epoch_resets(self) -> int:
        return 0

    def neighbors(self) -> int:
        return 0


class CounterDetector(Detector):
    scheme = "counter"

    def __init__(self, config: DetectorConfig):
        super().__init__(config)
        self.state = CounterWindow(config.window)

    def check(self, packet: Packet) -> Verdict:
        src, ctr = struct.unpack(">HH", replay_tag(packet, self.scheme))
        return self.state.check(src, ctr)

    def neighbors(self) -> int:
        return len(self.state.records)


class HashWindowDetector(Detector):
    scheme = "hash_window"

    def __init__(self, config: DetectorConfig):
        super().__init__(config)
        self.state = HashWindow(config.window)

    def check(self, packet: Packet) -> Verdict:
        digest = sha1(replay_tag(packet, self.scheme))
        return self.state.check_digest(_neighbor(packet), digest)

    def neighbors(self) -> int:
        return len(self.state.rings)


class BloomDetector(Detector):
    """Single- or multi-hash Bloom replay filter with threshold epoch resets."""

    def __init__(self, config: DetectorConfig):
        super().__init__(config)
        self.scheme = config.scheme
        index_fn = sha1_index if config.scheme == "bloom_single" else family_indices
        self.filter = BloomFilter(config.filter_bits, config.effective_k, index_fn)
        self.fp_max = config.effective_fp_max

    def check(self, packet: Packet) -> Verdict:
        self.filter.maybe_reset(self.fp_max)
        tag = replay_tag(packet, self.scheme)
        return Verdict.REPLAYED if self.filter.query_insert(tag) else Verdict.FRESH

    @property
    def epoch_resets(self) -> int:
        return self.filter.epoch


_DETECTORS = {
    "counter": CounterDetector,
    "hash_window": HashWindowDetector,
    "bloom_single": BloomDetector,
    "bloom_multi": BloomDetector,
}


def make_detector(config: DetectorConfig) -> Detector:
    return _DETECTORS[config.scheme](config)


# -------------------------------------------------------------- accounting

def state_bytes(config: DetectorConfig, neighbors: int, ledger: bool = False) -> int:
    """Bytes of replay state a node keeps for `neighbors` peers.

    ``ledger=False`` counts the compact representation actually used here
    (2-byte high counter plus a W-bit bitmap per neighbor). ``ledger=True``
    counts one 2-byte counter per window slot, the figure comparable with
    per-slot table layouts. Hash windows and Bloom filters are the same in
    both views. Bloom state includes the 13-byte filter header.
    """
    if neighbors < 0:
        raise ConfigError(f"neighbors must be >= 0, got {neighbors}", "neighbors")
    w = config.window
    if config.scheme == "counter":
        per = COUNTER_SIZE * w if ledger else COUNTER_SIZE + (w + 7) // 8
        return neighbors * per
    if config.scheme == "hash_window":
        return neighbors * DIGEST_SIZE * w
    return HEADER_SIZE + (config.filter_bits + 7) // 8


def network_storage_overhead(B: int, n: int) -> int:
    """Total counter storage over a fully meshed network: ``B * n(n-1)/2``."""
    if B < 1 or n < 1:
        raise ConfigError(f"need B >= 1 and n >= 1, got B={B}, n={n}")
    return B * (n * (n - 1) // 2)


def fp_predicted(config: DetectorConfig) -> float:
    """Nominal false-positive rate: 2**-k for Bloom schemes, 0 otherwise."""
    return fp_approx(config.effective_k) if config.is_bloom else 0.0


def max_neighbors(config: DetectorConfig, ram_budget: int = RAM_BUDGET,
                  ledger: bool = True) -> int | None:
    """Largest neighbor count whose state fits in `ram_budget` bytes.

    Returns None when the state does not depend on neighbors and fits, and 0
    when even one neighbor does not fit.
    """
    if config.is_bloom:
        return None if state_bytes(config, 0) <= ram_budget else 0
    return ram_budget // state_bytes(config, 1, ledger)


def max_window(config: DetectorConfig, neighbors: int, ram_budget: int = RAM_BUDGET,
               ledger: bool = True) -> int:
    """Largest window size W whose state for `neighbors` peers fits in the budget."""
    if config.is_bloom:
        raise ConfigError("Bloom state does not depend on the window size", "scheme")
    lo, hi = 0, ram_budget * 8 + 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if state_bytes(config.with_(window=mid), neighbors, ledger) <= ram_budget:
            lo = mid
        else:
            hi = mid - 1
    return lo
