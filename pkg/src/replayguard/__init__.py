"""Link-layer replay protection: counter windows, hash windows and Bloom filters."""

from .bloom import BloomFilter, fp_approx, fp_exact, p_zero
from .errors import ConfigError, FormatError, ReplayGuardError, UnsupportedFormatError
from .hashfns import FAMILY, family_indices, hash32, sha1
from .replay import (
    DetectorConfig,
    Verdict,
    make_detector,
    network_storage_overhead,
    state_bytes,
)
from .simnet import RunMetrics, SimConfig, TraceEvent, run, sweep
from .wire import (
    PacketAE,
    PacketAuth,
    decode_ae,
    decode_auth,
    encode_ae,
    encode_auth,
    replay_tag,
)

__version__ = "0.1.0"
