"""Deterministic unicast simulator with a straight-replay adversary.

Time is an abstract tick counter. On each tick, while sends remain, the
next flow in round-robin order emits one packet, then every delivery due on
that tick is processed in order ``(tick, genuine before replay, sequence)``.

Per tick the generator is drawn in this order:

1. send: payload bytes, MAC bytes, loss draw, and (if not lost) a
   displacement draw ``randint(0, reorder_D)``;
2. each genuine delivery: capture draw, and per scheduled replay a delay
   draw ``randint(*replay_delay)``.

Replays are byte-identical copies of genuine deliveries and bypass the loss
model. Ground truth is taken from this bookkeeping only, never from verdicts.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, fields, replace
from typing import Any, Iterable, Sequence, TextIO

from .errors import ConfigError
from .replay import DetectorConfig, Verdict, fp_predicted, make_detector, state_bytes
from .rng import XorShift64Star
from .wire import MAX_PAYLOAD, Packet, make_ae, make_auth

AM_TYPE = 0x04
MAX_NODES = 1 << 16
CTR_SPACE = 1 << 16
PACKET_FORMATS = ("ae", "auth")

SEND, DELIVER, DROP, CAPTURE, REPLAY = "send", "deliver", "drop", "capture", "replay-inject"


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_prob(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and 0.0 <= v <= 1.0


@dataclass(frozen=True)
class SimConfig:
    n_nodes: int = 10
    sends_per_node: int = 100
    p_loss: float = 0.0
    reorder_D: int = 0
    p_capture: float = 0.0
    replay_delay: tuple[int, int] = (1, 16)
    replays_per_capture: int = 1
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    seed: int = 0
    topology: tuple[tuple[int, int], ...] | None = None
    packet_format: str = "ae"
    payload_len: int = 8

    def __post_init__(self):
        for name in ("n_nodes", "sends_per_node", "reorder_D", "replays_per_capture",
                     "seed", "payload_len"):
            v = getattr(self, name)
            if not _is_int(v) or v < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {v!r}", name)
        for name in ("p_loss", "p_capture"):
            if not _is_prob(getattr(self, name)):
                raise ConfigError(f"{name} must be a probability in [0, 1], "
                                  f"got {getattr(self, name)!r}", name)
        if not 2 <= self.n_nodes <= MAX_NODES:
            raise ConfigError(f"n_nodes must be in 2..{MAX_NODES}, got {self.n_nodes}", "n_nodes")
        if self.seed >= 1 << 64:
            raise ConfigError("seed must fit in 64 bits", "seed")
        rd = self.replay_delay
        if (not isinstance(rd, (tuple, list)) or len(rd) != 2
                or not all(_is_int(v) and v >= 0 for v in rd) or rd[0] > rd[1]):
            raise ConfigError(f"replay_delay must be [min, max] with 0 <= min <= max, got {rd!r}",
                              "replay_delay")
        object.__setattr__(self, "replay_delay", tuple(rd))
        if not isinstance(self.detector, DetectorConfig):
            raise ConfigError("detector must be a DetectorConfig", "detector")
        if self.packet_format not in PACKET_FORMATS:
            raise ConfigError(f"packet_format must be one of {PACKET_FORMATS}, "
                              f"got {self.packet_format!r}", "packet_format")
        if self.payload_len > MAX_PAYLOAD:
            raise ConfigError(f"payload_len must be at most {MAX_PAYLOAD}", "payload_len")
        if self.packet_format == "auth" and self.detector.scheme == "counter":
            raise ConfigError("counter detection needs AE packets (Auth has no ctr field)",
                              "packet_format")
        if self.topology is not None:
            self._check_topology()
        per_node: dict[int, int] = {}
        for src, _ in self.flows():
            per_node[src] = per_node.get(src, 0) + self.sends_per_node
        if per_node and max(per_node.values()) > CTR_SPACE:
            raise ConfigError(f"a node would send more than {CTR_SPACE} packets; "
                              "16-bit counter wraparound is not simulated", "sends_per_node")

    def _check_topology(self) -> None:
        pairs = []
        for pair in self.topology:
            if (not isinstance(pair, (tuple, list)) or len(pair) != 2
                    or not all(_is_int(v) and 0 <= v < self.n_nodes for v in pair)
                    or pair[0] == pair[1]):
                raise ConfigError(f"topology entry {pair!r} is not a [src, dest] pair of "
                                  f"distinct nodes below n_nodes", "topology")
            pairs.append((pair[0], pair[1]))
        if len(set(pairs)) != len(pairs):
            raise ConfigError("topology contains duplicate pairs", "topology")
        object.__setattr__(self, "topology", tuple(pairs))

    def flows(self) -> list[tuple[int, int]]:
        """(src, dest) pairs; default is every node sending to sink node 0."""
        if self.topology is not None:
            return list(self.topology)
        return [(i, 0) for i in range(1, self.n_nodes)]

    def neighbor_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for _, dest in self.flows():
            counts[dest] = counts.get(dest, 0) + 1
        return counts

    def state_bytes(self, ledger: bool = False) -> int:
        """Replay state summed over all receiving nodes."""
        return sum(state_bytes(self.detector, n, ledger) for n in self.neighbor_counts().values())


@dataclass
class RunMetrics:
    sent: int = 0
    delivered: int = 0
    lost: int = 0
    replays_injected: int = 0
    replays_detected: int = 0
    false_positives: int = 0
    false_negatives: int = 0
    epoch_resets: int = 0
    state_bytes_bitmap: int = 0
    state_bytes_ledger: int = 0
    fp_predicted: float = 0.0


@dataclass(frozen=True)
class TraceEvent:
    index: int
    kind: str
    src: int
    dest: int
    ctr: int
    ground_truth: bool = False
    verdict: Verdict | None = None
    packet: Packet | None = field(default=None, compare=False, repr=False)

    def to_line(self) -> str:
        verdict = self.verdict.value if self.verdict is not None else "-"
        return "\t".join((str(self.index), self.kind, str(self.src), str(self.dest),
                          str(self.ctr), str(int(self.ground_truth)), verdict))


def run(cfg: SimConfig) -> tuple[RunMetrics, list[TraceEvent]]:
    rng = XorShift64Star(cfg.seed)
    flows = cfg.flows()
    detectors = {dest: make_detector(cfg.detector) for dest in cfg.neighbor_counts()}
    next_ctr = {src: 0 for src, _ in flows}
    total_sends = len(flows) * cfg.sends_per_node
    metrics = RunMetrics(
        state_bytes_bitmap=cfg.state_bytes(),
        state_bytes_ledger=cfg.state_bytes(ledger=True),
        fp_predicted=fp_predicted(cfg.detector),
    )
    trace: list[TraceEvent] = []
    # (tick, 0=genuine/1=replay, sequence, src, dest, ctr, packet)
    queue: list[tuple] = []
    replay_seq = 0

    tick = 0
    while tick < total_sends or queue:
        if tick < total_sends:
            src, dest = flows[tick % len(flows)]
            ctr = next_ctr[src]
            next_ctr[src] = ctr + 1
            payload = rng.randbytes(cfg.payload_len)
            mac = rng.randbytes(4)
            if cfg.packet_format == "ae":
                pkt = make_ae(dest, src, ctr, payload, AM_TYPE, mac)
            else:
                pkt = make_auth(dest, payload, AM_TYPE, mac)
            metrics.sent += 1
            trace.append(TraceEvent(tick, SEND, src, dest, ctr, packet=pkt))
            if rng.random() < cfg.p_loss:
                metrics.lost += 1
                trace.append(TraceEvent(tick, DROP, src, dest, ctr, packet=pkt))
            else:
                due = tick + rng.randint(0, cfg.reorder_D)
                heapq.heappush(queue, (due, 0, tick, src, dest, ctr, pkt))

        while queue and queue[0][0] == tick:
            _, is_replay, _, src, dest, ctr, pkt = heapq.heappop(queue)
            if is_replay:
                trace.append(TraceEvent(tick, REPLAY, src, dest, ctr, True, packet=pkt))
            verdict = detectors[dest].check(pkt)
            trace.append(TraceEvent(tick, DELIVER, src, dest, ctr, bool(is_replay), verdict, pkt))
            if is_replay:
                metrics.replays_injected += 1
                if verdict is Verdict.REPLAYED:
                    metrics.replays_detected += 1
                else:
                    metrics.false_negatives += 1
                continue
            metrics.delivered += 1
            if verdict is Verdict.REPLAYED:
                metrics.false_positives += 1
            if rng.random() < cfg.p_capture:
                trace.append(TraceEvent(tick, CAPTURE, src, dest, ctr, packet=pkt))
                for _ in range(cfg.replays_per_capture):
                    due = tick + rng.randint(*cfg.replay_delay)
                    heapq.heappush(queue, (due, 1, replay_seq, src, dest, ctr, pkt))
                    replay_seq += 1
        tick += 1

    metrics.epoch_resets = sum(d.epoch_resets for d in detectors.values())
    return metrics, trace


# ------------------------------------------------------------------ sweeps

SIM_AXES = frozenset(f.name for f in fields(SimConfig)) - {"detector", "topology"}
DETECTOR_AXES = frozenset(f.name for f in fields(DetectorConfig))


def with_value(cfg: SimConfig, axis: str, value: Any) -> SimConfig:
    if axis in DETECTOR_AXES:
        return replace(cfg, detector=replace(cfg.detector, **{axis: value}))
    if axis in SIM_AXES:
        return replace(cfg, **{axis: value})
    raise ConfigError(f"unknown sweep axis {axis!r}; choose from "
                      f"{sorted(SIM_AXES | DETECTOR_AXES)}", "axis")


def sweep_configs(base: SimConfig, axis: str, values: Sequence[Any]) -> list[SimConfig]:
    if axis not in SIM_AXES | DETECTOR_AXES:
        with_value(base, axis, None)  # raises
    out = []
    for i, value in enumerate(values):
        cfg = with_value(base, axis, value)
        if axis != "seed":
            cfg = replace(cfg, seed=(base.seed + i) & ((1 << 64) - 1))
        out.append(cfg)
    return out


def sweep(base: SimConfig, axis: str, values: Sequence[Any]) -> list[RunMetrics]:
    return [run(cfg)[0] for cfg in sweep_configs(base, axis, values)]


def write_trace(trace: Iterable[TraceEvent], fh: TextIO) -> None:
    for ev in trace:
        fh.write(ev.to_line() + "\n")
