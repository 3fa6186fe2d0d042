"""Command line entry point: ``replayguard run | calc | fig19``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Sequence

from . import bloom
from .errors import ConfigError
from .replay import SCHEMES, DetectorConfig, network_storage_overhead, state_bytes
from .rng import XorShift64Star
from .simnet import RunMetrics, SimConfig, run, sweep_configs, write_trace

EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2
SEED_ENV = "REPLAYGUARD_SEED"

CSV_COLUMNS = (
    "scheme", "n_nodes", "window", "filter_bits", "k", "seed", "sent", "delivered",
    "replays_injected", "replays_detected", "false_positives", "false_negatives",
    "epoch_resets", "state_bytes_bitmap", "state_bytes_ledger", "fp_predicted",
)
FIG19_COLUMNS = ("k", "fp_empirical", "fp_predicted", "fp_exact", "filter_bits",
                 "inserted", "probes")

SIM_KEYS = {f.name for f in fields(SimConfig)}
DETECTOR_KEYS = {f.name for f in fields(DetectorConfig)}
EXTRA_KEYS = {"sweep", "output", "trace"}


@dataclass
class Experiment:
    config: SimConfig
    axis: str | None = None
    values: list | None = None
    output: Path | None = None
    trace: Path | None = None

    def configs(self) -> list[SimConfig]:
        if self.axis is None:
            return [self.config]
        return sweep_configs(self.config, self.axis, self.values)


class ConfigFileError(Exception):
    def __init__(self, path: Path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")


def _line_of(text: str, key: str | None) -> int:
    if key:
        m = re.search(r'"%s"\s*:' % re.escape(key), text)
        if m:
            return text.count("\n", 0, m.start()) + 1
    return 1


def load_experiment(path: Path, seed_override: str | None = None) -> Experiment:
    """Parse and fully validate an experiment file, sweep included."""
    text = path.read_text(encoding="utf-8")

    def fail(key: str | None, message: str):
        raise ConfigFileError(path, _line_of(text, key), message)

    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFileError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        fail(None, "top level must be a JSON object")
    for key in raw:
        if key not in SIM_KEYS | EXTRA_KEYS:
            fail(key, f"unknown key {key!r}")
    det_raw = raw.get("detector", {})
    if not isinstance(det_raw, dict):
        fail("detector", "detector must be an object")
    for key in det_raw:
        if key not in DETECTOR_KEYS:
            fail(key, f"unknown detector key {key!r}")

    sim_kwargs = {k: v for k, v in raw.items() if k in SIM_KEYS and k != "detector"}
    if seed_override is not None:
        try:
            sim_kwargs["seed"] = int(seed_override, 0)
        except ValueError:
            fail(None, f"{SEED_ENV}={seed_override!r} is not an integer")
    if "topology" in sim_kwargs and sim_kwargs["topology"] is not None:
        topo = sim_kwargs["topology"]
        if not isinstance(topo, list):
            fail("topology", "topology must be a list of [src, dest] pairs")
        sim_kwargs["topology"] = tuple(tuple(p) if isinstance(p, list) else p for p in topo)
    if isinstance(sim_kwargs.get("replay_delay"), list):
        sim_kwargs["replay_delay"] = tuple(sim_kwargs["replay_delay"])
    try:
        detector = DetectorConfig(**det_raw)
    except ConfigError as exc:
        fail(exc.field, str(exc))
    try:
        config = SimConfig(detector=detector, **sim_kwargs)
    except ConfigError as exc:
        fail(exc.field, str(exc))

    exp = Experiment(config)
    base = path.parent
    for key in ("output", "trace"):
        if raw.get(key) is not None:
            if not isinstance(raw[key], str):
                fail(key, f"{key} must be a path string")
            setattr(exp, key, base / raw[key])
    sweep = raw.get("sweep")
    if sweep is not None:
        if not isinstance(sweep, dict) or set(sweep) != {"axis", "values"}:
            fail("sweep", 'sweep must be an object with exactly "axis" and "values"')
        if not isinstance(sweep["values"], list):
            fail("sweep", "sweep values must be a list")
        exp.axis, exp.values = sweep["axis"], sweep["values"]
        try:
            exp.configs()
        except ConfigError as exc:
            fail("sweep", f"sweep {exp.axis}: {exc}")
    return exp


def fmt(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def csv_row(cfg: SimConfig, m: RunMetrics) -> list[str]:
    d = cfg.detector
    values = {
        "scheme": d.scheme, "n_nodes": cfg.n_nodes, "window": d.window,
        "filter_bits": d.filter_bits, "k": d.effective_k, "seed": cfg.seed,
    }
    values.update(vars(m))
    return [fmt(values[c]) for c in CSV_COLUMNS]


def render_csv(rows: Sequence[tuple[SimConfig, RunMetrics]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for cfg, m in rows:
        w.writerow(csv_row(cfg, m))
    return buf.getvalue()


def _trace_path(base: Path, index: int, count: int) -> Path:
    if count == 1:
        return base
    return base.with_name(f"{base.stem}_{index}{base.suffix}")


def cmd_run(args: argparse.Namespace) -> int:
    path = Path(args.config)
    try:
        exp = load_experiment(path, os.environ.get(SEED_ENV))
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except ConfigFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    output = Path(args.output) if args.output else exp.output
    trace_base = Path(args.trace) if args.trace else exp.trace

    configs = exp.configs()
    rows = []
    try:
        for i, cfg in enumerate(configs):
            metrics, trace = run(cfg)
            rows.append((cfg, metrics))
            if trace_base is not None:
                with open(_trace_path(trace_base, i, len(configs)), "w",
                          encoding="utf-8", newline="\n") as fh:
                    write_trace(trace, fh)
        text = render_csv(rows)
        if output is None:
            sys.stdout.write(text)
        else:
            output.write_text(text, encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _show(value: int | float) -> str:
    short = f"{value:#.4g}" if isinstance(value, float) else f"{value:.4g}"
    return f"{value!r} ({short})"


def cmd_calc(args: argparse.Namespace) -> int:
    need = {
        "eq4": ("B", "n"),
        "fp_exact": ("m", "k", "p"),
        "fp_approx": ("k",),
        "state_bytes": ("scheme", "neighbors"),
    }[args.kind]
    missing = [f"--{n}" for n in need if getattr(args, n) is None]
    if missing:
        print(f"error: calc {args.kind} needs {', '.join(missing)}", file=sys.stderr)
        return EXIT_INVALID
    try:
        if args.kind == "eq4":
            value = network_storage_overhead(args.B, args.n)
        elif args.kind == "fp_exact":
            if args.m < 1 or args.k < 1 or args.p < 0:
                raise ConfigError("need m >= 1, k >= 1, p >= 0")
            value = bloom.fp_exact(args.m, args.k, args.p)
        elif args.kind == "fp_approx":
            if args.k < 1:
                raise ConfigError("need k >= 1")
            value = bloom.fp_approx(args.k)
        else:
            cfg = DetectorConfig(args.scheme, window=args.window or 8,
                                 filter_bits=args.m or bloom.DEFAULT_BITS, k=args.k or 8)
            value = state_bytes(cfg, args.neighbors, ledger=args.ledger)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(_show(value))
    return EXIT_OK


def fig19_rows(ks: Sequence[int] = range(1, 9), m: int = 131071, probes: int = 100_000,
               seed: int = 19) -> list[dict]:
    """False-positive rate against hash count at the half-full operating point."""
    rows = []
    for k in ks:
        inserted = bloom.half_fill_insertions(m, k)
        hits, _ = bloom.measure_fp_rate(m, k, inserted, probes, XorShift64Star(seed + k))
        rows.append({
            "k": k,
            "fp_empirical": hits / probes,
            "fp_predicted": bloom.fp_approx(k),
            "fp_exact": bloom.fp_exact(m, k, inserted),
            "filter_bits": m,
            "inserted": inserted,
            "probes": probes,
        })
    return rows


def cmd_fig19(args: argparse.Namespace) -> int:
    if args.probes < 1 or args.bits < 2:
        print("error: need --probes >= 1 and --bits >= 2", file=sys.stderr)
        return EXIT_INVALID
    rows = fig19_rows(m=args.bits, probes=args.probes, seed=args.seed)
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FIG19_COLUMNS)
            for row in rows:
                w.writerow([fmt(row[c]) for c in FIG19_COLUMNS])
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for row in rows:
        print(f"k={row['k']}  empirical={row['fp_empirical']:.6g}  "
              f"predicted={row['fp_predicted']!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="replayguard",
                                     description="Link-layer replay detection experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a simulation or sweep from a JSON config")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="CSV path (overrides the config; default stdout)")
    p.add_argument("--trace", help="trace TSV path (overrides the config)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("calc", help="evaluate an analytic formula")
    p.add_argument("kind", choices=("eq4", "fp_exact", "fp_approx", "state_bytes"))
    p.add_argument("--B", type=int, help="bytes per counter")
    p.add_argument("--n", type=int, help="node count")
    p.add_argument("--m", type=int, help="filter bits")
    p.add_argument("--k", type=int, help="hash count")
    p.add_argument("--p", type=int, help="insertions")
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--neighbors", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--ledger", action="store_true",
                   help="count 2 bytes per counter window slot")
    p.set_defaults(func=cmd_calc)

    p = sub.add_parser("fig19", help="false-positive rate against hash count")
    p.add_argument("out")
    p.add_argument("--probes", type=int, default=100_000)
    p.add_argument("--bits", type=int, default=131071)
    p.add_argument("--seed", type=int, default=19)
    p.set_defaults(func=cmd_fig19)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
