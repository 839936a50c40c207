"""Command-line experiment runner.

A run is described by a flat ``key = value`` file (see ``presets/``) and
writes CSV: one row per SNR point and strategy (single source) or payoff
kind (multi source). ``SWIPT_WORKERS`` sets the number of worker processes.

Exit status: 0 on success, 2 on a configuration error, 3 on a numerical
failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .analytic import QuadratureError, approx_outage_random, exact_outage_random
from .channel import ScenarioParams
from .coalition import NotConvergedError, PayoffKind, four_source_layout
from .geometry import Disc, PPPConfig
from .montecarlo import (
    UNCONDITIONAL,
    Conditioning,
    estimate_multi_source_outage,
    estimate_outage_multi,
)
from .strategies import StrategyKind

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

SINGLE_HEADER = [
    "snr_db", "strategy", "runs", "seed",
    "outage_mc", "outage_stderr", "outage_exact", "outage_approx",
]
MULTI_HEADER = [
    "snr_db", "payoff_kind", "runs", "seed", "outage_mc", "outage_stderr", "mean_sweeps",
]
TRACE_HEADER = ["snr_db", "payoff_kind", "sweep", "mean_total_value"]


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class ExperimentConfig:
    scenario: str  # "single" or "multi"
    snr_start: float
    snr_stop: float
    snr_step: float
    rate: float
    eta: float = 0.5
    alpha: float = 2.0
    radius: float = 1.5
    distance: float = 10.0
    intensity: float = 1.0
    conditioning: Conditioning = UNCONDITIONAL
    strategies: list[StrategyKind] = field(default_factory=list)
    payoff: list[PayoffKind] = field(default_factory=list)
    relays: int = 8
    kappa: list[float] = field(default_factory=lambda: [0.001])
    trace: bool = False
    runs: int = 100_000
    seed: int = 0
    out: str | None = None

    def snr_points(self) -> list[float]:
        n = int(math.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9))
        return [self.snr_start + k * self.snr_step for k in range(n + 1)]

    def params(self, snr_db: float) -> ScenarioParams:
        return ScenarioParams.from_db(snr_db, rate=self.rate, alpha=self.alpha, eta=self.eta)


def _list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_PARSERS = {
    "scenario": str.strip,
    "snr_start": float,
    "snr_stop": float,
    "snr_step": float,
    "rate": float,
    "eta": float,
    "alpha": float,
    "radius": float,
    "distance": float,
    "intensity": float,
    "conditioning": Conditioning.parse,
    "strategies": lambda s: [StrategyKind(v) for v in _list(s)],
    "payoff": lambda s: [PayoffKind(v) for v in _list(s)],
    "relays": int,
    "kappa": lambda s: [float(v) for v in _list(s)],
    "trace": _bool,
    "runs": int,
    "seed": int,
    "out": str.strip,
}
_REQUIRED = ("scenario", "snr_start", "snr_stop", "snr_step", "rate")


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc).splitlines()[0]) from None
    raw = dict(cp["run"])
    values = {}
    for key, text_value in raw.items():
        if key not in _PARSERS:
            raise ConfigError(key, "unknown key")
        try:
            values[key] = _PARSERS[key](text_value)
        except ValueError as exc:
            raise ConfigError(key, f"bad value {text_value!r} ({exc})") from None
    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(key, "missing required key")
    cfg = ExperimentConfig(**values)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.scenario not in ("single", "multi"):
        raise ConfigError("scenario", f"expected 'single' or 'multi', got {cfg.scenario!r}")
    if not cfg.snr_step > 0:
        raise ConfigError("snr_step", "must be > 0")
    if cfg.snr_stop < cfg.snr_start:
        raise ConfigError("snr_stop", "must be >= snr_start")
    if cfg.runs < 1 or (cfg.scenario == "multi" and cfg.runs < 2):
        raise ConfigError("runs", "too few runs")
    checks = {
        "rate": cfg.rate >= 0,
        "eta": 0 < cfg.eta <= 1,
        "alpha": cfg.alpha > 0,
        "radius": cfg.radius > 0,
        "distance": cfg.distance > 0,
        "intensity": cfg.intensity >= 0,
        "relays": cfg.relays >= 0,
        "kappa": bool(cfg.kappa) and all(k >= 0 for k in cfg.kappa),
    }
    for key, ok in checks.items():
        if not ok:
            raise ConfigError(key, "value out of range")
    if cfg.scenario == "single":
        if not cfg.strategies:
            raise ConfigError("strategies", "at least one strategy required")
        if cfg.conditioning.kind == "fixed" and cfg.conditioning.count == 0:
            if any(s.needs_relay for s in cfg.strategies):
                raise ConfigError("conditioning", "fixed:0 leaves no relay for a relaying strategy")
    elif not cfg.payoff:
        raise ConfigError("payoff", "at least one payoff kind required")


def load_preset(name: str) -> str:
    path = resources.files("swiptrelay") / "presets" / f"{name}.cfg"
    if not path.is_file():
        raise ConfigError("--preset", f"no preset named {name!r} (have {', '.join(preset_names())})")
    return path.read_text()


def preset_names() -> list[str]:
    folder = resources.files("swiptrelay") / "presets"
    return sorted(p.name[:-4] for p in folder.iterdir() if p.name.endswith(".cfg"))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _finite(*values) -> None:
    for v in values:
        if v is not None and not math.isfinite(v):
            raise FloatingPointError(f"non-finite result {v!r}")


def run_single(cfg: ExperimentConfig, workers: int | None = None) -> list[list]:
    disc = Disc(cfg.radius, cfg.distance)
    ppp = PPPConfig(cfg.intensity)
    given = cfg.conditioning.kind != "unconditional"
    rows = []
    for snr in cfg.snr_points():
        params = cfg.params(snr)
        est = estimate_outage_multi(
            params, disc, ppp, cfg.strategies, cfg.conditioning, cfg.runs, cfg.seed,
            workers=workers,
        )
        for s in cfg.strategies:
            exact = approx = None
            if s is StrategyKind.RANDOM_RELAY and cfg.alpha == 2:
                exact = exact_outage_random(params, disc, ppp, given_relay=given).value
                approx = approx_outage_random(params, disc, ppp, given_relay=given).value
            e = est[s]
            _finite(e.p_hat, e.stderr, exact, approx)
            rows.append([snr, s.value, cfg.runs, cfg.seed, e.p_hat, e.stderr, exact, approx])
    return rows


def run_multi(cfg: ExperimentConfig, kappa: float, workers: int | None = None):
    layout = four_source_layout(cfg.radius, cfg.distance)
    rows, trace = [], []
    for snr in cfg.snr_points():
        res = estimate_multi_source_outage(
            layout, cfg.params(snr), cfg.relays, kappa, cfg.payoff, cfg.runs, cfg.seed,
            workers=workers,
        )
        for k in cfg.payoff:
            r = res[k]
            _finite(r.outage.p_hat, r.outage.stderr, r.mean_sweeps, *r.mean_trace)
            rows.append([snr, k.value, cfg.runs, cfg.seed, r.outage.p_hat, r.outage.stderr, r.mean_sweeps])
            trace.extend([snr, k.value, i, float(v)] for i, v in enumerate(r.mean_trace))
    return rows, trace


def _write(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _with_suffix(out: Path, suffix: str) -> Path:
    return out.with_name(f"{out.stem}{suffix}{out.suffix or '.csv'}")


def run_experiment(cfg: ExperimentConfig, out: Path, workers: int | None = None) -> list[Path]:
    """Run ``cfg`` and write its CSV files; returns the paths written."""
    if cfg.scenario == "single":
        _write(out, SINGLE_HEADER, run_single(cfg, workers))
        return [out]
    written = []
    for kappa in cfg.kappa:
        target = out if len(cfg.kappa) == 1 else _with_suffix(out, f"_kappa{kappa!r}")
        rows, trace = run_multi(cfg, kappa, workers)
        _write(target, MULTI_HEADER, rows)
        written.append(target)
        if cfg.trace:
            tpath = _with_suffix(target, "_trace")
            _write(tpath, TRACE_HEADER, trace)
            written.append(tpath)
    return written


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swiptrelay", description=__doc__.splitlines()[0])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="key = value experiment file")
    src.add_argument("--preset", help="bundled configuration name")
    p.add_argument("--out", type=Path, help="output CSV path")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--runs", type=int, help="override the configured run count")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ConfigError("--config", str(exc)) from None
            stem = args.config.stem
        else:
            text = load_preset(args.preset)
            stem = args.preset
        cfg = parse_config(text)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.runs is not None:
            cfg.runs = args.runs
        validate(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or Path(cfg.out or f"{stem}.csv")
    try:
        paths = run_experiment(cfg, out)
    except (QuadratureError, FloatingPointError, NotConvergedError, ZeroDivisionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
