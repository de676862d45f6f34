"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .environments import ConvergenceError
from .gp import NumericalDegeneracyError
from .harness import aggregate_directory, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def preset_names() -> list[str]:
    files = resources.files("wsparq").joinpath("presets").iterdir()
    return sorted(p.name[:-5] for p in files if p.name.endswith(".json"))


def load_preset(name: str) -> ExperimentConfig:
    if name not in preset_names():
        raise ConfigError([("<preset>", f"unknown preset {name!r}; have {preset_names()}")])
    text = resources.files("wsparq").joinpath("presets", f"{name}.json").read_text()
    return parse_config(json.loads(text))


def _resolve_config(ref: str) -> ExperimentConfig:
    # a bare preset name is accepted when no file of that name exists
    if not Path(ref).exists() and ref in preset_names():
        return load_preset(ref)
    return load_config(ref)


def _csv(kind):
    def parse(text: str):
        try:
            return [kind(s.strip()) for s in text.split(",") if s.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    data = config.model_dump(mode="json")
    if args.algos:
        known = {a["name"]: a for a in data["algorithms"]}
        missing = [a for a in args.algos if a not in known]
        if missing:
            raise ConfigError([("algorithms", f"not in config: {missing}")])
        data["algorithms"] = [known[a] for a in args.algos]
    if args.seeds:
        data["seeds"] = args.seeds
    if args.out:
        data["output_dir"] = args.out
    return parse_config(data)


def _cmd_run(args) -> int:
    config = _apply_overrides(_resolve_config(args.config), args)
    result = run_experiment(config, threads=args.threads)
    for name, s in result.manifest["summary"].items():
        print(f"{name:16s} R_T mean {s['mean_R_T']:.4f} std {s['std_R_T']:.4f} "
              f"N_T mean {s['mean_N_T']:.1f}")
    print(f"wrote {result.out_dir}")
    return EXIT_OK


def _cmd_aggregate(args) -> int:
    run_dir = Path(args.input)
    if not (run_dir / "manifest.json").exists():
        raise ConfigError([("--in", f"{run_dir} has no manifest.json")])
    for name, agg in aggregate_directory(run_dir).items():
        print(f"{name:16s} runs {agg.n_runs} R_T mean {agg.mean_R[-1]:.4f} std {agg.std_R[-1]:.4f}")
    return EXIT_OK


def _cmd_presets(args) -> int:
    for name in preset_names():
        cfg = load_preset(name)
        algos = ",".join(a.name for a in cfg.algorithms)
        print(f"{name:12s} T={cfg.T} seeds={len(cfg.seeds)} algorithms={algos}  {cfg.description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsparq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config or preset name")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output directory (overrides output_dir)")
    run.add_argument("--algos", type=_csv(str), help="comma-separated algorithm names to keep")
    run.add_argument("--seeds", type=_csv(int), help="comma-separated seed indices")
    run.add_argument("--threads", type=int, default=1)
    run.set_defaults(func=_cmd_run)

    agg = sub.add_parser("aggregate", help="recompute aggregates from persisted traces")
    agg.add_argument("--in", dest="input", required=True)
    agg.set_defaults(func=_cmd_aggregate)

    presets = sub.add_parser("presets", help="inspect shipped presets")
    presets.add_argument("action", choices=["list"])
    presets.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        for loc, msg in exc.errors:
            print(f"config error: {loc}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalDegeneracyError, ConvergenceError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
