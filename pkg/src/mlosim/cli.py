"""Command-line batch runner.

    mlosim --experiment random-load --seed 7 --out results/
    mlosim --config my.yaml --validate-only
"""

from __future__ import annotations

import argparse
import logging
import sys

from .exceptions import ConfigError
from .experiments import PRESETS, load_experiment, preset, run_experiment, validate_config


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mlosim", description="Multi-link WLAN flow-level experiment runner")
    p.add_argument("--config", help="YAML/JSON experiment or simulation config")
    p.add_argument("--experiment", choices=PRESETS[:-1], help="named preset (ignored when --config names one)")
    p.add_argument("--seed", type=int, help="master seed (u64)")
    p.add_argument("--parallelism", type=int, help="worker processes")
    p.add_argument("--runs", type=int, help="override runs per sweep point")
    p.add_argument("--out", help="output directory")
    p.add_argument("--validate-only", action="store_true", help="check the config and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.validate_only:
        if not args.config:
            print("error: --validate-only needs --config", file=sys.stderr)
            return 2
        errors = validate_config(args.config)
        for e in errors:
            print(f"error: {e}", file=sys.stderr)
        if not errors:
            print(f"{args.config}: ok")
        return 1 if errors else 0

    try:
        if args.config:
            spec = load_experiment(args.config)
        elif args.experiment:
            spec = preset(args.experiment)
        else:
            print("error: give --config or --experiment", file=sys.stderr)
            return 2
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError(f"--seed must be an unsigned 64-bit integer, got {args.seed}")
            spec.seed = args.seed
        if args.parallelism is not None:
            if args.parallelism < 1:
                raise ConfigError("--parallelism must be >= 1")
            spec.parallelism = args.parallelism
        if args.runs is not None:
            if args.runs < 1:
                raise ConfigError("--runs must be >= 1")
            spec.runs_per_point = args.runs
        result = run_experiment(spec, out=args.out)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return 2

    n_fail = len(result["failures"])
    print(f"{spec.name}: {spec.n_simulations - n_fail}/{spec.n_simulations} runs ok -> {result['out']}")
    for f in result["failures"]:
        print(f"failed: point {f['point']} {f['policy']} run {f['run']} (seed {f['seed']}): {f['error']}",
              file=sys.stderr)
    return 1 if n_fail else 0


if __name__ == "__main__":
    sys.exit(main())
