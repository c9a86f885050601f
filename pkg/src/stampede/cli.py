"""Command line entry point: ``stampede <subcommand> --config PATH ...``."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, RouteConfig, SwarmConfig, load_config
from .harness import cmd_compare, cmd_route_run, cmd_swarm_run, cmd_sweep


def parse_seeds(text: str) -> list:
    """``N..M`` (inclusive), ``N,M,...`` or a single ``N``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}; expected N..M or N,M,...") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stampede", description="Swarm phase and fleet routing experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("swarm-run", help="one seeded swarm run -> timeseries.csv, summary.json")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")

    s = sub.add_parser("sweep", help="parameter grid x seeds -> sweep.csv")
    s.add_argument("--config", required=True)
    s.add_argument("--param", required=True, help="dotted config path, e.g. params.sih_radius")
    s.add_argument("--from", dest="start", type=float, required=True)
    s.add_argument("--to", dest="stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--seeds", type=parse_seeds)
    s.add_argument("--out")
    s.add_argument("--workers", type=int, default=1)

    s = sub.add_parser("route-run", help="one seeded fleet run -> events.csv, summary.json")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")

    s = sub.add_parser("compare", help="paired control/treatment runs -> compare.csv, summary.json")
    s.add_argument("--config", required=True, help="control config")
    s.add_argument("--treatment", required=True, help="treatment config")
    s.add_argument("--seeds", type=parse_seeds)
    s.add_argument("--out")
    s.add_argument("--workers", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "swarm-run":
            if not isinstance(cfg, SwarmConfig):
                raise ConfigError("kind: swarm-run needs a swarm config")
            doc = cmd_swarm_run(cfg, args.seed, args.out)
            print(f"final phase {doc['summary']['final_phase']} -> {args.out or cfg.out}")
        elif args.command == "route-run":
            if not isinstance(cfg, RouteConfig):
                raise ConfigError("kind: route-run needs a route config")
            doc = cmd_route_run(cfg, args.seed, args.out)
            print(f"destroyed {doc['summary']['destroyed']} -> {args.out or cfg.out}")
        elif args.command == "sweep":
            rows = cmd_sweep(cfg, args.param, args.start, args.stop, args.steps,
                             args.seeds, args.out, args.workers)
            print(f"{len(rows)} runs -> {args.out or cfg.out}")
        else:
            treatment = load_config(args.treatment)
            doc = cmd_compare(cfg, treatment, args.seeds, args.out, args.workers)
            for k, v in doc["summary"].items():
                print(f"{k}: {v}")
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
