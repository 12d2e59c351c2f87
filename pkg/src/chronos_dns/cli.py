"""Command-line interface.

    chronos-dns run   --config paper_attack --seed 7 --out out/
    chronos-dns run   --config paper_attack --trials 100000 --out out/
    chronos-dns sweep --config baseline --p 0.1,0.5 --m 8,24,89 --trials 2000 --out out/
    chronos-dns wire  --qname pool.ntp.org --mtu 1500 [--no-edns] [--json]

Exit status: 0 success, 1 usage/config error, 2 domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .adversary import AttackStrategy, k_max
from .config import load_config
from .dns_model import A_RECORD_SIZE, WireParams, encoded_size, max_a_records
from .errors import ConfigError, DomainError
from .report import outcome_dict, stats_dict, sweep_csv, timeline_csv, to_json
from .sim_engine import (
    ScenarioConfig,
    analytic_capture_probability,
    expected_capture,
    monte_carlo,
    run_scenario,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2

DEFAULT_SWEEP_TRIALS = 1000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _number_list(kind):
    def parse(text: str) -> list:
        try:
            values = [kind(part) for part in text.split(",") if part.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a comma-separated list: {text!r}") from None
        return values

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chronos-dns", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def scenario_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="YAML file or preset name")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--overwrite", action="store_true", help="replace existing report files")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for trials")

    run = sub.add_parser("run", help="run one scenario, or Monte Carlo with --trials")
    scenario_args(run)
    run.add_argument("--trials", type=int, help="run this many Monte Carlo trials")

    sweep = sub.add_parser("sweep", help="Monte Carlo over a grid of p and M values")
    scenario_args(sweep)
    sweep.add_argument("--trials", type=int, default=DEFAULT_SWEEP_TRIALS)
    sweep.add_argument("--p", type=_number_list(float), required=True, help="e.g. 0.05,0.1")
    sweep.add_argument("--m", type=_number_list(int), required=True, help="payload sizes, e.g. 8,24,89")

    wire = sub.add_parser("wire", help="DNS response size and A-record capacity")
    wire.add_argument("--qname", default="pool.ntp.org")
    wire.add_argument("--mtu", type=int, default=1500)
    wire.add_argument("--edns", action=argparse.BooleanOptionalAction, default=True)
    wire.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def _prepare_out(out: Path, names: Sequence[str], overwrite: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    existing = [n for n in names if (out / n).exists()]
    if existing and not overwrite:
        raise UsageError(f"{out / existing[0]} exists; pass --overwrite to replace it")


def _load(args) -> ScenarioConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    return config


def cmd_run(args) -> int:
    config = _load(args)
    names = ["timeline.csv", "outcome.json"]
    if args.trials is not None:
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        names.append("stats.json")
    _prepare_out(args.out, names, args.overwrite)

    outcome = run_scenario(config)
    stats = None
    if args.trials is not None:
        stats = monte_carlo(config, args.trials, jobs=args.jobs)

    (args.out / "timeline.csv").write_text(timeline_csv(outcome.timeline))
    (args.out / "outcome.json").write_text(to_json(outcome_dict(config, outcome)))
    if stats is not None:
        analytic = expected_capture(config)
        (args.out / "stats.json").write_text(to_json(stats_dict(config, stats, analytic)))

    comp = outcome.final_composition
    print(
        f"Pool of {comp.total} servers after {config.schedule.query_count} queries: "
        f"{comp.benign} benign, {comp.malicious} malicious "
        f"(attacker fraction {comp.attacker_fraction:.6f}); pool "
        f"{'CAPTURED' if outcome.pool_captured else 'not captured'}. "
        f"Clock shift {outcome.achieved_shift:+.3f} ms "
        f"({'attack succeeded' if outcome.shift_achieved else 'attack failed'})."
    )
    if stats is not None:
        low, high = stats.wilson_95_interval
        print(
            f"Monte Carlo, {stats.trials} trials: capture rate {stats.capture_rate:.6f} "
            f"(95% Wilson [{low:.6f}, {high:.6f}], closed form {analytic:.6f}), "
            f"mean shift {stats.mean_shift:+.3f} ms."
        )
    print(f"Reports written to {args.out}/")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.p or not args.m:
        raise UsageError("sweep grid is empty: give at least one --p and one --m value")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    config = _load(args)
    _prepare_out(args.out, ["sweep.csv"], args.overwrite)

    rows = []
    for p in sorted(set(args.p)):
        for M in sorted(set(args.m)):
            payload = replace(config.strategy.payload, address_count=M)
            strategy = AttackStrategy.bernoulli(
                p, payload, mechanism_tag=config.strategy.mechanism_tag
            )
            cfg = replace(config, strategy=strategy)
            stats = monte_carlo(cfg, args.trials, jobs=args.jobs)
            rows.append(
                {
                    "p": p,
                    "M": M,
                    "k_max": k_max(M, threshold=cfg.threshold),
                    "analytic_capture": analytic_capture_probability(
                        p, M, cfg.schedule.query_count, threshold=cfg.threshold
                    ),
                    "empirical_capture": stats.capture_rate,
                    "mean_shift_ms": stats.mean_shift,
                    "trials": stats.trials,
                }
            )

    text = sweep_csv(rows)
    (args.out / "sweep.csv").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_wire(args) -> int:
    params = WireParams(mtu=args.mtu, qname=args.qname, edns=args.edns)
    count = max_a_records(params)
    info = {
        "qname": params.qname,
        "mtu": params.mtu,
        "edns": params.edns,
        "payload_budget": params.payload_budget,
        "empty_response_size": encoded_size(params.qname, 0, params.edns),
        "per_record_size": A_RECORD_SIZE,
        "max_a_records": count,
        "response_size_at_max": encoded_size(params.qname, count, params.edns),
    }
    if args.json:
        print(json.dumps(info, indent=2))
    else:
        width = max(map(len, info))
        for key, value in info.items():
            print(f"{key:<{width}}  {value}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "wire": cmd_wire}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
