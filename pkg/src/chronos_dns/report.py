"""Serialisation of outcomes and statistics to the CSV/JSON report files."""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable

from .adversary import k_max
from .config import config_to_dict
from .pool_gen import PoolTimeline
from .sim_engine import MonteCarloStats, ScenarioConfig, ScenarioOutcome

TIMELINE_HEADER = (
    "query_index",
    "time_s",
    "origin",
    "new_addresses",
    "cum_benign",
    "cum_malicious",
    "attacker_fraction",
)
SWEEP_HEADER = ("p", "M", "k_max", "analytic_capture", "empirical_capture", "mean_shift_ms", "trials")


def _ratio(x: float) -> str:
    return f"{x:.6f}"


def _csv_text(header: Iterable[str], rows: Iterable[Iterable[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def timeline_csv(timeline: PoolTimeline) -> str:
    return _csv_text(
        TIMELINE_HEADER,
        (
            (
                r.query_index,
                r.time,
                r.origin.value,
                r.new_addresses,
                r.cum_benign,
                r.cum_malicious,
                _ratio(r.attacker_fraction),
            )
            for r in timeline
        ),
    )


def outcome_dict(config: ScenarioConfig, outcome: ScenarioOutcome) -> dict[str, Any]:
    comp = outcome.final_composition
    return {
        "config": config_to_dict(config),
        "final_composition": {
            "benign": comp.benign,
            "malicious": comp.malicious,
            "total": comp.total,
            "attacker_fraction": comp.attacker_fraction,
        },
        "pool_captured": outcome.pool_captured,
        "poisoned_at": outcome.poisoned_at,
        "k_max": k_max(config.strategy.payload.address_count, threshold=config.threshold),
        "clock_estimates": [
            {
                "value_ms": e.value,
                "survivors": e.survivors,
                "discarded_low": e.discarded_low,
                "discarded_high": e.discarded_high,
            }
            for e in outcome.clock_estimates
        ],
        "achieved_shift_ms": outcome.achieved_shift,
        "shift_achieved": outcome.shift_achieved,
        "timeline": [
            {
                "query_index": r.query_index,
                "time_s": r.time,
                "origin": r.origin.value,
                "rejected": r.rejected.value if r.rejected else None,
                "new_addresses": r.new_addresses,
                "cum_benign": r.cum_benign,
                "cum_malicious": r.cum_malicious,
                "attacker_fraction": r.attacker_fraction,
            }
            for r in outcome.timeline
        ],
    }


def stats_dict(config: ScenarioConfig, stats: MonteCarloStats, analytic: float) -> dict[str, Any]:
    low, high = stats.wilson_95_interval
    return {
        "seed": config.seed,
        "strategy": config.strategy.mode.value,
        "p": config.strategy.p,
        "M": config.strategy.payload.address_count,
        "k_max": k_max(config.strategy.payload.address_count, threshold=config.threshold),
        "trials": stats.trials,
        "capture_successes": stats.capture_successes,
        "capture_rate": stats.capture_rate,
        "shift_success_rate": stats.shift_success_rate,
        "mean_shift_ms": stats.mean_shift,
        "wilson_95_interval": [low, high],
        "analytic_capture": analytic,
    }


def to_json(data: dict[str, Any]) -> str:
    return json.dumps(data, indent=2) + "\n"


def sweep_csv(rows: list[dict[str, Any]]) -> str:
    return _csv_text(
        SWEEP_HEADER,
        (
            (
                repr(row["p"]),
                row["M"],
                row["k_max"],
                _ratio(row["analytic_capture"]),
                _ratio(row["empirical_capture"]),
                f"{row['mean_shift_ms']:.3f}",
                row["trials"],
            )
            for row in rows
        ),
    )
