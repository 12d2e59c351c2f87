"""Scenario execution, Monte Carlo estimation and the closed-form capture probability."""

from __future__ import annotations

import hashlib
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

from .adversary import AttackStrategy, StrategyMode, Threshold, is_captured, k_max
from .chronos_core import ClockEstimate, SyncConfig, sync_round
from .dns_model import BENIGN_PER_RESPONSE, BENIGN_TTL_S, BenignUniverse, MitigationPolicy, ResolverState
from .errors import DomainError
from .pool_gen import Composition, PoolTimeline, QuerySchedule, generate_pool, pool_composition

WILSON_Z_95 = 1.959963984540054
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ScenarioConfig:
    schedule: QuerySchedule = field(default_factory=QuerySchedule)
    strategy: AttackStrategy = field(default_factory=AttackStrategy)
    policy: MitigationPolicy = field(default_factory=MitigationPolicy)
    sync: SyncConfig = field(default_factory=SyncConfig)
    # None selects the "distinct" benign mode.
    benign_universe_size: Optional[int] = None
    sync_rounds: int = 1
    seed: int = 0
    threshold: Threshold = Threshold.STRICT_TWO_THIRDS
    shift_success_ratio: float = 0.9
    benign_ttl: int = BENIGN_TTL_S

    def __post_init__(self) -> None:
        if self.benign_universe_size is not None and self.benign_universe_size < BENIGN_PER_RESPONSE:
            raise DomainError(f"benign universe must hold at least {BENIGN_PER_RESPONSE} addresses")
        if self.sync_rounds < 0:
            raise DomainError("sync_rounds must be >= 0")
        if not 0 <= self.seed <= SEED_MASK:
            raise DomainError("seed must be an unsigned 64-bit value")


@dataclass(frozen=True)
class ScenarioOutcome:
    timeline: PoolTimeline
    final_composition: Composition
    pool_captured: bool
    clock_estimates: list[ClockEstimate]
    achieved_shift: float
    shift_achieved: bool
    poisoned_at: Optional[int] = None


def _scenario_composition(pool) -> Composition:
    return pool_composition(pool) if len(pool) else Composition(0, 0)


def run_scenario(config: ScenarioConfig) -> ScenarioOutcome:
    rng = random.Random(config.seed)
    universe = BenignUniverse(size=config.benign_universe_size, ttl=config.benign_ttl)
    result = generate_pool(
        config.schedule,
        ResolverState(now=config.schedule.start),
        config.strategy,
        config.policy,
        rng,
        universe,
    )
    composition = _scenario_composition(result.pool)
    estimates = [sync_round(result.pool, config.sync, rng) for _ in range(config.sync_rounds)]
    if estimates:
        achieved = round(math.fsum(e.value for e in estimates) / len(estimates), 3)
    else:
        achieved = 0.0
    delta = config.sync.malicious_shift_delta
    shift_ok = bool(estimates) and abs(achieved) >= config.shift_success_ratio * abs(delta)
    return ScenarioOutcome(
        timeline=result.timeline,
        final_composition=composition,
        pool_captured=is_captured(composition.malicious, composition.total, config.threshold),
        clock_estimates=estimates,
        achieved_shift=achieved,
        shift_achieved=shift_ok,
        poisoned_at=result.poisoned_at,
    )


# -- Monte Carlo ------------------------------------------------------------


def derive_seed(seed: int, trial: int) -> int:
    """Per-trial seed: BLAKE2b over (seed, trial), truncated to 64 bits."""
    digest = hashlib.blake2b(
        seed.to_bytes(8, "little") + trial.to_bytes(8, "little"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class MonteCarloTally:
    """Integer-only running totals, so merging is exact in any grouping."""

    trials: int = 0
    captures: int = 0
    shift_successes: int = 0
    shift_sum_us: int = 0

    def __add__(self, other: MonteCarloTally) -> MonteCarloTally:
        return MonteCarloTally(
            self.trials + other.trials,
            self.captures + other.captures,
            self.shift_successes + other.shift_successes,
            self.shift_sum_us + other.shift_sum_us,
        )

    @classmethod
    def of(cls, outcome: ScenarioOutcome) -> MonteCarloTally:
        return cls(1, int(outcome.pool_captured), int(outcome.shift_achieved), round(outcome.achieved_shift * 1000))


@dataclass(frozen=True)
class MonteCarloStats:
    trials: int
    capture_successes: int
    capture_rate: float
    shift_success_rate: float
    mean_shift: float
    wilson_95_interval: tuple[float, float]

    @classmethod
    def from_tally(cls, tally: MonteCarloTally) -> MonteCarloStats:
        if tally.trials < 1:
            raise DomainError("no trials in tally")
        return cls(
            trials=tally.trials,
            capture_successes=tally.captures,
            capture_rate=tally.captures / tally.trials,
            shift_success_rate=tally.shift_successes / tally.trials,
            mean_shift=round(tally.shift_sum_us / tally.trials / 1000, 3),
            wilson_95_interval=wilson_interval(tally.captures, tally.trials),
        )

    @property
    def wilson_half_width(self) -> float:
        low, high = self.wilson_95_interval
        return (high - low) / 2


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z_95) -> tuple[float, float]:
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise DomainError("successes must lie in [0, trials]")
    phat = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials)) / denom
    # Clamp so the interval always contains the observed rate despite rounding.
    return (min(max(0.0, centre - half), phat), max(min(1.0, centre + half), phat))


def run_trials(config: ScenarioConfig, start: int, stop: int) -> MonteCarloTally:
    tally = MonteCarloTally()
    for trial in range(start, stop):
        outcome = run_scenario(replace(config, seed=derive_seed(config.seed, trial)))
        tally = tally + MonteCarloTally.of(outcome)
    return tally


def _chunks(trials: int, parts: int) -> list[tuple[int, int]]:
    size = -(-trials // parts)
    return [(lo, min(lo + size, trials)) for lo in range(0, trials, size)]


def monte_carlo(config: ScenarioConfig, trials: int, jobs: int = 1) -> MonteCarloStats:
    """Run ``trials`` independent scenarios and aggregate capture statistics.

    Trial ``i`` uses ``derive_seed(config.seed, i)``; results do not depend
    on ``jobs``.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if jobs <= 1 or trials < 2:
        return MonteCarloStats.from_tally(run_trials(config, 0, trials))

    spans = _chunks(trials, jobs * 4)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(run_trials, config, lo, hi) for lo, hi in spans]
        tally = MonteCarloTally()
        for fut in futures:
            tally = tally + fut.result()
    return MonteCarloStats.from_tally(tally)


def analytic_capture_probability(
    p: float,
    M: int,
    query_count: Optional[int] = 24,
    benign_per_query: int = BENIGN_PER_RESPONSE,
    threshold: Threshold = Threshold.STRICT_TWO_THIRDS,
) -> float:
    """Probability that the first Bernoulli(p) success lands by the capture deadline.

    Assumes one attempt per query until success and a payload TTL that
    outlives the schedule. Attempts past ``query_count`` do not exist, so the
    deadline is capped there; pass ``None`` for the uncapped formula.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must be in [0, 1]")
    deadline = k_max(M, benign_per_query, threshold)
    if query_count is not None:
        deadline = min(deadline, query_count)
    return 1.0 - (1.0 - p) ** deadline


def expected_capture(config: ScenarioConfig) -> float:
    """Closed-form capture rate for any strategy mode (0/1 for non-random ones).

    Only exact for a payload TTL that outlives the schedule, no mitigation
    and distinct benign addresses.
    """
    strategy = config.strategy
    M = strategy.payload.address_count
    deadline = min(k_max(M, BENIGN_PER_RESPONSE, config.threshold), config.schedule.query_count)
    if strategy.mode is StrategyMode.NONE:
        return 0.0
    if strategy.mode is StrategyMode.DETERMINISTIC:
        return 1.0 if strategy.k <= deadline else 0.0
    return analytic_capture_probability(
        strategy.p, M, config.schedule.query_count, BENIGN_PER_RESPONSE, config.threshold
    )
