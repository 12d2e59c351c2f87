"""Simulator for DNS-poisoning attacks on Chronos NTP server-pool generation."""

from .adversary import (
    AttackStrategy,
    PayloadSpec,
    StrategyMode,
    Threshold,
    craft_payload,
    decide_poison,
    is_captured,
    k_max,
)
from .chronos_core import ClockEstimate, SyncConfig, TimeSample, sample_pool, select_time, sync_round
from .dns_model import (
    BenignUniverse,
    DnsResponse,
    MitigationPolicy,
    Origin,
    RejectReason,
    Rejection,
    ResolverState,
    WireParams,
    apply_mitigation,
    encoded_size,
    max_a_records,
    resolve,
)
from .errors import ConfigError, DomainError
from .pool_gen import QuerySchedule, ServerPool, generate_pool, pool_composition
from .sim_engine import (
    MonteCarloStats,
    ScenarioConfig,
    ScenarioOutcome,
    analytic_capture_probability,
    monte_carlo,
    run_scenario,
)

__version__ = "0.1.0"
