"""Chronos server-pool generation: hourly DNS lookups deduplicated into one pool."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .adversary import AttackStrategy, StrategyMode, craft_payload, decide_poison
from .dns_model import (
    BenignUniverse,
    DnsResponse,
    MitigationPolicy,
    Origin,
    RejectReason,
    Rejection,
    ResolverState,
    apply_mitigation,
    resolve,
)
from .errors import DomainError


@dataclass(frozen=True)
class QuerySchedule:
    query_count: int = 24
    interval: int = 3600
    start: int = 0

    def __post_init__(self) -> None:
        if self.query_count < 1:
            raise DomainError("query_count must be >= 1")
        if self.interval <= 0:
            raise DomainError("interval must be > 0")

    def time_of(self, query_index: int) -> int:
        return self.start + (query_index - 1) * self.interval


@dataclass(frozen=True)
class PoolEntry:
    honest: bool
    added_at_query: int
    origin: Origin


@dataclass
class ServerPool:
    entries: dict[int, PoolEntry] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, address: int) -> bool:
        return address in self.entries

    def addresses(self) -> list[int]:
        return sorted(self.entries)

    def add(self, address: int, entry: PoolEntry) -> bool:
        """Insert unless already present; returns whether the address was new."""
        if address in self.entries:
            return False
        self.entries[address] = entry
        return True


@dataclass(frozen=True)
class Composition:
    benign: int
    malicious: int

    @property
    def total(self) -> int:
        return self.benign + self.malicious

    @property
    def attacker_fraction(self) -> float:
        return self.malicious / self.total if self.total else 0.0


@dataclass(frozen=True)
class QueryRecord:
    query_index: int
    time: int
    origin: Origin
    new_addresses: int
    cum_benign: int
    cum_malicious: int
    rejected: Optional[RejectReason] = None

    @property
    def attacker_fraction(self) -> float:
        total = self.cum_benign + self.cum_malicious
        return self.cum_malicious / total if total else 0.0


PoolTimeline = list[QueryRecord]


def pool_composition(pool: ServerPool) -> Composition:
    if len(pool) == 0:
        raise DomainError("empty server pool")
    malicious = sum(1 for e in pool.entries.values() if not e.honest)
    return Composition(len(pool) - malicious, malicious)


@dataclass
class PoolResult:
    pool: ServerPool
    timeline: PoolTimeline
    resolver: ResolverState
    # First query whose poisoning attempt succeeded, accepted or not.
    poisoned_at: Optional[int] = None

    def __iter__(self):
        # Allows ``pool, timeline = generate_pool(...)``.
        return iter((self.pool, self.timeline))


def generate_pool(
    schedule: QuerySchedule,
    resolver: ResolverState,
    attacker: AttackStrategy,
    policy: MitigationPolicy,
    rng: random.Random,
    benign_universe: Optional[BenignUniverse] = None,
) -> PoolResult:
    """Run the pool-generation queries and collect every accepted address.

    The attacker is only consulted when the resolver would go upstream. A
    response dropped by the mitigation policy adds nothing and is not cached,
    so the next query is a fresh miss.
    """
    universe = benign_universe if benign_universe is not None else BenignUniverse()
    payload: Optional[DnsResponse] = None
    if attacker.mode is not StrategyMode.NONE:
        payload = craft_payload(attacker.payload)

    pool = ServerPool()
    timeline: PoolTimeline = []
    benign = malicious = 0
    poisoned_at: Optional[int] = None
    state = resolver

    for k in range(1, schedule.query_count + 1):
        state = state.at(schedule.time_of(k))
        injection = None
        if not state.is_fresh and decide_poison(attacker, k, poisoned_at is not None, rng):
            poisoned_at = k
            injection = payload

        response, next_state = resolve(state, universe, injection, rng)
        verdict = apply_mitigation(response, policy)

        added = 0
        rejected = None
        if isinstance(verdict, Rejection):
            rejected = verdict.reason
        elif response.origin is not Origin.CACHE:
            # Cache hits replay an entry that was accepted when stored, so
            # every address is already pooled.
            state = next_state
            honest = response.origin is Origin.BENIGN
            entry = PoolEntry(honest, k, response.origin)
            for address in response.addresses:
                if pool.add(address, entry):
                    added += 1
            if honest:
                benign += added
            else:
                malicious += added

        timeline.append(QueryRecord(k, state.now, response.origin, added, benign, malicious, rejected))

    return PoolResult(pool, timeline, state, poisoned_at)
