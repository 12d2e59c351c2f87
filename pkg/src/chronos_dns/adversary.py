"""Attacker models: when poisoning lands, what it injects, and how late it may land."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Optional

from .dns_model import ADDRESS_SPACE, ATTACKER_BASE, DnsResponse, Origin, WireParams, max_a_records
from .errors import DomainError

DEFAULT_PAYLOAD_SIZE = 89
DEFAULT_PAYLOAD_TTL_S = 90_000  # 25 h, outlives the whole 24 h pool window

MECHANISM_TAGS = ("fragmentation", "bgp-hijack", "third-party-trigger")


class StrategyMode(str, enum.Enum):
    NONE = "none"
    DETERMINISTIC = "deterministic"
    BERNOULLI = "bernoulli"


class Threshold(str, enum.Enum):
    STRICT_TWO_THIRDS = "strict_two_thirds"
    GE_TWO_THIRDS = "ge_two_thirds"


def is_captured(malicious: int, total: int, threshold: Threshold = Threshold.STRICT_TWO_THIRDS) -> bool:
    """Whether ``malicious / total`` clears the two-thirds bar (exact integer test)."""
    if total == 0:
        return False
    if threshold is Threshold.STRICT_TWO_THIRDS:
        return 3 * malicious > 2 * total
    return 3 * malicious >= 2 * total


@dataclass(frozen=True)
class PayloadSpec:
    address_count: int = DEFAULT_PAYLOAD_SIZE
    ttl: int = DEFAULT_PAYLOAD_TTL_S
    enforce_wire_fit: bool = True
    wire: WireParams = field(default_factory=WireParams)

    def __post_init__(self) -> None:
        if self.address_count < 1:
            raise DomainError("payload address count M must be >= 1")
        if self.address_count > ADDRESS_SPACE:
            raise DomainError("payload address count exceeds the attacker address range")
        if self.ttl < 0:
            raise DomainError("payload TTL must be >= 0")


@dataclass(frozen=True)
class AttackStrategy:
    mode: StrategyMode = StrategyMode.NONE
    k: Optional[int] = None
    p: Optional[float] = None
    payload: PayloadSpec = field(default_factory=PayloadSpec)
    # Metadata only; never read by the simulation.
    mechanism_tag: str = "fragmentation"

    def __post_init__(self) -> None:
        if self.mode is StrategyMode.DETERMINISTIC and (self.k is None or self.k < 1):
            raise DomainError(f"deterministic strategy needs k >= 1, got {self.k!r}")
        if self.mode is StrategyMode.BERNOULLI and (self.p is None or not 0.0 <= self.p <= 1.0):
            raise DomainError(f"bernoulli strategy needs p in [0, 1], got {self.p!r}")

    @classmethod
    def none(cls) -> AttackStrategy:
        return cls(StrategyMode.NONE)

    @classmethod
    def deterministic(cls, k: int, payload: PayloadSpec | None = None, **kw) -> AttackStrategy:
        return cls(StrategyMode.DETERMINISTIC, k=k, payload=payload or PayloadSpec(), **kw)

    @classmethod
    def bernoulli(cls, p: float, payload: PayloadSpec | None = None, **kw) -> AttackStrategy:
        return cls(StrategyMode.BERNOULLI, p=p, payload=payload or PayloadSpec(), **kw)


def decide_poison(
    strategy: AttackStrategy,
    query_index: int,
    already_succeeded: bool,
    rng: random.Random,
) -> bool:
    """Does the poisoning attempt on this (cache-miss) query succeed?

    The caller only asks on queries the resolver forwards upstream. A
    Bernoulli coin is drawn only while no success has happened yet, so the
    random stream does not depend on what happens after the first win.
    """
    if query_index < 1:
        raise DomainError("query_index starts at 1")
    if already_succeeded or strategy.mode is StrategyMode.NONE:
        return False
    if strategy.mode is StrategyMode.DETERMINISTIC:
        return query_index == strategy.k
    return rng.random() < strategy.p


def craft_payload(spec: PayloadSpec) -> DnsResponse:
    if spec.enforce_wire_fit:
        capacity = max_a_records(spec.wire)
        if spec.address_count > capacity:
            raise DomainError(
                f"payload exceeds non-fragmented response capacity "
                f"({spec.address_count} > {capacity} records)"
            )
    addresses = tuple(range(ATTACKER_BASE, ATTACKER_BASE + spec.address_count))
    return DnsResponse(addresses, spec.ttl, Origin.POISONED)


def k_max(
    M: int,
    benign_per_query: int = 4,
    threshold: Threshold = Threshold.STRICT_TWO_THIRDS,
) -> int:
    """Latest pool-generation query at which poisoning still captures the pool.

    Poisoning at query ``k`` leaves ``benign_per_query * (k - 1)`` honest
    servers beside ``M`` malicious ones. Capture needs
    ``M / (M + b(k-1)) > 2/3``, i.e. ``M > 2b(k-1)``, so
    ``k_max = ceil(M / 2b)``; the non-strict variant gives ``floor(M / 2b) + 1``.
    """
    if M < 1:
        raise DomainError("M must be >= 1")
    if benign_per_query < 1:
        raise DomainError("benign_per_query must be >= 1")
    step = 2 * benign_per_query
    if threshold is Threshold.STRICT_TWO_THIRDS:
        return -(-M // step)
    return M // step + 1
