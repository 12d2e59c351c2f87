"""Chronos client behaviour: random server sampling and trimmed-mean clock selection.

Offsets are milliseconds relative to true time. Benign servers answer
``0 +/- jitter``; malicious servers all answer the same shift ``delta``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal, Sequence, Union

from .errors import DomainError

if TYPE_CHECKING:
    from .pool_gen import ServerPool

SampleSize = Union[int, Literal["all"]]

# Estimates are reported to microsecond precision.
_ESTIMATE_DIGITS = 3


@dataclass(frozen=True)
class TimeSample:
    server: int
    offset: float
    # Ground truth for analysis only; selection never looks at it.
    honest: bool = True


@dataclass(frozen=True)
class ClockEstimate:
    value: float
    survivors: int
    discarded_low: int
    discarded_high: int

    @property
    def sample_count(self) -> int:
        return self.survivors + self.discarded_low + self.discarded_high


@dataclass(frozen=True)
class SyncConfig:
    sample_size_m: SampleSize = "all"
    benign_jitter_halfwidth: float = 10
    malicious_shift_delta: float = 100

    def __post_init__(self) -> None:
        m = self.sample_size_m
        if m != "all" and (isinstance(m, bool) or not isinstance(m, int) or m < 1):
            raise DomainError(f"sample_size_m must be a positive integer or 'all', got {m!r}")
        if not self.benign_jitter_halfwidth >= 0 or not math.isfinite(self.benign_jitter_halfwidth):
            raise DomainError("benign_jitter_halfwidth must be a finite non-negative number")
        if not math.isfinite(self.malicious_shift_delta):
            raise DomainError("malicious_shift_delta must be finite")


def trim_count(n: int) -> int:
    """Samples dropped from *each* end for ``n`` responses."""
    return n // 3


def select_time(samples: Sequence[TimeSample]) -> ClockEstimate:
    """Drop the lowest and highest third of offsets and average the rest.

    Ties in offset are ordered by server identifier so the surviving set is
    deterministic. With ``d = n // 3`` at least one sample always survives.
    """
    if not samples:
        raise DomainError("no samples")
    n = len(samples)
    if len({s.server for s in samples}) != n:
        raise DomainError("duplicate server identifiers in sample set")
    for s in samples:
        if not math.isfinite(s.offset):
            raise DomainError(f"non-finite offset from server {s.server}")

    d = trim_count(n)
    ordered = sorted(samples, key=lambda s: (s.offset, s.server))
    survivors = ordered[d : n - d]
    mean = math.fsum(s.offset for s in survivors) / len(survivors)
    return ClockEstimate(
        value=round(mean, _ESTIMATE_DIGITS),
        survivors=len(survivors),
        discarded_low=d,
        discarded_high=d,
    )


def sample_pool(pool: ServerPool, m: SampleSize, rng: random.Random) -> list[int]:
    """Pick ``min(m, len(pool))`` distinct servers uniformly without replacement.

    ``m == "all"`` returns every server in ascending address order and does
    not consume randomness.
    """
    if len(pool) == 0:
        raise DomainError("cannot sample from an empty server pool")
    addresses = pool.addresses()
    if m == "all" or m >= len(addresses):
        return addresses
    return rng.sample(addresses, m)


def _benign_offset(jitter: float, rng: random.Random) -> float:
    if jitter == 0:
        return 0
    if float(jitter).is_integer():
        j = int(jitter)
        return rng.randint(-j, j)
    return rng.uniform(-jitter, jitter)


def sync_round(pool: ServerPool, cfg: SyncConfig, rng: random.Random) -> ClockEstimate:
    """Query a sample of the pool once and return the selected clock offset."""
    chosen = sample_pool(pool, cfg.sample_size_m, rng)
    samples = []
    for server in chosen:
        honest = pool.entries[server].honest
        if honest:
            offset = _benign_offset(cfg.benign_jitter_halfwidth, rng)
        else:
            offset = cfg.malicious_shift_delta
        samples.append(TimeSample(server, offset, honest))
    return select_time(samples)
