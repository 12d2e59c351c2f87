"""Shared-resolver model, response mitigation policy and DNS wire sizing.

Addresses are plain ``int`` IPv4 values so pools stay cheap to build in
Monte Carlo loops; :func:`format_address` renders them dotted-quad.
"""

from __future__ import annotations

import enum
import ipaddress
import random
import struct
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .errors import DomainError

BENIGN_PER_RESPONSE = 4
BENIGN_TTL_S = 150

# Disjoint /8 ranges keep ground-truth labels unambiguous.
BENIGN_BASE = int(ipaddress.IPv4Address("10.0.0.0"))
ATTACKER_BASE = int(ipaddress.IPv4Address("203.0.0.0"))
ADDRESS_SPACE = 1 << 24

HEADER_SIZE = 12
QUESTION_TAIL = 4  # QTYPE + QCLASS
A_RECORD_SIZE = 2 + 2 + 2 + 4 + 2 + 4  # pointer, type, class, ttl, rdlength, rdata
OPT_RECORD_SIZE = 11
CLASSIC_UDP_LIMIT = 512
EDNS_UDP_SIZE = 4096


class Origin(str, enum.Enum):
    BENIGN = "benign-upstream"
    POISONED = "poisoned"
    CACHE = "cache"


def format_address(address: int) -> str:
    return str(ipaddress.IPv4Address(address))


@dataclass(frozen=True)
class DnsResponse:
    addresses: tuple[int, ...]
    ttl: int
    origin: Origin

    def __post_init__(self) -> None:
        if not self.addresses:
            raise DomainError("DNS response must carry at least one address")
        if len(set(self.addresses)) != len(self.addresses):
            raise DomainError("DNS response addresses must be unique")
        if self.ttl < 0:
            raise DomainError(f"negative TTL {self.ttl}")


@dataclass(frozen=True)
class CacheEntry:
    response: DnsResponse
    inserted_at: int


@dataclass(frozen=True)
class ResolverState:
    cached: Optional[CacheEntry] = None
    now: int = 0

    def at(self, now: int) -> ResolverState:
        return ResolverState(self.cached, now)

    def fresh_entry(self) -> Optional[CacheEntry]:
        entry = self.cached
        if entry is not None and self.now - entry.inserted_at < entry.response.ttl:
            return entry
        return None

    @property
    def is_fresh(self) -> bool:
        return self.fresh_entry() is not None


def _as_cache_hit(response: DnsResponse) -> DnsResponse:
    # Already validated when first cached; skip __post_init__.
    hit = object.__new__(DnsResponse)
    object.__setattr__(hit, "addresses", response.addresses)
    object.__setattr__(hit, "ttl", response.ttl)
    object.__setattr__(hit, "origin", Origin.CACHE)
    return hit


@dataclass
class BenignUniverse:
    """Source of addresses returned by the real pool nameservers.

    ``size=None`` is the "distinct" mode: every draw yields addresses never
    seen before. With a finite ``size`` each response is a uniform draw of
    distinct addresses from that many, with repeats possible across queries.
    """

    size: Optional[int] = None
    per_response: int = BENIGN_PER_RESPONSE
    ttl: int = BENIGN_TTL_S
    _issued: int = field(default=0, repr=False)

    def __post_init__(self) -> None:
        if self.per_response < 1:
            raise DomainError("benign responses need at least one address")
        if self.size is not None and not self.per_response <= self.size <= ADDRESS_SPACE:
            raise DomainError(
                f"benign universe size must be in [{self.per_response}, {ADDRESS_SPACE}], got {self.size}"
            )

    def draw(self, rng: random.Random) -> tuple[int, ...]:
        if self.size is None:
            start = self._issued
            self._issued += self.per_response
            if self._issued > ADDRESS_SPACE:
                raise DomainError("distinct benign address space exhausted")
            return tuple(BENIGN_BASE + i for i in range(start, self._issued))
        return tuple(BENIGN_BASE + i for i in rng.sample(range(self.size), self.per_response))


def resolve(
    state: ResolverState,
    benign_universe: BenignUniverse,
    attacker_injection: Optional[DnsResponse] = None,
    rng: Optional[random.Random] = None,
) -> tuple[DnsResponse, ResolverState]:
    """Answer one query for the pool domain at ``state.now``.

    A fresh cache entry always wins, even over an injection. On a miss the
    injected response (if any) is cached, otherwise a benign upstream answer.
    """
    entry = state.fresh_entry()
    if entry is not None:
        return _as_cache_hit(entry.response), state

    if attacker_injection is not None:
        response = replace(attacker_injection, origin=Origin.POISONED)
    else:
        response = DnsResponse(
            benign_universe.draw(rng or random.Random(0)),
            benign_universe.ttl,
            Origin.BENIGN,
        )
    return response, ResolverState(CacheEntry(response, state.now), state.now)


# -- mitigation -------------------------------------------------------------


class RejectReason(str, enum.Enum):
    TOO_MANY_ADDRESSES = "too-many-addresses"
    TTL_TOO_HIGH = "ttl-too-high"


@dataclass(frozen=True)
class Rejection:
    reason: RejectReason
    response: DnsResponse


@dataclass(frozen=True)
class MitigationPolicy:
    enabled: bool = False
    max_addresses: int = 4
    max_ttl: int = 3600

    def __post_init__(self) -> None:
        if self.max_addresses < 1:
            raise DomainError("max_addresses must be >= 1")
        if self.max_ttl <= 0:
            raise DomainError("max_ttl must be > 0")


def apply_mitigation(
    response: DnsResponse, policy: MitigationPolicy
) -> Union[DnsResponse, Rejection]:
    """Return the response unchanged, or a :class:`Rejection` saying why it was dropped.

    The address count is checked before the TTL, so an oversized long-lived
    payload is reported as ``too-many-addresses``.
    """
    if not policy.enabled:
        return response
    if len(response.addresses) > policy.max_addresses:
        return Rejection(RejectReason.TOO_MANY_ADDRESSES, response)
    if response.ttl > policy.max_ttl:
        return Rejection(RejectReason.TTL_TOO_HIGH, response)
    return response


# -- wire format ------------------------------------------------------------


@dataclass(frozen=True)
class WireParams:
    mtu: int = 1500
    qname: str = "pool.ntp.org"
    edns: bool = True
    ip_header: int = 20
    udp_header: int = 8

    @property
    def payload_budget(self) -> int:
        budget = self.mtu - self.ip_header - self.udp_header
        if not self.edns:
            budget = min(budget, CLASSIC_UDP_LIMIT)
        return budget


def encode_name(qname: str) -> bytes:
    """Uncompressed wire form of a domain name, root label included."""
    if qname == ".":
        return b"\x00"
    name = qname[:-1] if qname.endswith(".") else qname
    if not name:
        raise DomainError("empty domain name")
    out = bytearray()
    for label in name.split("."):
        if not label.isascii():
            raise DomainError(f"non-ASCII label {label!r} in {qname!r}")
        raw = label.encode("ascii")
        if not raw:
            raise DomainError(f"empty label in {qname!r}")
        if len(raw) > 63:
            raise DomainError(f"label longer than 63 bytes in {qname!r}")
        out.append(len(raw))
        out += raw
    out.append(0)
    if len(out) > 255:
        raise DomainError(f"domain name longer than 255 bytes: {qname!r}")
    return bytes(out)


def encoded_size(qname: str, n_records: int, edns: bool) -> int:
    """Byte length of an A-record response with every answer name compressed."""
    if n_records < 0:
        raise DomainError("n_records must be >= 0")
    size = HEADER_SIZE + len(encode_name(qname)) + QUESTION_TAIL + A_RECORD_SIZE * n_records
    if edns:
        size += OPT_RECORD_SIZE
    return size


def encode_response(
    qname: str, addresses: list[int] | tuple[int, ...], ttl: int, edns: bool, txid: int = 0
) -> bytes:
    """Build the actual response message that :func:`encoded_size` describes."""
    qname_wire = encode_name(qname)
    flags = 0x8180  # QR, RD, RA
    header = struct.pack("!HHHHHH", txid, flags, 1, len(addresses), 0, 1 if edns else 0)
    msg = bytearray(header)
    msg += qname_wire + struct.pack("!HH", 1, 1)
    pointer = 0xC000 | HEADER_SIZE
    for addr in addresses:
        msg += struct.pack("!HHHIHI", pointer, 1, 1, ttl, 4, addr)
    if edns:
        msg += b"\x00" + struct.pack("!HHIH", 41, EDNS_UDP_SIZE, 0, 0)
    return bytes(msg)


def max_a_records(params: WireParams) -> int:
    """Largest number of A records that fits in one unfragmented UDP response."""
    budget = params.payload_budget
    empty = encoded_size(params.qname, 0, params.edns)
    if budget < empty:
        raise DomainError(
            f"payload budget {budget} B is below the empty response size {empty} B"
        )
    return (budget - empty) // A_RECORD_SIZE
