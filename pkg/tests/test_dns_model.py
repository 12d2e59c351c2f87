import random

import dns.message
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chronos_dns.dns_model import (
    BENIGN_TTL_S,
    BenignUniverse,
    DnsResponse,
    MitigationPolicy,
    Origin,
    RejectReason,
    Rejection,
    ResolverState,
    WireParams,
    apply_mitigation,
    encode_name,
    encode_response,
    encoded_size,
    format_address,
    max_a_records,
    resolve,
)
from chronos_dns.errors import DomainError

from oracles import dnspython_response_size, max_records_brute

POISON = DnsResponse(tuple(range(500, 589)), 90_000, Origin.POISONED)


class TestResolve:
    def test_cache_miss_goes_upstream(self):
        resp, state = resolve(ResolverState(now=0), BenignUniverse(), None, random.Random(0))
        assert resp.origin is Origin.BENIGN
        assert len(resp.addresses) == 4
        assert resp.ttl == BENIGN_TTL_S == 150
        assert state.cached.inserted_at == 0

    def test_long_ttl_poison_served_from_cache(self):
        universe = BenignUniverse()
        resp, state = resolve(ResolverState(now=0), universe, POISON)
        assert resp.origin is Origin.POISONED
        hit, after = resolve(state.at(3600), universe, None)
        assert hit.origin is Origin.CACHE
        assert hit.addresses == POISON.addresses
        assert after == state.at(3600)

    def test_ttl_expiry_is_strict(self):
        universe = BenignUniverse()
        short = DnsResponse((1, 2), 7200, Origin.POISONED)
        _, state = resolve(ResolverState(now=0), universe, short)
        assert resolve(state.at(3600), universe)[0].origin is Origin.CACHE
        assert resolve(state.at(7199), universe)[0].origin is Origin.CACHE
        assert resolve(state.at(7200), universe)[0].origin is Origin.BENIGN

    def test_fresh_cache_beats_injection(self):
        universe = BenignUniverse()
        _, state = resolve(ResolverState(now=0), universe, None)
        resp, _ = resolve(state.at(10), universe, POISON)
        assert resp.origin is Origin.CACHE
        assert len(resp.addresses) == 4

    @given(ttl=st.integers(1, 10**6), t0=st.integers(0, 10**6))
    def test_freshness_boundary(self, ttl, t0):
        universe = BenignUniverse()
        inject = DnsResponse((7,), ttl, Origin.POISONED)
        _, state = resolve(ResolverState(now=t0), universe, inject)
        drawn_before = universe._issued
        hit, _ = resolve(state.at(t0 + ttl - 1), universe)
        assert hit.origin is Origin.CACHE and hit.addresses == (7,)
        assert universe._issued == drawn_before  # no upstream draw on a hit
        miss, _ = resolve(state.at(t0 + ttl), universe)
        assert miss.origin is Origin.BENIGN

    def test_distinct_universe_never_repeats(self):
        universe = BenignUniverse()
        seen = set()
        for _ in range(24):
            batch = universe.draw(random.Random(0))
            assert not seen & set(batch)
            seen |= set(batch)
        assert len(seen) == 96

    def test_finite_universe_draws_within_range(self):
        universe = BenignUniverse(size=10)
        rng = random.Random(5)
        draws = [universe.draw(rng) for _ in range(50)]
        flat = {a for d in draws for a in d}
        assert len(flat) <= 10
        assert all(len(set(d)) == 4 for d in draws)

    def test_finite_universe_too_small(self):
        with pytest.raises(DomainError):
            BenignUniverse(size=3)


class TestResponseInvariants:
    def test_empty(self):
        with pytest.raises(DomainError):
            DnsResponse((), 10, Origin.BENIGN)

    def test_duplicates(self):
        with pytest.raises(DomainError):
            DnsResponse((1, 1), 10, Origin.BENIGN)

    def test_negative_ttl(self):
        with pytest.raises(DomainError):
            DnsResponse((1,), -1, Origin.BENIGN)

    def test_format_address(self):
        assert format_address(0x0A000001) == "10.0.0.1"


class TestMitigation:
    policy = MitigationPolicy(True, 4, 3600)

    def test_too_many_addresses(self):
        out = apply_mitigation(POISON, self.policy)
        assert isinstance(out, Rejection)
        assert out.reason is RejectReason.TOO_MANY_ADDRESSES

    def test_ttl_too_high(self):
        resp = DnsResponse((1, 2, 3, 4), 90_000, Origin.POISONED)
        out = apply_mitigation(resp, self.policy)
        assert out.reason is RejectReason.TTL_TOO_HIGH

    def test_benign_passes(self):
        resp = DnsResponse((1, 2, 3, 4), 150, Origin.BENIGN)
        assert apply_mitigation(resp, self.policy) is resp

    def test_disabled_passes_everything(self):
        assert apply_mitigation(POISON, MitigationPolicy(False)) is POISON

    @given(
        n=st.integers(1, 200),
        ttl=st.integers(0, 200_000),
        max_addresses=st.integers(1, 100),
        max_ttl=st.integers(1, 100_000),
    )
    def test_exactly_one_verdict(self, n, ttl, max_addresses, max_ttl):
        resp = DnsResponse(tuple(range(n)), ttl, Origin.POISONED)
        out = apply_mitigation(resp, MitigationPolicy(True, max_addresses, max_ttl))
        if isinstance(out, Rejection):
            if out.reason is RejectReason.TOO_MANY_ADDRESSES:
                assert n > max_addresses
            else:
                assert n <= max_addresses and ttl > max_ttl
        else:
            assert n <= max_addresses and ttl <= max_ttl

    @pytest.mark.parametrize("kwargs", [{"max_addresses": 0}, {"max_ttl": 0}])
    def test_invalid_policy(self, kwargs):
        with pytest.raises(DomainError):
            MitigationPolicy(True, **kwargs)


class TestWireFormat:
    @pytest.mark.parametrize(
        "n, edns, expected",
        [(0, False, 30), (1, False, 46), (89, True, 1465), (90, True, 1481)],
    )
    def test_examples(self, n, edns, expected):
        assert encoded_size("pool.ntp.org", n, edns) == expected
        assert dnspython_response_size("pool.ntp.org", n, edns) == expected

    def test_name_encoding(self):
        assert encode_name("pool.ntp.org") == b"\x04pool\x03ntp\x03org\x00"
        assert encode_name("pool.ntp.org.") == encode_name("pool.ntp.org")
        assert encode_name(".") == b"\x00"

    @pytest.mark.parametrize("bad", ["", "a..b", ".a", "x" * 64 + ".org", ".".join(["abcdefg"] * 40), "bü.org"])
    def test_invalid_names(self, bad):
        with pytest.raises(DomainError):
            encoded_size(bad, 1, True)

    def test_label_of_63_is_fine(self):
        assert encoded_size("x" * 63 + ".org", 0, False) == 12 + 1 + 63 + 5 + 4

    @settings(deadline=None, max_examples=60)
    @given(
        qname=st.sampled_from(["pool.ntp.org", "0.pool.ntp.org", "europe.pool.ntp.org", "a.b", "time.example.com"]),
        n=st.integers(0, 120),
        edns=st.booleans(),
    )
    def test_encoder_matches_bytes_and_dnspython(self, qname, n, edns):
        size = encoded_size(qname, n, edns)
        wire = encode_response(qname, list(range(1, n + 1)), 300, edns)
        assert len(wire) == size
        assert dnspython_response_size(qname, n, edns) == size
        parsed = dns.message.from_wire(wire)
        assert sum(len(rrset) for rrset in parsed.answer) == n

    @given(n=st.integers(0, 500), edns=st.booleans())
    def test_monotone_slope_16(self, n, edns):
        assert encoded_size("pool.ntp.org", n + 1, edns) - encoded_size("pool.ntp.org", n, edns) == 16

    @pytest.mark.parametrize(
        "params, expected",
        [
            (WireParams(1500, "pool.ntp.org", True), 89),
            (WireParams(1500, "pool.ntp.org", False), 30),
            (WireParams(9000, "pool.ntp.org", False), 30),
            (WireParams(576, "pool.ntp.org", False), 30),
            (WireParams(548, "pool.ntp.org", True), 29),
        ],
    )
    def test_max_a_records(self, params, expected):
        assert max_a_records(params) == expected

    @given(mtu=st.integers(100, 9000), edns=st.booleans())
    def test_max_matches_brute_force(self, mtu, edns):
        params = WireParams(mtu, "pool.ntp.org", edns)
        budget = mtu - 28
        if not edns:
            budget = min(budget, 512)
        brute = max_records_brute(budget, lambda n: encoded_size("pool.ntp.org", n, edns))
        assert max_a_records(params) == brute

    def test_max_matches_brute_force_full_mtu_sweep(self):
        for edns in (True, False):
            for mtu in range(100, 9001, 37):
                budget = min(mtu - 28, 9000 if edns else 512)
                brute = max_records_brute(budget, lambda n: encoded_size("pool.ntp.org", n, edns))
                assert max_a_records(WireParams(mtu, "pool.ntp.org", edns)) == brute

    def test_budget_too_small(self):
        with pytest.raises(DomainError):
            max_a_records(WireParams(mtu=68))
