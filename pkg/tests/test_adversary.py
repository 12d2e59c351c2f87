import random

import pytest

from chronos_dns.adversary import (
    AttackStrategy,
    PayloadSpec,
    Threshold,
    craft_payload,
    decide_poison,
    is_captured,
    k_max,
)
from chronos_dns.dns_model import ATTACKER_BASE, BENIGN_BASE, ADDRESS_SPACE, Origin, WireParams
from chronos_dns.errors import DomainError

from oracles import k_max_brute


class TestDecidePoison:
    def test_deterministic_fires_once_at_k(self):
        s = AttackStrategy.deterministic(12)
        rng = random.Random(0)
        assert not decide_poison(s, 11, False, rng)
        assert decide_poison(s, 12, False, rng)
        assert not decide_poison(s, 12, True, rng)
        assert not decide_poison(s, 13, False, rng)

    def test_none_never(self):
        assert not any(decide_poison(AttackStrategy.none(), k, False, random.Random(0)) for k in range(1, 25))

    def test_degenerate_probabilities(self):
        rng = random.Random(0)
        never = AttackStrategy.bernoulli(0.0)
        assert not any(decide_poison(never, k, False, rng) for k in range(1, 1000))
        assert decide_poison(AttackStrategy.bernoulli(1.0), 1, False, rng)
        assert not decide_poison(AttackStrategy.bernoulli(1.0), 2, True, rng)

    def test_bernoulli_rate(self):
        s = AttackStrategy.bernoulli(0.5)
        rng = random.Random(12345)
        hits = sum(decide_poison(s, 1, False, rng) for _ in range(100_000))
        assert abs(hits / 100_000 - 0.5) <= 0.005

    def test_query_index_starts_at_one(self):
        with pytest.raises(DomainError):
            decide_poison(AttackStrategy.none(), 0, False, random.Random(0))

    @pytest.mark.parametrize("kwargs", [{"k": 0}, {"k": None}])
    def test_invalid_deterministic(self, kwargs):
        with pytest.raises(DomainError):
            AttackStrategy.deterministic(**kwargs)

    @pytest.mark.parametrize("p", [-0.1, 1.5, None])
    def test_invalid_bernoulli(self, p):
        with pytest.raises(DomainError):
            AttackStrategy.bernoulli(p)


class TestCraftPayload:
    def test_paper_payload_fits(self):
        resp = craft_payload(PayloadSpec(89, 90_000, True, WireParams(1500, "pool.ntp.org", True)))
        assert len(resp.addresses) == 89
        assert resp.ttl == 90_000
        assert resp.origin is Origin.POISONED

    def test_single_address(self):
        resp = craft_payload(PayloadSpec(1, 60, False))
        assert len(resp.addresses) == 1 and resp.ttl == 60

    def test_ninety_does_not_fit(self):
        with pytest.raises(DomainError, match="non-fragmented"):
            craft_payload(PayloadSpec(90, 90_000, True, WireParams(1500, "pool.ntp.org", True)))

    def test_unenforced_allows_oversize(self):
        assert len(craft_payload(PayloadSpec(400, 90_000, False)).addresses) == 400

    def test_disjoint_from_benign_range(self):
        addrs = craft_payload(PayloadSpec(89)).addresses
        benign = range(BENIGN_BASE, BENIGN_BASE + ADDRESS_SPACE)
        assert not any(a in benign for a in addrs)
        assert min(addrs) == ATTACKER_BASE

    def test_invalid_count(self):
        with pytest.raises(DomainError):
            PayloadSpec(0)


class TestKMax:
    @pytest.mark.parametrize("M, expected", [(89, 12), (8, 1), (24, 3), (1, 1)])
    def test_examples(self, M, expected):
        assert k_max(M) == expected

    def test_matches_brute_force(self):
        for M in range(1, 401):
            assert k_max(M) == k_max_brute(M, k_limit=100), M

    def test_non_strict_matches_brute_force(self):
        for M in range(1, 401):
            for b in (1, 2, 4, 6):
                assert k_max(M, b, Threshold.GE_TWO_THIRDS) == k_max_brute(M, b, strict=False, k_limit=500)

    def test_exactly_two_thirds_is_not_strict_capture(self):
        assert not is_captured(8, 12)
        assert is_captured(8, 12, Threshold.GE_TWO_THIRDS)
        assert is_captured(89, 133)
        assert not is_captured(89, 137)
        assert not is_captured(0, 0)

    def test_invalid(self):
        with pytest.raises(DomainError):
            k_max(0)
