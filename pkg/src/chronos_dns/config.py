"""YAML scenario configuration: schema validation, presets and round-tripping.

Example::

    schedule: {query_count: 24, interval_s: 3600, start_s: 0}
    strategy:
      mode: deterministic        # none | deterministic | bernoulli
      k: 12
      payload: {M: 89, ttl_s: 90000, enforce_wire_fit: true, mtu: 1500,
                qname: pool.ntp.org, edns: true}
      mechanism_tag: fragmentation
    policy: {enabled: false, max_addresses: 4, max_ttl_s: 3600}
    sync: {m: all, jitter_ms: 10, delta_ms: 100, rounds: 1}
    benign_mode: distinct        # or {universe_size: 500}
    threshold: strict_two_thirds # or ge_two_thirds
    seed: 7

Every section and key is optional; omitted values take the library defaults.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional

import yaml

from .adversary import AttackStrategy, PayloadSpec, StrategyMode, Threshold
from .chronos_core import SyncConfig
from .dns_model import BENIGN_PER_RESPONSE, MitigationPolicy, WireParams
from .errors import ConfigError, DomainError
from .pool_gen import QuerySchedule
from .sim_engine import ScenarioConfig

PRESETS = ("baseline", "paper_attack", "paper_attack_mitigated", "short_ttl")


class _Section:
    """Reads keys out of one mapping, tracking the dotted path for diagnostics."""

    def __init__(self, data: Any, path: str, allowed: tuple[str, ...]) -> None:
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("expected a mapping", path or "<root>")
        unknown = sorted(set(map(str, data)) - set(allowed))
        if unknown:
            raise ConfigError("unknown key", self._join(path, unknown[0]))
        self.data = data
        self.path = path

    @staticmethod
    def _join(path: str, key: str) -> str:
        return f"{path}.{key}" if path else key

    def key(self, name: str) -> str:
        return self._join(self.path, name)

    def get(self, name: str, kind: Callable[[Any], Any], default: Any) -> Any:
        if name not in self.data or self.data[name] is None:
            return default
        try:
            return kind(self.data[name])
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), self.key(name)) from None

    def section(self, name: str, allowed: tuple[str, ...]) -> _Section:
        return _Section(self.data.get(name), self.key(name), allowed)


def _integer(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError(f"expected an integer, got {value!r}")
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f"expected an integer, got {value!r}")
        return int(value)
    if isinstance(value, int):
        return value
    raise ValueError(f"expected an integer, got {value!r}")


def _number(value: Any) -> float | int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"expected a number, got {value!r}")
    return value


def _boolean(value: Any) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f"expected true/false, got {value!r}")
    return value


def _text(value: Any) -> str:
    if not isinstance(value, str):
        raise ValueError(f"expected a string, got {value!r}")
    return value


def _sample_size(value: Any):
    if value == "all":
        return "all"
    return _integer(value)


def _build(key: str, factory: Callable[..., Any], **kwargs: Any) -> Any:
    try:
        return factory(**kwargs)
    except DomainError as exc:
        raise ConfigError(str(exc), key) from None


def config_from_dict(data: Any) -> ScenarioConfig:
    root = _Section(
        data, "", ("schedule", "strategy", "policy", "sync", "benign_mode", "threshold", "seed")
    )

    sched = root.section("schedule", ("query_count", "interval_s", "start_s"))
    schedule = _build(
        "schedule",
        QuerySchedule,
        query_count=sched.get("query_count", _integer, 24),
        interval=sched.get("interval_s", _integer, 3600),
        start=sched.get("start_s", _integer, 0),
    )

    strat = root.section("strategy", ("mode", "k", "p", "payload", "mechanism_tag"))
    mode_text = strat.get("mode", _text, "none")
    try:
        mode = StrategyMode(mode_text)
    except ValueError:
        raise ConfigError(
            f"unknown mode {mode_text!r} (expected none, deterministic or bernoulli)",
            strat.key("mode"),
        ) from None
    pay = strat.section("payload", ("M", "ttl_s", "enforce_wire_fit", "mtu", "qname", "edns"))
    wire = _build(
        pay.path,
        WireParams,
        mtu=pay.get("mtu", _integer, 1500),
        qname=pay.get("qname", _text, "pool.ntp.org"),
        edns=pay.get("edns", _boolean, True),
    )
    payload = _build(
        pay.path,
        PayloadSpec,
        address_count=pay.get("M", _integer, 89),
        ttl=pay.get("ttl_s", _integer, 90_000),
        enforce_wire_fit=pay.get("enforce_wire_fit", _boolean, True),
        wire=wire,
    )
    k = strat.get("k", _integer, None)
    p = strat.get("p", _number, None)
    if mode is StrategyMode.DETERMINISTIC and k is None:
        raise ConfigError("required for deterministic mode", strat.key("k"))
    if mode is StrategyMode.BERNOULLI and p is None:
        raise ConfigError("required for bernoulli mode", strat.key("p"))
    strategy = _build(
        "strategy",
        AttackStrategy,
        mode=mode,
        k=k,
        p=None if p is None else float(p),
        payload=payload,
        mechanism_tag=strat.get("mechanism_tag", _text, "fragmentation"),
    )

    pol = root.section("policy", ("enabled", "max_addresses", "max_ttl_s"))
    policy = _build(
        "policy",
        MitigationPolicy,
        enabled=pol.get("enabled", _boolean, False),
        max_addresses=pol.get("max_addresses", _integer, 4),
        max_ttl=pol.get("max_ttl_s", _integer, 3600),
    )

    syn = root.section("sync", ("m", "jitter_ms", "delta_ms", "rounds"))
    sync = _build(
        "sync",
        SyncConfig,
        sample_size_m=syn.get("m", _sample_size, "all"),
        benign_jitter_halfwidth=syn.get("jitter_ms", _number, 10),
        malicious_shift_delta=syn.get("delta_ms", _number, 100),
    )
    rounds = syn.get("rounds", _integer, 1)

    universe_size = _benign_mode(root)

    threshold_text = root.get("threshold", _text, Threshold.STRICT_TWO_THIRDS.value)
    try:
        threshold = Threshold(threshold_text)
    except ValueError:
        raise ConfigError(f"unknown threshold {threshold_text!r}", "threshold") from None

    return _build(
        "<root>",
        ScenarioConfig,
        schedule=schedule,
        strategy=strategy,
        policy=policy,
        sync=sync,
        benign_universe_size=universe_size,
        sync_rounds=rounds,
        seed=root.get("seed", _integer, 0),
        threshold=threshold,
    )


def _benign_mode(root: _Section) -> Optional[int]:
    raw = root.data.get("benign_mode", "distinct")
    if raw is None or raw == "distinct":
        return None
    if isinstance(raw, dict):
        section = root.section("benign_mode", ("universe_size",))
        size = section.get("universe_size", _integer, None)
        if size is None or size < BENIGN_PER_RESPONSE:
            raise ConfigError(f"must be an integer >= {BENIGN_PER_RESPONSE}", section.key("universe_size"))
        return size
    raise ConfigError("expected 'distinct' or {universe_size: N}", "benign_mode")


def config_to_dict(config: ScenarioConfig) -> dict[str, Any]:
    strategy = config.strategy
    payload = strategy.payload
    return {
        "schedule": {
            "query_count": config.schedule.query_count,
            "interval_s": config.schedule.interval,
            "start_s": config.schedule.start,
        },
        "strategy": {
            "mode": strategy.mode.value,
            "k": strategy.k,
            "p": strategy.p,
            "payload": {
                "M": payload.address_count,
                "ttl_s": payload.ttl,
                "enforce_wire_fit": payload.enforce_wire_fit,
                "mtu": payload.wire.mtu,
                "qname": payload.wire.qname,
                "edns": payload.wire.edns,
            },
            "mechanism_tag": strategy.mechanism_tag,
        },
        "policy": {
            "enabled": config.policy.enabled,
            "max_addresses": config.policy.max_addresses,
            "max_ttl_s": config.policy.max_ttl,
        },
        "sync": {
            "m": config.sync.sample_size_m,
            "jitter_ms": config.sync.benign_jitter_halfwidth,
            "delta_ms": config.sync.malicious_shift_delta,
            "rounds": config.sync_rounds,
        },
        "benign_mode": (
            "distinct"
            if config.benign_universe_size is None
            else {"universe_size": config.benign_universe_size}
        ),
        "threshold": config.threshold.value,
        "seed": config.seed,
    }


def load_preset(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError(f"config not found: no preset named {name!r}")
    text = resources.files("chronos_dns").joinpath("presets", f"{name}.yaml").read_text()
    return config_from_dict(yaml.safe_load(text))


def load_config(ref: str | Path) -> ScenarioConfig:
    """Load a config from a YAML file path, or by preset name."""
    path = Path(ref)
    if path.is_file():
        try:
            data = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from None
        return config_from_dict(data)
    if str(ref) in PRESETS:
        return load_preset(str(ref))
    raise ConfigError(f"config not found: {ref}")
