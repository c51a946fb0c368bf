"""Scenario configuration: a YAML document with a closed schema.

Top-level keys (all but ``n_voters`` optional)::

    seed: 42                 # 64-bit unsigned
    group: test256           # toy23 | test256 | modp2048
    election_id: demo
    n_voters: 100
    n_candidates: 3
    n_trustees: 5
    threshold: 3
    n_officers: 5
    officer_quorum: 3
    mfca_threshold: 0.8
    spoil_fraction: 0.1
    abstain_fraction: 0.05
    vote_distribution: [2, 1, 1]
    max_ring_size: 64
    phase_schedule: {registration: [10, 20], voting: [30, 40]}
    adversaries:
      - {kind: DoubleVote}
      - {kind: TrusteeDropout, count: 2}
      - {kind: TamperTranscript, field: counts}

Unknown keys anywhere raise :class:`ConfigInvalid`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

import yaml


class ConfigInvalid(ValueError):
    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class AdversaryKind(str, Enum):
    DOUBLE_VOTE = "DoubleVote"
    UNREGISTERED_CAST = "UnregisteredCast"
    MALFORMED_BINARY_PROOF = "MalformedBinaryProof"
    MALFORMED_SUM_PROOF = "MalformedSumProof"
    FORGED_CREDENTIAL = "ForgedCredential"
    STALE_ATTESTATION = "StaleAttestation"
    EARLY_DECRYPT_ATTEMPT = "EarlyDecryptAttempt"
    TRUSTEE_DROPOUT = "TrusteeDropout"
    TAMPER_TRANSCRIPT = "TamperTranscript"


# parameters accepted per kind, with defaults
_PARAMS: dict[AdversaryKind, dict[str, Any]] = {
    AdversaryKind.DOUBLE_VOTE: {},
    AdversaryKind.UNREGISTERED_CAST: {},
    AdversaryKind.MALFORMED_BINARY_PROOF: {},
    AdversaryKind.MALFORMED_SUM_PROOF: {},
    AdversaryKind.FORGED_CREDENTIAL: {},
    AdversaryKind.STALE_ATTESTATION: {"node": "po-1"},
    AdversaryKind.EARLY_DECRYPT_ATTEMPT: {"shares": None},
    AdversaryKind.TRUSTEE_DROPOUT: {"count": 1},
    AdversaryKind.TAMPER_TRANSCRIPT: {"field": "payload", "entry": None},
}


@dataclass(frozen=True)
class AdversaryAction:
    kind: AdversaryKind
    params: tuple[tuple[str, Any], ...] = ()

    def get(self, name: str) -> Any:
        return dict(self.params).get(name, _PARAMS[self.kind].get(name))

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind.value, **{k: v for k, v in self.params}}


@dataclass(frozen=True)
class ScenarioConfig:
    n_voters: int
    seed: int = 0
    group: str = "test256"
    election_id: str = "election"
    n_candidates: int = 3
    n_trustees: int = 5
    threshold: int = 3
    n_officers: int = 5
    officer_quorum: int = 3
    mfca_threshold: float = 0.8
    spoil_fraction: float = 0.0
    abstain_fraction: float = 0.0
    vote_distribution: tuple[float, ...] | None = None
    max_ring_size: int = 64
    phase_schedule: tuple[tuple[str, int, int], ...] = (("registration", 10, 20), ("voting", 30, 40))
    adversaries: tuple[AdversaryAction, ...] = field(default=())

    def __post_init__(self) -> None:
        validate(self)

    @property
    def weights(self) -> tuple[float, ...]:
        return self.vote_distribution or (1.0,) * self.n_candidates

    def window(self, name: str) -> tuple[int, int]:
        return next((lo, hi) for n, lo, hi in self.phase_schedule if n == name)

    def echo(self) -> dict[str, Any]:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "adversaries":
                v = [a.describe() for a in v]
            elif f.name == "phase_schedule":
                v = {n: [lo, hi] for n, lo, hi in v}
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


def _int(name: str, v: Any, lo: int = 0, hi: int | None = None) -> None:
    if not isinstance(v, int) or isinstance(v, bool) or v < lo or (hi is not None and v > hi):
        raise ConfigInvalid(name, f"expected integer in [{lo}, {hi if hi is not None else 'inf'}], got {v!r}")


def _fraction(name: str, v: Any) -> None:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
        raise ConfigInvalid(name, f"expected a number in [0, 1], got {v!r}")


def validate(c: ScenarioConfig) -> None:
    _int("seed", c.seed, 0, 2**64 - 1)
    from ..crypto.group import GROUPS

    if c.group not in GROUPS:
        raise ConfigInvalid("group", f"unknown group {c.group!r}")
    if not isinstance(c.election_id, str) or not c.election_id:
        raise ConfigInvalid("election_id", "must be a non-empty string")
    _int("n_voters", c.n_voters, 1)
    _int("n_candidates", c.n_candidates, 2)
    _int("n_trustees", c.n_trustees, 1)
    _int("threshold", c.threshold, 1, c.n_trustees)
    _int("n_officers", c.n_officers, 1)
    _int("officer_quorum", c.officer_quorum, 1, c.n_officers)
    _fraction("mfca_threshold", c.mfca_threshold)
    _fraction("spoil_fraction", c.spoil_fraction)
    _fraction("abstain_fraction", c.abstain_fraction)
    if c.spoil_fraction + c.abstain_fraction > 1.0:
        raise ConfigInvalid("spoil_fraction", "spoil_fraction + abstain_fraction exceeds 1")
    _int("max_ring_size", c.max_ring_size, 0)
    if c.vote_distribution is not None:
        w = c.vote_distribution
        if len(w) != c.n_candidates:
            raise ConfigInvalid("vote_distribution", f"need {c.n_candidates} weights, got {len(w)}")
        if any(isinstance(x, bool) or not isinstance(x, (int, float)) or x < 0 for x in w) or not any(w):
            raise ConfigInvalid("vote_distribution", "weights must be nonnegative and not all zero")
    names = [n for n, _, _ in c.phase_schedule]
    if sorted(names) != ["registration", "voting"]:
        raise ConfigInvalid("phase_schedule", "need exactly 'registration' and 'voting' windows")
    (r_lo, r_hi), (v_lo, v_hi) = c.window("registration"), c.window("voting")
    for n, lo, hi in c.phase_schedule:
        _int(f"phase_schedule.{n}", lo, 0)
        _int(f"phase_schedule.{n}", hi, lo)
    if r_lo < 10 or v_lo <= r_hi:
        raise ConfigInvalid("phase_schedule", "registration must open at tick >= 10 and close before voting opens")
    for a in c.adversaries:
        _check_adversary(a, c)


def _check_adversary(a: AdversaryAction, c: ScenarioConfig) -> None:
    name = f"adversaries.{a.kind.value}"
    if a.kind == AdversaryKind.EARLY_DECRYPT_ATTEMPT:
        shares = a.get("shares")
        if shares is None:
            shares = c.threshold - 1
        _int(f"{name}.shares", shares, 0, c.threshold - 1)
    elif a.kind == AdversaryKind.TRUSTEE_DROPOUT:
        _int(f"{name}.count", a.get("count"), 0, c.n_trustees)
    elif a.kind == AdversaryKind.STALE_ATTESTATION:
        node = a.get("node")
        valid = {f"po-{i}" for i in range(1, c.n_officers + 1)} | {"registry"}
        if node not in valid:
            raise ConfigInvalid(f"{name}.node", f"unknown node {node!r}")
    elif a.kind == AdversaryKind.TAMPER_TRANSCRIPT:
        from .tamper import FIELDS

        if a.get("field") not in FIELDS:
            raise ConfigInvalid(f"{name}.field", f"expected one of {sorted(FIELDS)}")
        entry = a.get("entry")
        if entry is not None and not isinstance(entry, (int, str)):
            raise ConfigInvalid(f"{name}.entry", "expected an index or 'kind:n'")


def _adversary_from(raw: Any, i: int) -> AdversaryAction:
    if not isinstance(raw, Mapping) or "kind" not in raw:
        raise ConfigInvalid(f"adversaries[{i}]", "expected a mapping with a 'kind' key")
    try:
        kind = AdversaryKind(raw["kind"])
    except ValueError:
        raise ConfigInvalid(f"adversaries[{i}].kind", f"unknown adversary {raw['kind']!r}") from None
    params = {k: v for k, v in raw.items() if k != "kind"}
    unknown = set(params) - set(_PARAMS[kind])
    if unknown:
        raise ConfigInvalid(f"adversaries[{i}].{sorted(unknown)[0]}", f"unknown parameter for {kind.value}")
    return AdversaryAction(kind, tuple(sorted(params.items())))


def config_from_mapping(raw: Any) -> ScenarioConfig:
    if not isinstance(raw, Mapping):
        raise ConfigInvalid("<root>", "scenario must be a mapping")
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigInvalid(unknown[0], "unknown key")
    if "n_voters" not in raw:
        raise ConfigInvalid("n_voters", "required")
    kwargs = dict(raw)
    if "vote_distribution" in kwargs and kwargs["vote_distribution"] is not None:
        if not isinstance(kwargs["vote_distribution"], list):
            raise ConfigInvalid("vote_distribution", "expected a list")
        kwargs["vote_distribution"] = tuple(kwargs["vote_distribution"])
    if "phase_schedule" in kwargs:
        sched = kwargs["phase_schedule"]
        if not isinstance(sched, Mapping):
            raise ConfigInvalid("phase_schedule", "expected a mapping")
        out = []
        for name, window in sched.items():
            if name not in ("registration", "voting"):
                raise ConfigInvalid(f"phase_schedule.{name}", "unknown key")
            if not isinstance(window, list) or len(window) != 2:
                raise ConfigInvalid(f"phase_schedule.{name}", "expected [open, close]")
            out.append((name, window[0], window[1]))
        kwargs["phase_schedule"] = tuple(sorted(out))
    if "adversaries" in kwargs:
        advs = kwargs["adversaries"] or []
        if not isinstance(advs, list):
            raise ConfigInvalid("adversaries", "expected a list")
        kwargs["adversaries"] = tuple(_adversary_from(a, i) for i, a in enumerate(advs))
    try:
        return ScenarioConfig(**kwargs)
    except TypeError as exc:
        raise ConfigInvalid("<root>", str(exc)) from None


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigInvalid("<file>", f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigInvalid("<file>", f"not valid YAML: {exc}") from None
    return config_from_mapping(raw)
