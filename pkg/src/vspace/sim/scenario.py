"""Drive one election end to end from a :class:`ScenarioConfig`."""

from __future__ import annotations

import json
import time
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

from ..auditor import AuditReport, individual_verify, verify_transcript
from ..crypto.errors import InsufficientShares
from ..crypto.group import derive_rng, get_group
from ..crypto.schnorr import keygen
from ..identity import attest_node, measure
from ..ledger import PayloadKind, read_transcript
from ..protocol import (
    AttestationRejected,
    CastStatus,
    CredentialRejected,
    DuplicateNullifier,
    InvalidCast,
    NotRegistered,
    Phase,
    PhaseViolation,
    build_ballot,
    certify_result,
    close_registration,
    close_voting,
    finalize_tally,
    open_registration,
    register_voter,
    run_hyok_ceremony,
    setup_election,
    submit_cast,
    submit_decryption_share,
)
from ..protocol.records import tracker_for
from ..protocol.state import ElectionState
from . import adversary as adv
from .config import AdversaryAction, AdversaryKind, ScenarioConfig
from .events import EventBus
from .tamper import tamper
from .world import (
    NODE_IMAGE,
    SETUP_TICK,
    Keyring,
    Voter,
    authenticate,
    build_keyring,
    draft_manifest,
    make_voter,
    node_attestations,
)


class Decision(str, Enum):
    COMMIT = "commit"
    SPOIL = "spoil"
    ABSTAIN = "abstain"


@dataclass(frozen=True)
class VoterIntent:
    choice: int
    decision: Decision = Decision.COMMIT


def ground_truth_oracle(intents: Sequence[VoterIntent], k: int) -> tuple[int, ...]:
    """Per-candidate totals over committed voters, straight from recorded intent."""
    counts = [0] * k
    for it in intents:
        if it.decision == Decision.COMMIT:
            counts[it.choice] += 1
    return tuple(counts)


@dataclass
class AdversaryOutcome:
    kind: str
    params: dict[str, Any]
    rejected: bool
    detail: str
    outcome: str = "pending"

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": self.params, "rejected": self.rejected,
                "detail": self.detail, "outcome": self.outcome}


@dataclass
class SimReport:
    seed: int
    config: dict[str, Any]
    announced_counts: tuple[int, ...] | None
    ground_truth_counts: tuple[int, ...]
    audit: AuditReport | None
    adversaries: list[AdversaryOutcome]
    metrics: dict[str, Any]
    halted: dict[str, str] | None = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def counts_match(self) -> bool:
        return self.announced_counts is not None and tuple(self.announced_counts) == tuple(self.ground_truth_counts)

    @property
    def ok(self) -> bool:
        """Certified with a passing audit, correct counts, and every adversary repelled."""
        return (self.halted is None and self.audit is not None and self.audit.overall and self.counts_match
                and all(a.outcome == "repelled" for a in self.adversaries))

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "config": self.config,
            "announced_counts": None if self.announced_counts is None else list(self.announced_counts),
            "ground_truth_counts": list(self.ground_truth_counts),
            "counts_match": self.counts_match,
            "audit": None if self.audit is None else self.audit.to_dict(),
            "adversaries": [a.to_dict() for a in self.adversaries],
            "metrics": self.metrics,
            "halted": self.halted,
        }

    def to_json(self) -> str:
        """Deterministic for a given config; wall-clock figures live in :meth:`timings_json`."""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def timings_json(self) -> str:
        casts = self.metrics.get("cast_entries", 0)
        voting = self.timings.get("voting", 0.0)
        out = {"seconds": {k: round(v, 6) for k, v in self.timings.items()},
               "casts_per_second": round(casts / voting, 3) if voting > 0 else None}
        return json.dumps(out, indent=2, sort_keys=True) + "\n"


class ScenarioHalted(RuntimeError):
    """An adversary legitimately stopped the election before certification."""

    def __init__(self, phase: Phase, cause: str, transcript: bytes, report: SimReport) -> None:
        super().__init__(f"halted in {phase.name.title()}: {cause}")
        self.phase = phase
        self.cause = cause
        self.transcript = transcript
        self.report = report


class _Clock:
    def __init__(self) -> None:
        self.spent: dict[str, float] = {}
        self._name: str | None = None
        self._t0 = 0.0

    def start(self, name: str) -> None:
        self.stop()
        self._name, self._t0 = name, time.perf_counter()

    def stop(self) -> None:
        if self._name is not None:
            self.spent[self._name] = self.spent.get(self._name, 0.0) + time.perf_counter() - self._t0
            self._name = None


def _draw_intents(config: ScenarioConfig) -> list[VoterIntent]:
    rng = derive_rng(config.seed, "intents")
    out = []
    for _ in range(config.n_voters):
        u = rng.random()
        if u < config.abstain_fraction:
            decision = Decision.ABSTAIN
        elif u < config.abstain_fraction + config.spoil_fraction:
            decision = Decision.SPOIL
        else:
            decision = Decision.COMMIT
        choice = rng.choices(range(config.n_candidates), weights=config.weights)[0]
        out.append(VoterIntent(choice, decision))
    return out


class _Run:
    def __init__(self, config: ScenarioConfig) -> None:
        self.config = config
        self.params = get_group(config.group)
        self.keys: Keyring = build_keyring(self.params, config.seed, config.n_officers, config.n_trustees)
        self.rng = derive_rng(config.seed, "scenario")
        self.bus = EventBus(derive_rng(config.seed, "bus"))
        self.clock = _Clock()
        self.state: ElectionState | None = None
        self.intents = _draw_intents(config)
        self.outcomes: dict[AdversaryKind, AdversaryOutcome] = {}
        self.adversaries = {a.kind: a for a in config.adversaries}
        self.candidates = [f"candidate-{i + 1}" for i in range(config.n_candidates)]
        self.rejected_events = 0
        self.trackers: list[bytes] = []
        self.receipt_ok: bool | None = None

    def _record(self, action: AdversaryAction, rejected: bool, detail: str) -> None:
        self.outcomes[action.kind] = AdversaryOutcome(action.kind.value, dict(action.params), rejected, detail)

    def _has(self, kind: AdversaryKind) -> AdversaryAction | None:
        return self.adversaries.get(kind)

    # phases

    def setup(self) -> None:
        c, p, keys = self.config, self.params, self.keys
        draft = draft_manifest(p, keys, c.election_id, self.candidates, c.officer_quorum, c.threshold,
                               c.window("registration"), c.window("voting"), c.mfca_threshold, c.max_ring_size)
        reports = node_attestations(p, keys, SETUP_TICK)
        stale = self._has(AdversaryKind.STALE_ATTESTATION)
        if stale:
            node = stale.get("node")
            old = attest_node(p, keys.authority, node, measure(NODE_IMAGE), 1)
            doctored = [old if r.node_id == node else r for r in reports]
            try:
                setup_election(p, draft, keys.officers, doctored, keys.registry, SETUP_TICK)
                self._record(stale, False, "stale attestation accepted")
            except AttestationRejected as exc:
                self.rejected_events += 1
                self._record(stale, True, f"AttestationRejected: {exc}")
        self.state = setup_election(p, draft, keys.officers, reports, keys.registry, SETUP_TICK)
        run_hyok_ceremony(self.state, keys.trustees, self.rng)
        open_registration(self.state, keys.officers)

    def registration(self) -> tuple[list[Voter], dict[AdversaryKind, Voter]]:
        c, p, state = self.config, self.params, self.state
        lo, _ = c.window("registration")
        state.advance(lo)
        voters = [make_voter(p, self.keys, c.election_id, c.seed, i) for i in range(c.n_voters)]
        extras = {}
        for kind in (AdversaryKind.DOUBLE_VOTE, AdversaryKind.MALFORMED_BINARY_PROOF,
                     AdversaryKind.MALFORMED_SUM_PROOF):
            if self._has(kind):
                extras[kind] = make_voter(p, self.keys, c.election_id, c.seed, 0, label=f"adversary-{kind.value}")
        for v in voters:
            self.bus.send(f"voter-{v.index}", "register", v)
        for v in extras.values():
            self.bus.send(v.label, "register", v)
        forged = self._has(AdversaryKind.FORGED_CREDENTIAL)
        if forged:
            self.bus.send("adversary", "forged-credential", forged)

        for ev in self.bus.drain():
            if ev.kind == "register":
                v = ev.body
                register_voter(state, v.did_doc, v.credential, authenticate(v, state.clock))
            else:
                rogue = keygen(p, self.rng)
                holder = keygen(p, self.rng)
                doc, cred = adv.forged_credential(p, rogue, holder, c.election_id, 1000)
                try:
                    register_voter(state, doc, cred, authenticate(Voter(-1, holder, doc, cred, rng=self.rng),
                                                                  state.clock))
                    self._record(ev.body, False, "forged credential registered")
                except CredentialRejected as exc:
                    self.rejected_events += 1
                    self._record(ev.body, True, f"CredentialRejected: {exc}")
        state.advance(c.window("registration")[1])
        close_registration(state, self.keys.officers)
        return voters, extras

    def voting(self, voters: list[Voter], extras: dict[AdversaryKind, Voter]) -> None:
        c, p, state = self.config, self.params, self.state
        state.advance(c.window("voting")[0])
        for v, it in zip(voters, self.intents):
            if it.decision != Decision.ABSTAIN:
                self.bus.send(f"voter-{v.index}", "cast", (v, it))
        for kind, v in extras.items():
            self.bus.send(v.label, "adversary", (kind, v))
        if self._has(AdversaryKind.UNREGISTERED_CAST):
            self.bus.send("outsider", "adversary", (AdversaryKind.UNREGISTERED_CAST, None))
        if self._has(AdversaryKind.EARLY_DECRYPT_ATTEMPT):
            self.bus.send("trustee-1", "adversary", (AdversaryKind.EARLY_DECRYPT_ATTEMPT, None))
        if self._has(AdversaryKind.DOUBLE_VOTE):
            # FIFO per sender: the second ballot always follows the first
            v = extras[AdversaryKind.DOUBLE_VOTE]
            self.bus.send(v.label, "second-ballot", v)

        for ev in self.bus.drain():
            if ev.kind == "cast":
                v, it = ev.body
                status = CastStatus.SPOILED if it.decision == Decision.SPOIL else CastStatus.COMMITTED
                record = build_ballot(state, v.kp.sk, it.choice, status, v.rng)
                submit_cast(state, record)
                self.trackers.append(record.tracker)
            elif ev.kind == "second-ballot":
                self._second_ballot(ev.body)
            else:
                self._adversary_cast(*ev.body)
        state.advance(c.window("voting")[1])

    def _second_ballot(self, v: Voter) -> None:
        action = self.adversaries[AdversaryKind.DOUBLE_VOTE]
        record = adv.second_ballot(self.state, v.kp.sk, self.config.n_candidates - 1, v.rng)
        try:
            submit_cast(self.state, record)
            self._record(action, False, "second ballot accepted")
        except DuplicateNullifier as exc:
            self.rejected_events += 1
            self._record(action, True, f"DuplicateNullifier: {exc}")

    def _adversary_cast(self, kind: AdversaryKind, v: Voter | None) -> None:
        state, p = self.state, self.params
        action = self.adversaries[kind]
        if kind == AdversaryKind.DOUBLE_VOTE:
            # first ballot is honest and counts
            record = build_ballot(state, v.kp.sk, 0, CastStatus.COMMITTED, v.rng)
            submit_cast(state, record)
            self.intents.append(VoterIntent(0))
            return
        if kind == AdversaryKind.EARLY_DECRYPT_ATTEMPT:
            t = self.keys.trustees[0]
            shares = t.decryption_shares(p, state.manifest_hash, state.running_aggregate(), state.vks[t.index],
                                         self.rng)
            try:
                submit_decryption_share(state, t.index, shares, t.kp)
                self._record(action, False, "decryption share accepted during voting")
            except PhaseViolation as exc:
                self.rejected_events += 1
                self._record(action, True, f"PhaseViolation: {exc}")
            return
        if kind == AdversaryKind.UNREGISTERED_CAST:
            outsider = keygen(p, self.rng)
            errors = []
            try:
                submit_cast(state, adv.outsider_ballot(state, outsider, self.rng))
            except InvalidCast as exc:
                errors.append(type(exc).__name__)
            try:
                build_ballot(state, outsider.sk, 0, CastStatus.COMMITTED, self.rng)
            except NotRegistered as exc:
                errors.append(type(exc).__name__)
            self.rejected_events += len(errors)
            self._record(action, len(errors) == 2, ", ".join(errors) or "outsider ballot accepted")
            return
        self.intents.append(VoterIntent(0, Decision.ABSTAIN))
        if kind == AdversaryKind.MALFORMED_BINARY_PROOF:
            record = adv.bad_binary_ballot(state, v.kp.sk, v.rng)
        else:
            record = adv.bad_sum_ballot(state, v.kp.sk, v.rng)
        try:
            submit_cast(state, record)
            self._record(action, False, "malformed ballot accepted")
        except InvalidCast as exc:
            self.rejected_events += 1
            self._record(action, True, f"{type(exc).__name__}: {exc}")

    def tally(self) -> None:
        c, p, state = self.config, self.params, self.state
        close_voting(state, self.keys.officers)
        dropout = self._has(AdversaryKind.TRUSTEE_DROPOUT)
        present = self.keys.trustees[: c.n_trustees - (dropout.get("count") if dropout else 0)]
        early = self._has(AdversaryKind.EARLY_DECRYPT_ATTEMPT)
        first = present
        if early:
            s = early.get("shares")
            s = c.threshold - 1 if s is None else s
            first = present[:s]
        for t in first:
            self._share(t)
        if early:
            try:
                finalize_tally(state)
                self._record(early, False, "tally finalized below threshold")
            except InsufficientShares as exc:
                self.rejected_events += 1
                o = self.outcomes.get(AdversaryKind.EARLY_DECRYPT_ATTEMPT)
                ok = o is None or o.rejected
                self._record(early, ok, f"{o.detail + '; ' if o else ''}InsufficientShares: {exc}")
            for t in present[len(first):]:
                self._share(t)
        finalize_tally(state)

    def _share(self, t) -> None:
        state = self.state
        shares = t.decryption_shares(self.params, state.manifest_hash, state.aggregate, state.vks[t.index], self.rng)
        submit_decryption_share(state, t.index, shares, t.kp)


def _metrics(run: _Run, data: bytes) -> dict[str, Any]:
    entries, checkpoints = read_transcript(data)
    kinds = Counter(e.payload_kind.name for e in entries)
    casts = [e for e in entries if e.payload_kind == PayloadKind.CAST]
    cast_bytes = sum(len(e.to_bytes()) for e in casts)
    return {
        "transcript_bytes": len(data),
        "entries": len(entries),
        "checkpoints": len(checkpoints),
        "entries_by_kind": dict(sorted(kinds.items())),
        "cast_entries": len(casts),
        "bytes_per_cast_entry": round(cast_bytes / len(casts), 3) if casts else 0,
        "bytes_per_voter": round(len(data) / run.config.n_voters, 3) if run.config.n_voters else 0,
        "registered": len(run.state.registrations) if run.state else 0,
        "committed": run.state.committed if run.state else 0,
        "spoiled": run.state.spoiled if run.state else 0,
        "rejected_events": run.rejected_events,
        "messages_delivered": run.bus.delivered,
    }


def _finish(run: _Run, audit: AuditReport | None, data: bytes, halted=None) -> SimReport:
    announced = run.state.tally.counts if run.state and run.state.tally else None
    truth = ground_truth_oracle(run.intents, run.config.n_candidates)
    outcomes = []
    for a in run.config.adversaries:
        o = run.outcomes.get(a.kind) or AdversaryOutcome(a.kind.value, dict(a.params), False, "action never executed")
        outcomes.append(o)
    counts_ok = announced is not None and tuple(announced) == truth
    for o in outcomes:
        if o.kind == AdversaryKind.TRUSTEE_DROPOUT.value:
            # dropping at most n - t trustees must not stop the election
            if halted is None:
                o.rejected, o.detail = True, "tally completed without the dropped trustees"
            else:
                o.detail = f"too few trustees left; halted with {halted['cause']}"
        o.outcome = "repelled" if o.rejected and counts_ok else "succeeded"
    return SimReport(run.config.seed, run.config.echo(), announced, truth, audit, outcomes,
                     _metrics(run, data), halted, dict(run.clock.spent))


def run_scenario(config: ScenarioConfig) -> tuple[bytes, SimReport]:
    """Run Setup through Certified; returns the VSPC1 transcript and the report.

    Raises :class:`ScenarioHalted` if an adversary legitimately blocks
    certification. Equal configs give byte-identical transcripts and
    ``report.to_json()``.
    """
    run = _Run(config)
    run.clock.start("setup")
    run.setup()
    run.clock.start("registration")
    voters, extras = run.registration()
    run.clock.start("voting")
    run.voting(voters, extras)
    run.clock.start("tally")
    state = run.state
    try:
        run.tally()
    except InsufficientShares as exc:
        run.clock.stop()
        data = state.ledger.to_bytes()
        report = _finish(run, verify_transcript(data, run.params, require_certification=False), data,
                         {"phase": "Tally", "cause": "InsufficientShares", "detail": str(exc)})
        raise ScenarioHalted(Phase.TALLY, "InsufficientShares", data, report) from exc

    run.clock.start("certification")
    pre = verify_transcript(state.ledger.to_bytes(), run.params, require_certification=False)
    certify_result(state, run.keys.officers, pre)
    run.clock.start("audit")
    data = state.ledger.to_bytes()
    audit = verify_transcript(data, run.params)
    if run.trackers:
        receipt = individual_verify(data, run.trackers[0], run.params)
        run.receipt_ok = receipt.verified
    tamper_action = run._has(AdversaryKind.TAMPER_TRANSCRIPT)
    if tamper_action:
        run.clock.start("tamper")
        forged, expected = tamper(data, run.params, run.keys, tamper_action.get("field"), tamper_action.get("entry"))
        failing = verify_transcript(forged, run.params).failing()
        run._record(tamper_action, expected in failing,
                    f"auditor failed {', '.join(failing) or 'nothing'} (expected {expected})")
    run.clock.stop()
    report = _finish(run, audit, data)
    if run.trackers:
        report.metrics["receipt_verified"] = run.receipt_ok
    return data, report


def tracker_list(data: bytes) -> list[bytes]:
    """Trackers of every cast entry in a transcript, in ledger order."""
    entries, _ = read_transcript(data)
    return [tracker_for(e.payload) for e in entries if e.payload_kind == PayloadKind.CAST]
