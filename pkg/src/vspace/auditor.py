"""Secret-free transcript auditor.

Input is transcript bytes plus, optionally, the expected group. Every
acceptance decision of the protocol is re-derived independently from the
public entries; failed checks are recorded and the audit keeps going, so
the report always carries the full matrix.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Sequence

from .crypto.dkg import DecryptionShare, combine_shares, election_key, verification_key, verify_share_proof
from .crypto.dlog import decode_dlog
from .crypto.elgamal import IDENTITY, Ciphertext, ct_combine
from .crypto.encoding import decode, encode_int
from .crypto.errors import CryptoError, DecodeError, NotInRange
from .crypto.group import GroupParams, get_group
from .crypto.lsag import canonical_ring, ring_digest
from .crypto.schnorr import schnorr_verify
from .identity import AttestationReport, did_for_pk, verify_attestation, verify_presentation
from .ledger import (
    Checkpoint,
    InclusionProof,
    LedgerEntry,
    ParseError,
    PayloadKind,
    inclusion_proofs,
    read_transcript,
    verify_chain,
    verify_checkpoint,
    verify_inclusion,
)
from .protocol.errors import ProtocolError
from .protocol.manifest import REGISTRY, ElectionManifest, Phase, trustee_id
from .protocol.records import (
    CERTIFICATION_DOMAIN,
    CastRecord,
    CastStatus,
    CertificationRecord,
    RegistrationRecord,
    TallyRecord,
    certification_message,
    check_ballot_proofs,
    check_ring_signature,
    partition_ring,
    tracker_for,
)
from .protocol.state import tally_context

TAGS = (
    "Eligibility",
    "Uniqueness",
    "Privacy",
    "UniversalAnonymity",
    "Fairness",
    "Accuracy",
    "UniversalVerifiability",
    "IndividualVerifiability",
    "Robustness",
    "SelfTallying",
)

# check_id -> requirement tag, in report order
CHECKS = {
    "manifest.quorum": "UniversalVerifiability",
    "chain.integrity": "UniversalVerifiability",
    "checkpoint.quorum": "UniversalVerifiability",
    "phase.order": "Fairness",
    "attestation.nodes": "Robustness",
    "dkg.dealings": "Robustness",
    "registration.credentials": "Eligibility",
    "ring.freeze": "UniversalAnonymity",
    "cast.ring_signature": "Eligibility",
    "cast.nullifier": "Uniqueness",
    "cast.binary_proofs": "Accuracy",
    "cast.sum_proof": "Accuracy",
    "cast.identifier_scan": "Privacy",
    "tally.aggregate": "Accuracy",
    "tally.shares": "UniversalVerifiability",
    "tally.threshold": "Fairness",
    "tally.result": "Accuracy",
    "tally.self_tallying": "SelfTallying",
    "certification.binding": "Accuracy",
    "certification.quorum": "UniversalVerifiability",
    "receipt.inclusion": "IndividualVerifiability",
}

_ALLOWED = {
    Phase.SETUP: {PayloadKind.ATTESTATION_RECORD, PayloadKind.DEALING, PayloadKind.ELECTION_KEY},
    Phase.REGISTRATION: {PayloadKind.REGISTRATION},
    Phase.VOTING: {PayloadKind.CAST},
    Phase.TALLY: {PayloadKind.AGGREGATE_TALLY, PayloadKind.DECRYPTION_SHARE, PayloadKind.RESULT,
                  PayloadKind.CERTIFICATION},
    Phase.CERTIFIED: set(),
}

_MALFORMED = (DecodeError, CryptoError, TypeError, ValueError, KeyError, IndexError)


class TrackerNotFound(LookupError):
    pass


@dataclass(frozen=True)
class Check:
    check_id: str
    tag: str
    passed: bool
    detail: str

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


@dataclass(frozen=True)
class AuditReport:
    checks: tuple[Check, ...]
    recomputed_counts: tuple[int, ...] | None = None
    certified: bool = False

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.check_id for c in self.checks if not c.passed]

    def check(self, check_id: str) -> Check:
        return next(c for c in self.checks if c.check_id == check_id)

    def tag_verdicts(self) -> dict[str, bool]:
        out = {}
        for tag in TAGS:
            rows = [c for c in self.checks if c.tag == tag]
            out[tag] = bool(rows) and all(c.passed for c in rows)
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "overall": "pass" if self.overall else "fail",
            "certified": self.certified,
            "recomputed_counts": None if self.recomputed_counts is None else list(self.recomputed_counts),
            "requirements": {tag: ("pass" if ok else "fail") for tag, ok in self.tag_verdicts().items()},
            "checks": [
                {"check_id": c.check_id, "requirement": c.tag, "verdict": c.verdict, "detail": c.detail}
                for c in self.checks
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"overall: {'PASS' if self.overall else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  [{c.verdict.upper():4}] {c.check_id:26} {c.tag:24} {c.detail}")
        return "\n".join(lines) + "\n"


class _Collector:
    def __init__(self) -> None:
        self.failures: dict[str, list[str]] = defaultdict(list)
        self.notes: dict[str, str] = {}

    def fail(self, check_id: str, msg: str) -> None:
        self.failures[check_id].append(msg)

    def note(self, check_id: str, msg: str) -> None:
        self.notes[check_id] = msg

    def report(self, counts, certified: bool) -> AuditReport:
        checks = []
        for check_id, tag in CHECKS.items():
            fails = self.failures.get(check_id)
            if fails:
                detail = fails[0] if len(fails) == 1 else f"{fails[0]} (+{len(fails) - 1} more)"
                checks.append(Check(check_id, tag, False, detail))
            else:
                checks.append(Check(check_id, tag, True, self.notes.get(check_id, "ok")))
        return AuditReport(tuple(checks), counts, certified)


def _peek_group(entries: Sequence[LedgerEntry]) -> str:
    body = decode(entries[0].payload)[0]
    return body[12]


def load_manifest(entries: Sequence[LedgerEntry], expected_group: GroupParams | None):
    """Decode the manifest at index 0 and resolve its group."""
    if not entries or entries[0].payload_kind != PayloadKind.MANIFEST:
        raise DecodeError("transcript does not start with a manifest")
    label = _peek_group(entries)
    if expected_group is not None and label != expected_group.label:
        raise DecodeError(f"manifest group {label!r}, expected {expected_group.label!r}")
    params = expected_group if expected_group is not None else get_group(label)
    return params, ElectionManifest.from_canonical(entries[0].decoded(), params)


def verify_transcript(
    data: bytes, expected_group: GroupParams | None = None, *, require_certification: bool = True
) -> AuditReport:
    """Audit a ``VSPC1`` transcript. Raises :class:`ParseError` only if the file does not parse."""
    entries, checkpoints = read_transcript(data)
    return _Audit(entries, checkpoints, expected_group, require_certification).run()


class _Audit:
    def __init__(self, entries, checkpoints, expected_group, require_certification) -> None:
        self.entries: list[LedgerEntry] = entries
        self.checkpoints: list[Checkpoint] = checkpoints
        self.expected_group = expected_group
        self.require_cert = require_certification
        self.out = _Collector()

    def run(self) -> AuditReport:
        out = self.out
        try:
            self.params, self.m = load_manifest(self.entries, self.expected_group)
        except (*_MALFORMED, LookupError, ProtocolError) as exc:
            for check_id in CHECKS:
                out.fail(check_id, f"manifest unusable: {exc}")
            return out.report(None, False)
        self.mhash = self.m.digest()
        signers = self.m.valid_signers(self.params)
        if len(signers) < self.m.officer_quorum:
            out.fail("manifest.quorum", f"QuorumNotMet(got={len(signers)}, need={self.m.officer_quorum})")
        else:
            out.note("manifest.quorum", f"{len(signers)} of {len(self.m.officer_vks)} officers signed")

        chain = verify_chain(self.params, self.entries, self.m.author_keys())
        if not chain:
            out.fail("chain.integrity", f"entry {chain.bad_index}: {chain.reason}")
        else:
            out.note("chain.integrity", f"{len(self.entries)} entries linked and signed")

        self._sort_entries()
        self._check_phases()
        self._check_checkpoints()
        self._check_attestations()
        self._check_dkg()
        self._check_registrations()
        self._check_ring()
        self._check_casts()
        self._check_aggregate()
        self._check_shares()
        counts = self._check_result()
        certified = self._check_certification()
        self._check_inclusion()
        return out.report(counts, certified)

    # pass 1: classify entries and decode payloads

    def _sort_entries(self) -> None:
        self.by_kind: dict[PayloadKind, list[tuple[int, Any]]] = defaultdict(list)
        self.decode_failures: dict[PayloadKind, list[int]] = defaultdict(list)
        for e in self.entries:
            try:
                self.by_kind[e.payload_kind].append((e.index, e.decoded()))
            except DecodeError:
                self.decode_failures[e.payload_kind].append(e.index)

    def _decoded(self, kind: PayloadKind, check_id: str):
        for idx in self.decode_failures.get(kind, []):
            self.out.fail(check_id, f"entry {idx}: undecodable {kind.name} payload")
        return self.by_kind.get(kind, [])

    # phase structure

    def _check_phases(self) -> None:
        out = self.out
        phase = Phase.SETUP
        self.transitions: dict[Phase, tuple[int, Any]] = {}
        self.phase_of: dict[int, Phase] = {}
        last_time = 0
        for e in self.entries[1:]:
            self.phase_of[e.index] = phase
            if e.payload_kind == PayloadKind.PHASE_TRANSITION:
                try:
                    src, dst, at, data = e.decoded()
                    ok = src == phase and dst == phase + 1 and at >= last_time
                except (*_MALFORMED,):
                    ok = False
                if not ok:
                    out.fail("phase.order", f"entry {e.index}: transition out of order")
                    continue
                phase = Phase(dst)
                last_time = at
                self.transitions[phase] = (e.index, data)
                self.phase_of[e.index] = phase
            elif e.payload_kind == PayloadKind.MANIFEST or e.payload_kind not in _ALLOWED[phase]:
                out.fail("phase.order", f"entry {e.index}: {e.payload_kind.name} during {phase.name}")
        self.final_phase = phase
        if self.require_cert and phase != Phase.CERTIFIED:
            out.fail("phase.order", f"election ended in {phase.name}, not CERTIFIED")
        out.note("phase.order", f"phases strictly increasing up to {phase.name}")
        # result must follow aggregate
        kinds = [e.payload_kind for e in self.entries]
        if PayloadKind.RESULT in kinds and (
            PayloadKind.AGGREGATE_TALLY not in kinds
            or kinds.index(PayloadKind.RESULT) < kinds.index(PayloadKind.AGGREGATE_TALLY)
        ):
            out.fail("phase.order", "result published before the aggregate")

    def _check_checkpoints(self) -> None:
        out = self.out
        vks = self.m.officer_keys()
        if not self.checkpoints:
            out.fail("checkpoint.quorum", "no checkpoints")
            return
        for i, cp in enumerate(self.checkpoints):
            v = verify_checkpoint(self.params, self.entries, cp, vks, self.m.officer_quorum)
            if not v:
                out.fail("checkpoint.quorum", f"checkpoint {i} (upto {cp.upto_index}): {v.reason}")
            elif v.valid_signers != len(cp.signatures):
                # a quorum can survive one bad signature, but a published bad signature means tampering
                bad = len(cp.signatures) - v.valid_signers
                out.fail("checkpoint.quorum", f"checkpoint {i} (upto {cp.upto_index}): {bad} invalid signature(s)")
        covered = max(cp.upto_index for cp in self.checkpoints)
        for phase, (idx, _) in sorted(self.transitions.items()):
            if not any(cp.upto_index >= idx for cp in self.checkpoints):
                out.fail("checkpoint.quorum", f"transition to {phase.name} at {idx} never sealed")
        if self.require_cert and covered != len(self.entries) - 1:
            out.fail("checkpoint.quorum", f"final checkpoint covers {covered}, log ends at {len(self.entries) - 1}")
        out.note("checkpoint.quorum", f"{len(self.checkpoints)} checkpoints, quorum {self.m.officer_quorum}")

    # setup

    def _check_attestations(self) -> None:
        out = self.out
        m = self.m
        good = set()
        for idx, value in self._decoded(PayloadKind.ATTESTATION_RECORD, "attestation.nodes"):
            try:
                raw, at = value
                report = AttestationReport.from_canonical(raw, self.params)
                v = verify_attestation(self.params, report, m.attestation_authority_vk,
                                       m.attestation_allow_list, at, m.attestation_max_age)
            except _MALFORMED as exc:
                out.fail("attestation.nodes", f"entry {idx}: {exc}")
                continue
            if v:
                good.add(report.node_id)
            else:
                out.fail("attestation.nodes", f"entry {idx}: {report.node_id} {v.reason.value}")
        missing = sorted((set(m.officer_ids) | {REGISTRY}) - good)
        if missing:
            out.fail("attestation.nodes", f"no valid attestation for {', '.join(missing)}")
        out.note("attestation.nodes", f"{len(good)} nodes attested against the allow-list")

    def _check_dkg(self) -> None:
        out = self.out
        m, params = self.m, self.params
        self.vks: dict[int, int] = {}
        self.election_pk = None
        sets: dict[int, tuple[int, ...]] = {}
        for idx, value in self._decoded(PayloadKind.DEALING, "dkg.dealings"):
            try:
                j, commitments = value
                author = self.entries[idx].author
                if author != trustee_id(j) or j in sets or len(commitments) != m.threshold:
                    raise ValueError(f"dealing {j} by {author} with {len(commitments)} commitments")
                sets[j] = tuple(params.check_element(c) for c in commitments)
            except _MALFORMED as exc:
                out.fail("dkg.dealings", f"entry {idx}: {exc}")
        n = m.n_trustees
        if sorted(sets) != list(range(1, n + 1)):
            out.fail("dkg.dealings", f"dealings from {sorted(sets)}, expected 1..{n}")
            return
        ordered = [sets[j] for j in range(1, n + 1)]
        pk = election_key(params, ordered)
        vks = {j: verification_key(params, ordered, j) for j in range(1, n + 1)}
        keys = self._decoded(PayloadKind.ELECTION_KEY, "dkg.dealings")
        if len(keys) != 1:
            out.fail("dkg.dealings", f"{len(keys)} election-key entries")
        else:
            idx, value = keys[0]
            try:
                published_pk, published_vks = value
                if published_pk != pk or list(published_vks) != [vks[j] for j in range(1, n + 1)]:
                    out.fail("dkg.dealings", f"entry {idx}: election key does not match dealings")
            except _MALFORMED as exc:
                out.fail("dkg.dealings", f"entry {idx}: {exc}")
        self.election_pk, self.vks = pk, vks
        out.note("dkg.dealings", f"{n} dealings, threshold {m.threshold}, key re-derived")

    # registration and ring

    def _check_registrations(self) -> None:
        out = self.out
        m = self.m
        self.registered: list[RegistrationRecord] = []
        dids, pks = set(), set()
        window = m.window(Phase.REGISTRATION)
        for idx, value in self._decoded(PayloadKind.REGISTRATION, "registration.credentials"):
            try:
                rec = RegistrationRecord.from_canonical(value, self.params)
            except _MALFORMED as exc:
                out.fail("registration.credentials", f"entry {idx}: {exc}")
                continue
            v = verify_presentation(self.params, rec.credential, m.election_id, m.registrar_vk, rec.registered_at)
            problem = None
            if not v:
                problem = v.reason.value
            elif rec.credential.subject_did != rec.did or did_for_pk(rec.voting_pk) != rec.did:
                problem = "SubjectMismatch"
            elif rec.did in dids or rec.voting_pk in pks:
                problem = "duplicate registration"
            elif window and not window[0] <= rec.registered_at <= window[1]:
                problem = "outside registration window"
            if problem:
                out.fail("registration.credentials", f"entry {idx}: {problem}")
            dids.add(rec.did)
            pks.add(rec.voting_pk)
            self.registered.append(rec)
        out.note("registration.credentials", f"{len(self.registered)} credentials verified under the registrar key")

    def _check_ring(self) -> None:
        out = self.out
        self.ring_digest = None
        self.buckets: dict[bytes, tuple[int, ...]] = {}
        ring = canonical_ring([r.voting_pk for r in self.registered])
        if Phase.VOTING not in self.transitions:
            if self.by_kind.get(PayloadKind.CAST):
                out.fail("ring.freeze", "casts without a frozen ring")
            out.note("ring.freeze", "ring never frozen")
            return
        idx, data = self.transitions[Phase.VOTING]
        buckets = partition_ring(ring, self.m.max_ring_size)
        expected = [ring_digest(ring), len(ring), self.m.max_ring_size, [ring_digest(b) for b in buckets]]
        if list(data) != expected:
            out.fail("ring.freeze", f"entry {idx}: published ring does not match the registration set")
        union = sorted(pk for b in buckets for pk in b)
        if union != sorted(ring) or (self.m.max_ring_size and any(len(b) > self.m.max_ring_size for b in buckets)):
            out.fail("ring.freeze", "buckets do not partition the registration set")
        self.ring_digest = ring_digest(ring)
        self.buckets = {ring_digest(b): b for b in buckets}
        sizes = [len(b) for b in buckets] or [0]
        out.note("ring.freeze", f"structural: {len(ring)} registrations in {len(buckets)} rings "
                                f"(sizes {min(sizes)}-{max(sizes)}), statistical unlinkability not assessable")

    # casts

    def _check_casts(self) -> None:
        out = self.out
        params, m = self.params, self.m
        self.casts: list[tuple[int, CastRecord]] = []
        images: dict[int, int] = {}
        needles_did = {r.did.encode() for r in self.registered}
        needles_pk = {encode_int(r.voting_pk) for r in self.registered}
        for idx, value in self._decoded(PayloadKind.CAST, "cast.binary_proofs"):
            try:
                rec = CastRecord.from_canonical(value, params)
            except _MALFORMED as exc:
                out.fail("cast.binary_proofs", f"entry {idx}: malformed cast ({exc})")
                continue
            self.casts.append((idx, rec))
            if rec.key_image in images:
                out.fail("cast.nullifier", f"entry {idx}: key image already used at entry {images[rec.key_image]}")
            else:
                images[rec.key_image] = idx
            bucket = self.buckets.get(rec.ring_digest)
            if bucket is None or not check_ring_signature(params, m.election_id, self.mhash, bucket,
                                                          self.ring_digest, rec):
                out.fail("cast.ring_signature", f"entry {idx}: ring signature does not verify")
            if self.election_pk is None:
                out.fail("cast.binary_proofs", f"entry {idx}: no election key")
                continue
            binary_ok, sum_ok = check_ballot_proofs(params, self.election_pk, self.mhash, rec, m.k)
            if not binary_ok:
                out.fail("cast.binary_proofs", f"entry {idx}: binary proof rejected")
            if not sum_ok:
                out.fail("cast.sum_proof", f"entry {idx}: sum proof rejected")
            leaked = _scan_identifiers(self.entries[idx].to_bytes(), needles_did, needles_pk)
            if leaked:
                out.fail("cast.identifier_scan", f"entry {idx}: contains a registered {leaked}")
        n = len(self.casts)
        out.note("cast.nullifier", f"{n} casts, {len(images)} distinct key images")
        out.note("cast.ring_signature", f"{n} ring signatures verified against frozen rings")
        out.note("cast.binary_proofs", f"{n * m.k} binary proofs verified")
        out.note("cast.sum_proof", f"{n} sum proofs verified")
        out.note("cast.identifier_scan", f"structural: no DID or encoded voting key in {n} cast entries")

    # tally

    def _check_aggregate(self) -> None:
        out = self.out
        params, k = self.params, self.m.k
        acc = [IDENTITY] * k
        committed = spoiled = 0
        for _, rec in self.casts:
            if rec.status == CastStatus.COMMITTED and len(rec.ballot_cts) == k:
                acc = [ct_combine(params, a, c) for a, c in zip(acc, rec.ballot_cts)]
                committed += 1
            else:
                spoiled += 1
        self.committed = committed
        self.aggregate = None
        aggs = self._decoded(PayloadKind.AGGREGATE_TALLY, "tally.aggregate")
        if not aggs:
            if Phase.TALLY in self.transitions or self.require_cert:
                out.fail("tally.aggregate", "no aggregate published")
            out.note("tally.aggregate", "voting not closed")
            return
        if len(aggs) > 1:
            out.fail("tally.aggregate", f"{len(aggs)} aggregate entries")
        idx, value = aggs[0]
        try:
            cts, pub_committed, pub_spoiled = value
            published = tuple(Ciphertext.from_canonical(c, params) for c in cts)
        except _MALFORMED as exc:
            out.fail("tally.aggregate", f"entry {idx}: {exc}")
            return
        if published != tuple(acc) or (pub_committed, pub_spoiled) != (committed, spoiled):
            out.fail("tally.aggregate", f"entry {idx}: published aggregate differs from the fold over committed casts")
        self.aggregate = published
        out.note("tally.aggregate", f"fold over {committed} committed casts ({spoiled} spoiled excluded) matches")

    def _check_shares(self) -> None:
        out = self.out
        params = self.params
        self.valid_shares: dict[int, dict[int, DecryptionShare]] = defaultdict(dict)
        total = 0
        for idx, value in self._decoded(PayloadKind.DECRYPTION_SHARE, "tally.shares"):
            total += 1
            try:
                c, raw = value
                ds = DecryptionShare.from_canonical(raw, params)
                j = ds.trustee_index
                if self.entries[idx].author != trustee_id(j) or j not in self.vks or not 0 <= c < self.m.k:
                    raise ValueError(f"share for trustee {j} candidate {c} by {self.entries[idx].author}")
            except _MALFORMED as exc:
                out.fail("tally.shares", f"entry {idx}: {exc}")
                continue
            if self.aggregate is None:
                out.fail("tally.shares", f"entry {idx}: share without aggregate")
                continue
            if c in self.valid_shares[j]:
                out.fail("tally.shares", f"entry {idx}: duplicate share from trustee {j}")
                continue
            if not verify_share_proof(params, self.aggregate[c], ds, self.vks[j], tally_context(self.mhash, c)):
                out.fail("tally.shares", f"entry {idx}: share proof from trustee {j} rejected")
                continue
            self.valid_shares[j][c] = ds
        out.note("tally.shares", f"{total} decryption-share proofs verified")

    def _check_result(self):
        out = self.out
        params, m = self.params, self.m
        complete = sorted(j for j, per in self.valid_shares.items() if len(per) == m.k)
        results = self._decoded(PayloadKind.RESULT, "tally.result")
        self.tally_record = None
        self.published_counts = None
        if not results:
            if len(complete) >= m.threshold:
                out.note("tally.threshold", f"{len(complete)} trustees shared; result not yet published")
            else:
                out.note("tally.threshold", f"{len(complete)} of {m.threshold} shares: no early result derivable")
            if self.require_cert:
                out.fail("tally.result", "no result published")
                out.fail("tally.self_tallying", "no result published")
            else:
                out.note("tally.result", "no result published")
                out.note("tally.self_tallying", "no result published")
            return None
        if len(results) > 1:
            out.fail("tally.result", f"{len(results)} result entries")
        idx, value = results[0]
        if len(complete) < m.threshold:
            out.fail("tally.threshold", f"entry {idx}: result with only {len(complete)} of {m.threshold} valid shares")
        else:
            out.note("tally.threshold", f"result backed by {len(complete)} of {m.threshold} required trustees")
        if self.aggregate is None:
            out.fail("tally.result", f"entry {idx}: result without aggregate")
            out.fail("tally.self_tallying", "tally not derivable from public data")
            return None
        try:
            counts, trustees = value
            counts = [int(x) for x in counts]
            self.published_counts = counts
        except _MALFORMED as exc:
            out.fail("tally.result", f"entry {idx}: {exc}")
            return None
        use = [j for j in trustees if j in complete] if isinstance(trustees, list) else []
        if use != list(trustees) or len(use) < m.threshold:
            out.fail("tally.result", f"entry {idx}: result names trustees without valid shares")
            use = complete
        recomputed = None
        if len(use) >= m.threshold:
            try:
                recomputed = tuple(
                    decode_dlog(params, combine_shares(params, ct, [self.valid_shares[j][c] for j in use],
                                                       m.threshold), self.committed)
                    for c, ct in enumerate(self.aggregate)
                )
            except (NotInRange, CryptoError) as exc:
                out.fail("tally.result", f"recombination failed: {exc}")
        if recomputed is None:
            out.fail("tally.self_tallying", "tally not derivable from aggregate and trustee shares")
        else:
            out.note("tally.self_tallying", "counts re-derived from the aggregate and threshold shares alone")
            if list(recomputed) != counts:
                out.fail("tally.result", f"entry {idx}: published {counts}, recomputed {list(recomputed)}")
            elif sum(recomputed) != self.committed:
                out.fail("tally.result", f"counts sum to {sum(recomputed)}, {self.committed} committed")
            else:
                out.note("tally.result", f"counts {list(recomputed)} re-derived and match")
        shares = tuple(tuple(self.valid_shares[j][c] for j in use) for c in range(m.k)) if len(use) >= m.threshold else ()
        self.tally_record = TallyRecord(self.aggregate, tuple(counts), shares)
        return recomputed

    def _check_certification(self) -> bool:
        out = self.out
        certs = self._decoded(PayloadKind.CERTIFICATION, "certification.binding")
        if not certs:
            if self.require_cert:
                out.fail("certification.binding", "no certification")
                out.fail("certification.quorum", "no certification")
            else:
                out.note("certification.binding", "not yet certified")
                out.note("certification.quorum", "not yet certified")
            return False
        idx, value = certs[0]
        if len(certs) > 1:
            out.fail("certification.binding", f"{len(certs)} certification entries")
        try:
            rec = CertificationRecord.from_canonical(value, self.params)
        except _MALFORMED as exc:
            out.fail("certification.binding", f"entry {idx}: {exc}")
            out.fail("certification.quorum", f"entry {idx}: undecodable")
            return False
        if self.tally_record is None or rec.result_hash != self.tally_record.result_hash():
            out.fail("certification.binding", f"entry {idx}: certified hash does not match the published result")
        failing = [v[0] for v in rec.verdict if not v[2]]
        if failing:
            out.fail("certification.binding", f"entry {idx}: certified a failing audit ({failing[0]})")
        out.note("certification.binding", "certificate binds the published tally and a passing audit")
        keys = self.m.officer_keys()
        msg = certification_message(self.m.election_id, rec.result_hash, rec.verdict_hash)
        signers = set()
        for oid, sig in rec.signatures:
            if oid in keys and oid not in signers and schnorr_verify(self.params, keys[oid], msg,
                                                                       CERTIFICATION_DOMAIN, sig):
                signers.add(oid)
        if len(signers) < self.m.officer_quorum:
            out.fail("certification.quorum", f"QuorumNotMet(got={len(signers)}, need={self.m.officer_quorum})")
        else:
            out.note("certification.quorum", f"{len(signers)} officers certified")
        return not self.out.failures.get("certification.binding") and len(signers) >= self.m.officer_quorum

    def _check_inclusion(self) -> None:
        out = self.out
        if not self.casts:
            out.note("receipt.inclusion", "no casts to include")
            return
        if not self.checkpoints:
            out.fail("receipt.inclusion", "no checkpoint to prove inclusion against")
            return
        final = self.checkpoints[-1]
        last_cast = self.casts[-1][0]
        if final.upto_index < last_cast or final.upto_index >= len(self.entries):
            out.fail("receipt.inclusion", f"final checkpoint covers {final.upto_index}, last cast at {last_cast}")
            return
        proofs = inclusion_proofs(self.entries, [i for i, _ in self.casts], final.upto_index)
        bad = [i for i, p in proofs.items() if not verify_inclusion(self.entries[i].entry_hash, p, final.merkle_root)]
        if bad:
            out.fail("receipt.inclusion", f"entry {bad[0]}: inclusion proof does not reach the final checkpoint")
        else:
            out.note("receipt.inclusion", f"{len(proofs)} cast receipts prove into checkpoint at {final.upto_index}")


def _scan_identifiers(raw: bytes, dids: set[bytes], pks: set[bytes]) -> str | None:
    """Look for any registered DID or canonically encoded voting key inside ``raw``."""
    pos = raw.find(b"did:")
    while pos != -1:
        for d in dids:
            if raw.startswith(d, pos):
                return "DID"
        pos = raw.find(b"did:", pos + 1)
    header = b"\x01\x00\x00\x00"
    pos = raw.find(header)
    while pos != -1:
        size = raw[pos + 4] if pos + 4 < len(raw) else 0
        if raw[pos:pos + 5 + size] in pks:
            return "voting key"
        pos = raw.find(header, pos + 1)
    return None


# individual verification


@dataclass(frozen=True)
class BallotReceipt:
    tracker: bytes
    entry_index: int
    status: CastStatus
    inclusion: InclusionProof
    checkpoint_index: int
    checkpoint_upto: int
    checkpoint_root: bytes
    verified: bool
    included_in_tally: bool
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return {
            "tracker": self.tracker.hex(),
            "entry_index": self.entry_index,
            "status": self.status.name.lower(),
            "included_in_tally": self.included_in_tally,
            "checkpoint": {"index": self.checkpoint_index, "upto": self.checkpoint_upto,
                           "merkle_root": self.checkpoint_root.hex()},
            "inclusion": {"siblings": [h.hex() for h in self.inclusion.sibling_hashes],
                          "directions": list(self.inclusion.directions)},
            "verified": self.verified,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def individual_verify(data: bytes, tracker: bytes, expected_group: GroupParams | None = None) -> BallotReceipt:
    entries, checkpoints = read_transcript(data)
    params, manifest = load_manifest(entries, expected_group)
    hit = None
    for e in entries:
        if e.payload_kind == PayloadKind.CAST and tracker_for(e.payload) == tracker:
            hit = e
            break
    if hit is None:
        raise TrackerNotFound(tracker.hex())
    status = CastStatus(decode(hit.payload)[4])
    covering = [(i, cp) for i, cp in enumerate(checkpoints) if cp.upto_index >= hit.index]
    if not covering:
        raise TrackerNotFound(f"{tracker.hex()} is not covered by any checkpoint yet")
    cp_index, cp = covering[-1]
    notes = []
    cp_ok = bool(verify_checkpoint(params, entries, cp, manifest.officer_keys(), manifest.officer_quorum))
    if not cp_ok:
        notes.append("checkpoint failed quorum verification")
    proof = inclusion_proofs(entries, [hit.index], cp.upto_index)[hit.index]
    ok = cp_ok and verify_inclusion(hit.entry_hash, proof, cp.merkle_root)
    tallied = status == CastStatus.COMMITTED and any(e.payload_kind == PayloadKind.AGGREGATE_TALLY for e in entries)
    if status == CastStatus.SPOILED:
        notes.append("spoiled ballot: excluded from the tally")
    return BallotReceipt(tracker, hit.index, status, proof, cp_index, cp.upto_index, cp.merkle_root,
                         ok, tallied, tuple(notes))


# rendering


def requirement_matrix(report: AuditReport) -> str:
    rows = [("requirement", "verdict", "checks", "note")]
    for tag, ok in report.tag_verdicts().items():
        checks = [c for c in report.checks if c.tag == tag]
        failing = [c for c in checks if not c.passed]
        note = failing[0].detail if failing else checks[-1].detail if checks else "no checks"
        rows.append((tag, "pass" if ok else "FAIL", ", ".join(c.check_id for c in checks), note))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = []
    for r in rows:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(3)) + "  " + r[3])
    lines.insert(1, "  ".join("-" * w for w in widths) + "  " + "-" * 4)
    return "\n".join(lines) + "\n"


__all__ = [
    "AuditReport",
    "BallotReceipt",
    "CHECKS",
    "Check",
    "ParseError",
    "TAGS",
    "TrackerNotFound",
    "individual_verify",
    "load_manifest",
    "requirement_matrix",
    "verify_transcript",
]
