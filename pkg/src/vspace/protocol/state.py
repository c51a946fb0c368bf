"""Election state as a materialized view of the ledger.

Every mutation goes through :meth:`ElectionState._submit`, which validates a
payload against the current state, appends it, then applies it. Replay runs
the same validate/apply pair over an existing transcript, so a rebuilt
state makes the same accept/reject decisions as the original.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

from ..crypto.dkg import (
    DecryptionShare,
    combine_shares,
    election_key,
    verification_key,
    verify_share_proof,
)
from ..crypto.dlog import decode_dlog
from ..crypto.elgamal import IDENTITY, Ciphertext, ct_combine
from ..crypto.encoding import decode, encode
from ..crypto.errors import CryptoError, DecodeError, DuplicateTrusteeIndex, InsufficientShares
from ..crypto.group import GroupParams
from ..crypto.lsag import canonical_ring, ring_digest
from ..crypto.schnorr import KeyPair, schnorr_verify
from ..crypto.transcript import Transcript
from ..identity import AttestationReport, Reason, did_for_pk, verify_attestation, verify_presentation
from ..ledger import (
    Checkpoint,
    Ledger,
    LedgerEntry,
    LedgerError,
    PayloadKind,
    QuorumNotMet,
    verify_chain,
    verify_checkpoint,
)
from .errors import (
    AuditFailed,
    AttestationRejected,
    CredentialRejected,
    DuplicateDid,
    DuplicateKey,
    DuplicateNullifier,
    EmptyRing,
    InvalidBallotProof,
    InvalidCast,
    InvalidEntry,
    InvalidRingSignature,
    NotRegistered,
    PhaseViolation,
    ProtocolError,
    ReplayError,
    ShareProofInvalid,
    TallyMismatch,
)
from .manifest import REGISTRY, ElectionManifest, Phase, trustee_id
from .records import (
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
)

_DECODE_ERRORS = (DecodeError, TypeError, ValueError, KeyError, IndexError)


def tally_context(manifest_hash: bytes, candidate: int) -> Transcript:
    return Transcript("vspace/tally", manifest_hash, candidate)


@dataclass(frozen=True)
class _Prepared:
    value: Any
    apply: Callable[[Any, LedgerEntry], None]


class ElectionState:
    def __init__(self, params: GroupParams, registry_kp: KeyPair | None = None) -> None:
        self.params = params
        self.registry_kp = registry_kp
        self.ledger = Ledger(params)
        self.manifest: ElectionManifest | None = None
        self.manifest_hash = b""
        self.phase = Phase.SETUP
        self.clock = 0
        self.attested: dict[str, AttestationReport] = {}
        self.dealings: dict[int, tuple[int, ...]] = {}
        self.election_pk: int | None = None
        self.vks: dict[int, int] = {}
        self.registrations: list[RegistrationRecord] = []
        self._dids: set[str] = set()
        self._pks: set[int] = set()
        self.ring: tuple[int, ...] = ()
        self.ring_digest: bytes | None = None
        self.buckets: tuple[tuple[int, ...], ...] = ()
        self._bucket_by_digest: dict[bytes, tuple[int, ...]] = {}
        self._bucket_of_pk: dict[int, tuple[int, ...]] = {}
        self.key_images: set[int] = set()
        self.casts: list[tuple[int, CastRecord]] = []
        self.committed = 0
        self.spoiled = 0
        self._running: list[Ciphertext] = []
        self.aggregate: tuple[Ciphertext, ...] | None = None
        self.shares: dict[int, dict[int, DecryptionShare]] = {}
        self.tally: TallyRecord | None = None
        self.certification: CertificationRecord | None = None

    # helpers used by operations

    @property
    def k(self) -> int:
        return self.manifest.k

    def bucket_for(self, pk: int) -> tuple[int, ...] | None:
        return self._bucket_of_pk.get(pk)

    def advance(self, now: int) -> None:
        if now < self.clock:
            raise ValueError(f"logical clock cannot move backwards ({now} < {self.clock})")
        self.clock = now

    def require_phase(self, phase: Phase) -> None:
        if self.phase != phase:
            raise PhaseViolation(f"operation needs phase {phase.name}, election is in {self.phase.name}")

    def in_window(self, phase: Phase, now: int) -> bool:
        window = self.manifest.window(phase) if self.manifest else None
        return window is None or window[0] <= now <= window[1]

    def complete_trustees(self) -> list[int]:
        return sorted(j for j, per in self.shares.items() if len(per) == self.k)

    # engine

    def _submit(self, kind: PayloadKind, payload_obj: Any, author: str, author_kp: KeyPair) -> LedgerEntry:
        payload = encode(payload_obj)
        prepared = self._check(kind, decode(payload), author, len(self.ledger))
        entry = self.ledger.append(kind, payload, author, author_kp)
        prepared.apply(prepared.value, entry)
        return entry

    def _post(self, kind: PayloadKind, payload_obj: Any) -> LedgerEntry:
        if self.registry_kp is None:
            raise ProtocolError("this state has no registry signing key; it is read-only")
        return self._submit(kind, payload_obj, REGISTRY, self.registry_kp)

    def _check(self, kind: PayloadKind, value: Any, author: str, index: int) -> _Prepared:
        if index == 0 and kind != PayloadKind.MANIFEST:
            raise InvalidEntry("first entry must be the manifest")
        if index > 0 and kind == PayloadKind.MANIFEST:
            raise InvalidEntry("manifest may only appear once, at index 0")
        handler = _HANDLERS[kind]
        expected = None if kind in (PayloadKind.DEALING, PayloadKind.DECRYPTION_SHARE) else REGISTRY
        if expected is not None and author != expected:
            raise InvalidEntry(f"{kind.name} must be authored by {expected}, not {author}")
        try:
            return handler(self, value, author)
        except _DECODE_ERRORS as exc:
            raise InvalidEntry(f"malformed {kind.name} payload: {exc}") from None

    # setup

    def _check_manifest(self, value, author) -> _Prepared:
        manifest = ElectionManifest.from_canonical(value, self.params)
        signers = manifest.valid_signers(self.params)
        if len(signers) < manifest.officer_quorum:
            raise QuorumNotMet(len(signers), manifest.officer_quorum)
        return _Prepared(manifest, self._apply_manifest)

    def _apply_manifest(self, manifest: ElectionManifest, entry: LedgerEntry) -> None:
        self.manifest = manifest
        self.manifest_hash = manifest.digest()
        self.shares = {}

    def _check_attestation(self, value, author) -> _Prepared:
        self.require_phase(Phase.SETUP)
        raw, at = value
        report = AttestationReport.from_canonical(raw, self.params)
        nodes = set(self.manifest.officer_ids) | {REGISTRY}
        if report.node_id not in nodes:
            raise AttestationRejected(report.node_id, "not a node of this election")
        if at < self.clock:
            raise InvalidEntry("attestation time precedes the logical clock")
        m = self.manifest
        verdict = verify_attestation(self.params, report, m.attestation_authority_vk,
                                     m.attestation_allow_list, at, m.attestation_max_age)
        if not verdict:
            raise AttestationRejected(report.node_id, verdict.reason.value)
        return _Prepared((report, at), self._apply_attestation)

    def _apply_attestation(self, value, entry) -> None:
        report, at = value
        self.attested[report.node_id] = report
        self.clock = at

    def _check_dealing(self, value, author) -> _Prepared:
        self.require_phase(Phase.SETUP)
        j, commitments = value
        if author != trustee_id(j) or not 1 <= j <= self.manifest.n_trustees:
            raise InvalidEntry(f"dealing {j} authored by {author}")
        if j in self.dealings:
            raise InvalidEntry(f"duplicate dealing from trustee {j}")
        if self.election_pk is not None:
            raise PhaseViolation("election key already published")
        if len(commitments) != self.manifest.threshold:
            raise InvalidEntry(f"dealing {j} has {len(commitments)} commitments, need {self.manifest.threshold}")
        commitments = tuple(self.params.check_element(c, "commitment") for c in commitments)
        return _Prepared((j, commitments), self._apply_dealing)

    def _apply_dealing(self, value, entry) -> None:
        j, commitments = value
        self.dealings[j] = commitments

    def _check_election_key(self, value, author) -> _Prepared:
        self.require_phase(Phase.SETUP)
        pk, vks = value
        if self.election_pk is not None:
            raise InvalidEntry("election key already published")
        n = self.manifest.n_trustees
        if sorted(self.dealings) != list(range(1, n + 1)):
            raise InvalidEntry(f"election key before all {n} dealings")
        sets = [self.dealings[j] for j in sorted(self.dealings)]
        derived_pk = election_key(self.params, sets)
        derived_vks = [verification_key(self.params, sets, j) for j in range(1, n + 1)]
        if pk != derived_pk or list(vks) != derived_vks:
            raise InvalidEntry("published election key does not match the dealings")
        return _Prepared((pk, dict(zip(range(1, n + 1), derived_vks))), self._apply_election_key)

    def _apply_election_key(self, value, entry) -> None:
        self.election_pk, self.vks = value

    # phase transitions

    def _check_transition(self, value, author) -> _Prepared:
        src, dst, at, data = value
        if src != self.phase or dst != self.phase + 1:
            raise PhaseViolation(f"transition {src} -> {dst} from phase {self.phase.name}")
        if at < self.clock:
            raise InvalidEntry("transition time precedes the logical clock")
        dst = Phase(dst)
        extra = None
        if dst == Phase.REGISTRATION:
            if self.election_pk is None:
                raise PhaseViolation("registration cannot open before the key ceremony")
            missing = (set(self.manifest.officer_ids) | {REGISTRY}) - set(self.attested)
            if missing:
                raise AttestationRejected(sorted(missing)[0], "missing attestation")
        elif dst == Phase.VOTING:
            if not self.registrations:
                raise EmptyRing("no registered voters")
            extra = self.freeze_ring()
            if list(data) != extra[3]:
                raise InvalidEntry("published ring data does not match registrations")
        elif dst == Phase.CERTIFIED and self.certification is None:
            raise PhaseViolation("cannot certify before a Certification entry")
        if dst != Phase.VOTING and list(data) != []:
            raise InvalidEntry("unexpected transition data")
        return _Prepared((dst, at, extra), self._apply_transition)

    def freeze_ring(self):
        ring = tuple(canonical_ring([r.voting_pk for r in self.registrations]))
        digest = ring_digest(ring)
        buckets = partition_ring(ring, self.manifest.max_ring_size)
        data = [digest, len(ring), self.manifest.max_ring_size, [ring_digest(b) for b in buckets]]
        return ring, digest, buckets, data

    def _apply_transition(self, value, entry) -> None:
        dst, at, extra = value
        self.phase = dst
        self.clock = at
        if extra is not None:
            self.ring, self.ring_digest, self.buckets, _ = extra
            self._bucket_by_digest = {ring_digest(b): b for b in self.buckets}
            self._bucket_of_pk = {pk: b for b in self.buckets for pk in b}
            self._running = [IDENTITY] * self.k

    # registration

    def _check_registration(self, value, author) -> _Prepared:
        self.require_phase(Phase.REGISTRATION)
        rec = RegistrationRecord.from_canonical(value, self.params)
        m = self.manifest
        if not self.in_window(Phase.REGISTRATION, rec.registered_at):
            raise PhaseViolation(f"registration at {rec.registered_at} outside the window")
        verdict = verify_presentation(self.params, rec.credential, m.election_id, m.registrar_vk, rec.registered_at)
        if not verdict:
            raise CredentialRejected(verdict.reason.value)
        if rec.credential.subject_did != rec.did or did_for_pk(rec.voting_pk) != rec.did:
            raise CredentialRejected(Reason.SUBJECT_MISMATCH.value)
        if rec.did in self._dids:
            raise DuplicateDid(rec.did)
        if rec.voting_pk in self._pks:
            raise DuplicateKey("voting key already registered")
        return _Prepared(rec, self._apply_registration)

    def _apply_registration(self, rec: RegistrationRecord, entry) -> None:
        self.registrations.append(rec)
        self._dids.add(rec.did)
        self._pks.add(rec.voting_pk)
        self.clock = max(self.clock, rec.registered_at)

    # casting

    def _check_cast(self, value, author) -> _Prepared:
        self.require_phase(Phase.VOTING)
        rec = CastRecord.from_canonical(value, self.params)
        self.validate_cast(rec)
        return _Prepared(rec, self._apply_cast)

    def validate_cast(self, rec: CastRecord) -> None:
        if len(rec.ballot_cts) != self.k:
            raise InvalidCast(f"ballot has {len(rec.ballot_cts)} slots, election has {self.k}")
        bucket = self._bucket_by_digest.get(rec.ring_digest)
        if bucket is None:
            raise NotRegistered("ring digest does not name a frozen registration ring")
        if rec.key_image in self.key_images:
            raise DuplicateNullifier("key image already used")
        binary_ok, sum_ok = check_ballot_proofs(self.params, self.election_pk, self.manifest_hash, rec, self.k)
        if not binary_ok:
            raise InvalidBallotProof("binary proof rejected")
        if not sum_ok:
            raise InvalidBallotProof("sum proof rejected")
        if not check_ring_signature(self.params, self.manifest.election_id, self.manifest_hash,
                                    bucket, self.ring_digest, rec):
            raise InvalidRingSignature("ring signature rejected")

    def _apply_cast(self, rec: CastRecord, entry) -> None:
        self.key_images.add(rec.key_image)
        self.casts.append((entry.index, rec))
        if rec.status == CastStatus.COMMITTED:
            self.committed += 1
            self._running = [ct_combine(self.params, acc, ct) for acc, ct in zip(self._running, rec.ballot_cts)]
        else:
            self.spoiled += 1

    def running_aggregate(self) -> tuple[Ciphertext, ...]:
        return tuple(self._running) if self._running else (IDENTITY,) * self.k

    # tally

    def _check_aggregate(self, value, author) -> _Prepared:
        self.require_phase(Phase.TALLY)
        cts, committed, spoiled = value
        if self.aggregate is not None:
            raise InvalidEntry("aggregate already published")
        cts = tuple(Ciphertext.from_canonical(c, self.params) for c in cts)
        if cts != self.running_aggregate() or (committed, spoiled) != (self.committed, self.spoiled):
            raise InvalidEntry("aggregate does not match the committed casts")
        return _Prepared(cts, self._apply_aggregate)

    def _apply_aggregate(self, cts, entry) -> None:
        self.aggregate = cts

    def _check_share(self, value, author) -> _Prepared:
        self.require_phase(Phase.TALLY)
        candidate, raw = value
        if self.aggregate is None:
            raise PhaseViolation("no aggregate to decrypt yet")
        if self.tally is not None:
            raise PhaseViolation("tally already finalized")
        ds = DecryptionShare.from_canonical(raw, self.params)
        j = ds.trustee_index
        if author != trustee_id(j) or j not in self.vks:
            raise InvalidEntry(f"share for trustee {j} authored by {author}")
        if not 0 <= candidate < self.k:
            raise InvalidEntry(f"candidate index {candidate}")
        if candidate in self.shares.get(j, {}):
            raise DuplicateTrusteeIndex(j)
        self.check_share_proof(candidate, ds)
        return _Prepared((candidate, ds), self._apply_share)

    def check_share_proof(self, candidate: int, ds: DecryptionShare) -> None:
        ct = self.aggregate[candidate]
        if not verify_share_proof(self.params, ct, ds, self.vks[ds.trustee_index],
                                  tally_context(self.manifest_hash, candidate)):
            raise ShareProofInvalid(f"trustee {ds.trustee_index}, candidate {candidate}")

    def _apply_share(self, value, entry) -> None:
        candidate, ds = value
        self.shares.setdefault(ds.trustee_index, {})[candidate] = ds

    def compute_tally(self) -> TallyRecord:
        trustees = self.complete_trustees()
        t = self.manifest.threshold
        if len(trustees) < t:
            raise InsufficientShares(len(trustees), t)
        counts = []
        per_candidate = []
        for c, ct in enumerate(self.aggregate):
            shares = tuple(self.shares[j][c] for j in trustees)
            counts.append(decode_dlog(self.params, combine_shares(self.params, ct, shares, t), self.committed))
            per_candidate.append(shares)
        if sum(counts) != self.committed:
            raise TallyMismatch(f"counts sum to {sum(counts)}, {self.committed} ballots committed")
        return TallyRecord(self.aggregate, tuple(counts), tuple(per_candidate))

    def _check_result(self, value, author) -> _Prepared:
        self.require_phase(Phase.TALLY)
        counts, trustees = value
        if self.aggregate is None or self.tally is not None:
            raise PhaseViolation("result requires an aggregate and may be published once")
        tally = self.compute_tally()
        if list(counts) != list(tally.counts) or list(trustees) != self.complete_trustees():
            raise TallyMismatch("published counts differ from the threshold decryption")
        return _Prepared(tally, self._apply_result)

    def _apply_result(self, tally, entry) -> None:
        self.tally = tally

    def _check_certification(self, value, author) -> _Prepared:
        self.require_phase(Phase.TALLY)
        rec = CertificationRecord.from_canonical(value, self.params)
        if self.tally is None or self.certification is not None:
            raise PhaseViolation("certification requires a result and may happen once")
        if rec.result_hash != self.tally.result_hash():
            raise InvalidEntry("certification does not bind the published result")
        for check_id, _tag, passed in rec.verdict:
            if not passed:
                raise AuditFailed(check_id)
        keys = self.manifest.officer_keys()
        msg = certification_message(self.manifest.election_id, rec.result_hash, rec.verdict_hash)
        signers = set()
        for oid, sig in rec.signatures:
            if oid in keys and oid not in signers and schnorr_verify(self.params, keys[oid], msg,
                                                                       CERTIFICATION_DOMAIN, sig):
                signers.add(oid)
        if len(signers) < self.manifest.officer_quorum:
            raise QuorumNotMet(len(signers), self.manifest.officer_quorum)
        return _Prepared(rec, self._apply_certification)

    def _apply_certification(self, rec, entry) -> None:
        self.certification = rec

    # replay

    @classmethod
    def replay(
        cls,
        params: GroupParams,
        entries: Sequence[LedgerEntry],
        checkpoints: Sequence[Checkpoint] = (),
        registry_kp: KeyPair | None = None,
    ) -> "ElectionState":
        state = cls(params, registry_kp)
        if not entries:
            return state
        try:
            manifest = ElectionManifest.from_canonical(entries[0].decoded(), params)
        except (*_DECODE_ERRORS, ProtocolError) as exc:
            raise ReplayError(0, exc) from None
        verdict = verify_chain(params, entries, manifest.author_keys())
        if not verdict:
            raise ReplayError(verdict.bad_index, LedgerError(verdict.reason))
        for e in entries:
            try:
                prepared = state._check(e.payload_kind, e.decoded(), e.author, e.index)
            except (ProtocolError, CryptoError, LedgerError, *_DECODE_ERRORS) as exc:
                raise ReplayError(e.index, exc) from None
            state.ledger.entries.append(e)
            prepared.apply(prepared.value, e)
        for cp in checkpoints:
            cv = verify_checkpoint(params, entries, cp, manifest.officer_keys(), manifest.officer_quorum)
            if not cv:
                raise ReplayError(cp.upto_index, LedgerError(f"checkpoint: {cv.reason}"))
            state.ledger.checkpoints.append(cp)
        return state

    def snapshot(self) -> bytes:
        """Canonical bytes of the derived state, for replay comparison."""
        return encode([
            int(self.phase), self.clock, self.manifest_hash, self.election_pk,
            sorted(self.vks.items()), sorted(self.dealings.items()),
            sorted(self.attested), [r.to_canonical() for r in self.registrations],
            list(self.ring), self.ring_digest, [list(b) for b in self.buckets],
            sorted(self.key_images), [[i, rec.to_canonical()] for i, rec in self.casts],
            self.committed, self.spoiled, [c.to_canonical() for c in self._running],
            None if self.aggregate is None else [c.to_canonical() for c in self.aggregate],
            [[j, [[c, ds.to_canonical()] for c, ds in sorted(per.items())]] for j, per in sorted(self.shares.items())],
            None if self.tally is None else self.tally.to_canonical(),
            None if self.certification is None else self.certification.to_canonical(),
            self.ledger.head, [cp.to_canonical() for cp in self.ledger.checkpoints],
        ])


_HANDLERS = {
    PayloadKind.MANIFEST: ElectionState._check_manifest,
    PayloadKind.ATTESTATION_RECORD: ElectionState._check_attestation,
    PayloadKind.DEALING: ElectionState._check_dealing,
    PayloadKind.ELECTION_KEY: ElectionState._check_election_key,
    PayloadKind.PHASE_TRANSITION: ElectionState._check_transition,
    PayloadKind.REGISTRATION: ElectionState._check_registration,
    PayloadKind.CAST: ElectionState._check_cast,
    PayloadKind.AGGREGATE_TALLY: ElectionState._check_aggregate,
    PayloadKind.DECRYPTION_SHARE: ElectionState._check_share,
    PayloadKind.RESULT: ElectionState._check_result,
    PayloadKind.CERTIFICATION: ElectionState._check_certification,
}
