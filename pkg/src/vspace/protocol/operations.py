"""One function per protocol step, in lifecycle order."""

from __future__ import annotations

from typing import Mapping, Sequence

from ..crypto.dkg import DecryptionShare, election_key, verification_key
from ..crypto.elgamal import Ciphertext
from ..crypto.errors import DuplicateTrusteeIndex
from ..crypto.group import GroupParams, Rng
from ..crypto.lsag import key_image
from ..crypto.schnorr import KeyPair, schnorr_sign
from ..identity import (
    AttestationReport,
    AuthSession,
    DidDocument,
    EligibilityCredential,
    Reason,
    mfca_authenticated,
    verify_attestation,
    verify_presentation,
)
from ..ledger import Checkpoint, PayloadKind, QuorumNotMet
from .errors import (
    AttestationRejected,
    AuditFailed,
    AuthenticationFailed,
    CredentialRejected,
    DuplicateDid,
    DuplicateKey,
    DuplicateNullifier,
    EmptyRing,
    InvalidChoice,
    ManifestInvalid,
    NotRegistered,
    PhaseViolation,
    ShareProofInvalid,
)
from .manifest import REGISTRY, ElectionManifest, Phase, officer_pairs, sign_manifest, trustee_id
from .records import (
    CERTIFICATION_DOMAIN,
    CastRecord,
    CastStatus,
    CertificationRecord,
    RegistrationRecord,
    TallyRecord,
    build_cast,
    certification_message,
    verdict_hash,
)
from .state import ElectionState
from .trustee import TrusteeNode

Officers = Mapping[str, KeyPair] | Sequence[tuple[str, KeyPair]]


def _quorum(state: ElectionState, officers: Officers) -> list[tuple[str, KeyPair]]:
    """Keep officers whose key matches the manifest; fail if fewer than quorum remain."""
    keys = state.manifest.officer_keys()
    seen: dict[str, KeyPair] = {}
    for oid, kp in officer_pairs(officers):
        if keys.get(oid) == kp.pk:
            seen.setdefault(oid, kp)
    if len(seen) < state.manifest.officer_quorum:
        raise QuorumNotMet(len(seen), state.manifest.officer_quorum)
    return sorted(seen.items())


def _transition(state: ElectionState, officers: Officers, dst: Phase, data: list) -> Checkpoint:
    signers = _quorum(state, officers)
    state._post(PayloadKind.PHASE_TRANSITION, [int(state.phase), int(dst), state.clock, data])
    return state.ledger.seal(signers, state.manifest.officer_quorum)


def setup_election(
    params: GroupParams,
    draft: ElectionManifest,
    officer_kps: Officers,
    attestations: Sequence[AttestationReport],
    registry_kp: KeyPair,
    now: int = 0,
) -> ElectionState:
    """Multi-sign the manifest, check every node's attestation, open the ledger."""
    draft.validate(params)
    if draft.registry_vk != registry_kp.pk:
        raise ManifestInvalid("registry key does not match the manifest")
    keys = draft.officer_keys()
    signers = {oid: kp for oid, kp in officer_pairs(officer_kps) if keys.get(oid) == kp.pk}
    if len(signers) < draft.officer_quorum:
        raise QuorumNotMet(len(signers), draft.officer_quorum)
    manifest = sign_manifest(params, draft, sorted(signers.items()))

    by_node = {r.node_id: r for r in attestations}
    for node in (*manifest.officer_ids, REGISTRY):
        report = by_node.get(node)
        if report is None:
            raise AttestationRejected(node, "missing attestation")
        verdict = verify_attestation(params, report, manifest.attestation_authority_vk,
                                     manifest.attestation_allow_list, now, manifest.attestation_max_age)
        if not verdict:
            raise AttestationRejected(node, verdict.reason.value)

    state = ElectionState(params, registry_kp)
    state.clock = now
    state._post(PayloadKind.MANIFEST, manifest.to_canonical())
    for node in (*manifest.officer_ids, REGISTRY):
        state._post(PayloadKind.ATTESTATION_RECORD, [by_node[node].to_canonical(), now])
    return state


def run_hyok_ceremony(state: ElectionState, trustees: Sequence[TrusteeNode], rng: Rng) -> int:
    """Every trustee deals to every other; shares are checked before anything is published.

    Raises ``ShareVerificationFailed(dealer, trustee)`` and publishes nothing
    if any share fails its commitment check.
    """
    state.require_phase(Phase.SETUP)
    m = state.manifest
    params = state.params
    trustee_pks = m.trustee_keys()
    by_index = {t.index: t for t in trustees}
    if sorted(by_index) != sorted(trustee_pks) or any(by_index[j].kp.pk != pk for j, pk in trustee_pks.items()):
        raise ManifestInvalid("trustee set does not match the manifest")
    ordered = [by_index[j] for j in sorted(by_index)]
    dealings = [t.deal(params, m.threshold, trustee_pks, rng) for t in ordered]
    for t in ordered:
        t.receive(params, dealings, trustee_pks)
    for t, d in zip(ordered, dealings):
        state._submit(PayloadKind.DEALING, d.public_part(), trustee_id(t.index), t.kp)
    sets = [d.commitments for d in dealings]
    pk = election_key(params, sets)
    vks = [verification_key(params, sets, j) for j in sorted(trustee_pks)]
    state._post(PayloadKind.ELECTION_KEY, [pk, vks])
    return pk


def open_registration(state: ElectionState, officer_kps: Officers) -> Checkpoint:
    state.require_phase(Phase.SETUP)
    return _transition(state, officer_kps, Phase.REGISTRATION, [])


def register_voter(
    state: ElectionState,
    did_doc: DidDocument,
    credential: EligibilityCredential,
    mfca_session: AuthSession,
    now: int | None = None,
) -> RegistrationRecord:
    if now is not None:
        state.advance(now)
    now = state.clock
    state.require_phase(Phase.REGISTRATION)
    if not state.in_window(Phase.REGISTRATION, now):
        raise PhaseViolation(f"registration closed at time {now}")
    m = state.manifest
    verdict = verify_presentation(state.params, credential, m.election_id, m.registrar_vk, now)
    if not verdict:
        raise CredentialRejected(verdict.reason.value)
    if not did_doc.is_consistent() or credential.subject_did != did_doc.did:
        raise CredentialRejected(Reason.SUBJECT_MISMATCH.value)
    if mfca_session.did != did_doc.did or not mfca_authenticated(mfca_session, m.mfca_threshold, now):
        raise AuthenticationFailed(f"continuous authentication failed for {did_doc.did}")
    if did_doc.did in state._dids:
        raise DuplicateDid(did_doc.did)
    if did_doc.pk in state._pks:
        raise DuplicateKey("voting key already registered")
    record = RegistrationRecord(did_doc.did, did_doc.pk, credential, now)
    state._post(PayloadKind.REGISTRATION, record.to_canonical())
    return record


def close_registration(state: ElectionState, officer_kps: Officers) -> bytes:
    """Freeze the ring; returns the digest of the full sorted registration set."""
    state.require_phase(Phase.REGISTRATION)
    if not state.registrations:
        raise EmptyRing("no registered voters")
    _, digest, _, data = state.freeze_ring()
    _transition(state, officer_kps, Phase.VOTING, data)
    return digest


def build_ballot(
    state: ElectionState, voter_sk: int, choice_index: int, status: CastStatus, rng: Rng
) -> CastRecord:
    """Client side of casting; does not touch the ledger."""
    state.require_phase(Phase.VOTING)
    if not 0 <= choice_index < state.k:
        raise InvalidChoice(choice_index, state.k)
    params = state.params
    bucket = state.bucket_for(params.gexp(voter_sk))
    if bucket is None:
        raise NotRegistered("voting key is not in the frozen ring")
    if key_image(params, voter_sk, state.ring_digest) in state.key_images:
        raise DuplicateNullifier("this voter has already cast")
    m = state.manifest
    return build_cast(params, m.election_id, state.manifest_hash, state.election_pk, bucket,
                      state.ring_digest, voter_sk, choice_index, m.k, CastStatus(status), rng)


def submit_cast(state: ElectionState, record: CastRecord) -> int:
    """Registry side: validate and append; returns the ledger index."""
    state.require_phase(Phase.VOTING)
    if not state.in_window(Phase.VOTING, state.clock):
        raise PhaseViolation(f"voting closed at time {state.clock}")
    return state._post(PayloadKind.CAST, record.to_canonical()).index


def cast_ballot(
    state: ElectionState, voter_sk: int, choice_index: int, status: CastStatus, rng: Rng
) -> CastRecord:
    record = build_ballot(state, voter_sk, choice_index, status, rng)
    submit_cast(state, record)
    return record


def close_voting(state: ElectionState, officer_kps: Officers) -> tuple[Ciphertext, ...]:
    state.require_phase(Phase.VOTING)
    signers = _quorum(state, officer_kps)
    state._post(PayloadKind.PHASE_TRANSITION, [int(Phase.VOTING), int(Phase.TALLY), state.clock, []])
    aggregate = state.running_aggregate()
    state._post(PayloadKind.AGGREGATE_TALLY, [[c.to_canonical() for c in aggregate], state.committed, state.spoiled])
    state.ledger.seal(signers, state.manifest.officer_quorum)
    return aggregate


def submit_decryption_share(
    state: ElectionState, trustee_index: int, shares: Sequence[DecryptionShare], trustee_kp: KeyPair
) -> list[int]:
    """Append one entry per candidate; all ``k`` shares are checked before any is written."""
    state.require_phase(Phase.TALLY)
    if state.aggregate is None:
        raise PhaseViolation("no aggregate published")
    if trustee_index in state.shares:
        raise DuplicateTrusteeIndex(trustee_index)
    if len(shares) != state.k:
        raise ShareProofInvalid(f"expected {state.k} shares, got {len(shares)}")
    for c, ds in enumerate(shares):
        if ds.trustee_index != trustee_index:
            raise ShareProofInvalid(f"share {c} names trustee {ds.trustee_index}")
        state.check_share_proof(c, ds)
    return [state._submit(PayloadKind.DECRYPTION_SHARE, [c, ds.to_canonical()], trustee_id(trustee_index),
                          trustee_kp).index for c, ds in enumerate(shares)]


def finalize_tally(state: ElectionState) -> TallyRecord:
    state.require_phase(Phase.TALLY)
    if state.tally is not None:
        raise PhaseViolation("tally already finalized")
    tally = state.compute_tally()
    state._post(PayloadKind.RESULT, [list(tally.counts), state.complete_trustees()])
    return state.tally


def certify_result(state: ElectionState, officer_kps: Officers, audit_report) -> CertificationRecord:
    """Gate on a passing audit, collect officer signatures, seal the final checkpoint.

    ``audit_report`` needs ``checks`` with ``check_id``/``tag``/``passed``.
    """
    state.require_phase(Phase.TALLY)
    if state.tally is None:
        raise PhaseViolation("no result to certify")
    for check in audit_report.checks:
        if not check.passed:
            raise AuditFailed(check.check_id)
    signers = _quorum(state, officer_kps)
    verdict = tuple((c.check_id, c.tag, 1) for c in audit_report.checks)
    result_hash = state.tally.result_hash()
    msg = certification_message(state.manifest.election_id, result_hash, verdict_hash(verdict))
    sigs = tuple((oid, schnorr_sign(state.params, kp, msg, CERTIFICATION_DOMAIN)) for oid, kp in signers)
    record = CertificationRecord(result_hash, verdict, sigs)
    state._post(PayloadKind.CERTIFICATION, record.to_canonical())
    _transition(state, signers, Phase.CERTIFIED, [])
    return record
