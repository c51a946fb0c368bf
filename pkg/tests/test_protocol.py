import dataclasses
import random
from itertools import combinations

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from election import EID, new_election, register, tallied, to_voting, voted
from oracles import brute_force_tally, decrypt_with_secret, linear_dlog
from vspace.crypto import TEST256, TOY, keygen
from vspace.crypto.dkg import VSSDealing
from vspace.crypto.elgamal import IDENTITY
from vspace.crypto.lsag import key_image
from vspace.identity import AuthSession, DidDocument, attest_node, measure, mfca_update
from vspace.ledger import PayloadKind, read_transcript
from vspace.protocol import (
    AttestationRejected,
    AuditFailed,
    AuthenticationFailed,
    CastStatus,
    CredentialRejected,
    DuplicateDid,
    DuplicateNullifier,
    DuplicateTrusteeIndex,
    ElectionState,
    EmptyRing,
    InsufficientShares,
    InvalidBallotProof,
    InvalidChoice,
    InvalidRingSignature,
    NotRegistered,
    Phase,
    PhaseViolation,
    QuorumNotMet,
    ReplayError,
    ShareProofInvalid,
    ShareVerificationFailed,
    TrusteeNode,
    build_ballot,
    cast_ballot,
    certify_result,
    close_registration,
    close_voting,
    finalize_tally,
    open_registration,
    partition_ring,
    register_voter,
    run_hyok_ceremony,
    setup_election,
    submit_cast,
    submit_decryption_share,
)
from vspace.protocol.records import ballot_context, check_ballot_proofs
from vspace.sim import adversary as adv
from vspace.sim.world import (
    MFCA_WEIGHTS,
    SETUP_TICK,
    authenticate,
    build_keyring,
    draft_manifest,
    make_voter,
    node_attestations,
)

A, B, C = 0, 1, 2
COMMIT, SPOIL = CastStatus.COMMITTED, CastStatus.SPOILED


def _draft(keys, params=TEST256, threshold=3):
    return draft_manifest(params, keys, EID, ["a", "b", "c"], 3, threshold, (10, 20), (30, 40))


@pytest.fixture(scope="module")
def keys():
    return build_keyring(TEST256, 7, 5, 5)


# setup


def test_setup_with_three_of_five_officers(keys):
    three = dict(list(keys.officers.items())[:3])
    state = setup_election(TEST256, _draft(keys), three, node_attestations(TEST256, keys, SETUP_TICK),
                           keys.registry, SETUP_TICK)
    assert state.phase == Phase.SETUP
    assert len(state.manifest.signatures) == 3
    assert state.ledger.entries[0].payload_kind == PayloadKind.MANIFEST


def test_setup_two_signatures_is_quorum_failure(keys):
    two = dict(list(keys.officers.items())[:2])
    with pytest.raises(QuorumNotMet):
        setup_election(TEST256, _draft(keys), two, node_attestations(TEST256, keys, SETUP_TICK), keys.registry,
                       SETUP_TICK)


def test_setup_rejects_unlisted_measurement(keys):
    reports = node_attestations(TEST256, keys, SETUP_TICK)
    reports[2] = attest_node(TEST256, keys.authority, reports[2].node_id, measure(b"rogue-image"), SETUP_TICK)
    with pytest.raises(AttestationRejected) as exc:
        setup_election(TEST256, _draft(keys), keys.officers, reports, keys.registry, SETUP_TICK)
    assert exc.value.node == reports[2].node_id


# key ceremony


def test_honest_ceremony_publishes_key():
    e = new_election()
    dealings = [en for en in e.state.ledger.entries if en.payload_kind == PayloadKind.DEALING]
    assert len(dealings) == 5
    assert e.state.election_pk is not None
    assert len(e.state.vks) == 5


def test_bad_share_aborts_naming_the_dealer():
    keys = build_keyring(TEST256, 3, 5, 5)
    state = setup_election(TEST256, _draft(keys), keys.officers, node_attestations(TEST256, keys, SETUP_TICK),
                           keys.registry, SETUP_TICK)

    class Cheater(TrusteeNode):
        def deal(self, params, threshold, trustee_pks, rng):
            d = super().deal(params, threshold, trustee_pks, rng)
            shares = dict(d.encrypted_shares)
            shares[4] = (shares[4] + 1) % params.q
            return VSSDealing(d.dealer_index, d.commitments, shares)

    trustees = list(keys.trustees)
    trustees[1] = Cheater(2, trustees[1].kp)
    n_before = len(state.ledger.entries)
    with pytest.raises(ShareVerificationFailed) as exc:
        run_hyok_ceremony(state, trustees, random.Random(0))
    assert exc.value.dealer == 2 and exc.value.trustee == 4
    assert len(state.ledger.entries) == n_before


def test_single_trustee_key_is_its_constant_term():
    params = TOY
    keys = build_keyring(params, 11, 5, 1)
    draft = _draft(keys, params, threshold=1)
    state = setup_election(params, draft, keys.officers, node_attestations(params, keys, SETUP_TICK),
                           keys.registry, SETUP_TICK)
    run_hyok_ceremony(state, keys.trustees, random.Random(4))
    assert state.election_pk == state.dealings[1][0]
    assert state.election_pk == params.gexp(keys.trustees[0].share)


# registration


def test_registration_and_duplicates():
    e = new_election()
    register(e, 1)
    v = e.voters[0]
    assert e.state.registrations[0].did == v.did
    with pytest.raises(DuplicateDid):
        register_voter(e.state, v.did_doc, v.credential, authenticate(v, e.state.clock))


def test_document_not_derived_from_its_key_is_rejected():
    e = new_election()
    v = make_voter(e.params, e.keys, EID, 1, 0)
    doc = DidDocument(v.did, keygen(e.params, e.rng).pk, 0)
    with pytest.raises(CredentialRejected):
        register_voter(e.state, doc, v.credential, authenticate(v, e.state.clock))


def test_fused_score_below_threshold_fails_authentication():
    e = new_election()
    v = make_voter(e.params, e.keys, EID, 1, 0)
    session = AuthSession(v.did, {"face": 0.5, "keystroke": 0.5})
    session = mfca_update(session, "face", 0.98, 10)
    session = mfca_update(session, "keystroke", 0.6, 10)
    assert session.fused_score == pytest.approx(0.79)
    with pytest.raises(AuthenticationFailed):
        register_voter(e.state, v.did_doc, v.credential, session)


def test_registration_outside_window_or_phase():
    e = new_election()
    v = make_voter(e.params, e.keys, EID, 1, 0)
    e.state.advance(21)
    with pytest.raises(PhaseViolation):
        register_voter(e.state, v.did_doc, v.credential, authenticate(v, 21))


# ring freeze


def test_close_registration_freezes_sorted_ring():
    e = new_election(max_ring_size=0)
    register(e, 100)
    digest = close_registration(e.state, e.keys.officers)
    assert len(e.state.ring) == 100
    assert list(e.state.ring) == sorted(v.kp.pk for v in e.voters)
    again = new_election(max_ring_size=0)
    register(again, 100)
    assert close_registration(again.state, again.keys.officers) == digest
    with pytest.raises(PhaseViolation):
        close_registration(e.state, e.keys.officers)


def test_close_registration_with_nobody_registered():
    e = new_election()
    with pytest.raises(EmptyRing):
        close_registration(e.state, e.keys.officers)


@given(n=st.integers(1, 300), m=st.integers(0, 80))
def test_partition_covers_ring_with_balanced_buckets(n, m):
    ring = tuple(range(n))
    buckets = partition_ring(ring, m)
    assert tuple(x for b in buckets for x in b) == ring
    sizes = [len(b) for b in buckets]
    assert max(sizes) - min(sizes) <= 1
    if m:
        assert max(sizes) <= m
    else:
        assert len(buckets) == 1


# casting


def test_cast_records_key_image_and_rejects_repeat():
    e = new_election()
    register(e, 3)
    to_voting(e)
    v = e.voters[0]
    rec = cast_ballot(e.state, v.kp.sk, B, COMMIT, e.rng)
    assert rec.key_image == key_image(e.params, v.kp.sk, e.state.ring_digest)
    assert rec.key_image in e.state.key_images
    with pytest.raises(DuplicateNullifier):
        cast_ballot(e.state, v.kp.sk, A, COMMIT, e.rng)


def test_spoil_consumes_the_nullifier():
    e = new_election()
    register(e, 2)
    to_voting(e)
    v = e.voters[0]
    cast_ballot(e.state, v.kp.sk, A, SPOIL, e.rng)
    with pytest.raises(DuplicateNullifier):
        cast_ballot(e.state, v.kp.sk, A, COMMIT, e.rng)
    assert e.state.spoiled == 1 and e.state.committed == 0


def test_cast_errors():
    e = new_election()
    register(e, 2)
    with pytest.raises(PhaseViolation):
        cast_ballot(e.state, e.voters[0].kp.sk, A, COMMIT, e.rng)
    to_voting(e)
    with pytest.raises(InvalidChoice):
        cast_ballot(e.state, e.voters[0].kp.sk, 3, COMMIT, e.rng)
    outsider = keygen(e.params, e.rng)
    with pytest.raises(NotRegistered):
        cast_ballot(e.state, outsider.sk, A, COMMIT, e.rng)


def test_cast_outside_voting_window():
    e = new_election()
    register(e, 1)
    to_voting(e)
    e.state.advance(41)
    with pytest.raises(PhaseViolation):
        cast_ballot(e.state, e.voters[0].kp.sk, A, COMMIT, e.rng)


def test_registry_rejects_crafted_ballots():
    e = new_election()
    register(e, 4)
    to_voting(e)
    n = len(e.state.ledger.entries)
    with pytest.raises(InvalidBallotProof):
        submit_cast(e.state, adv.bad_binary_ballot(e.state, e.voters[0].kp.sk, e.rng))
    with pytest.raises(InvalidBallotProof):
        submit_cast(e.state, adv.bad_sum_ballot(e.state, e.voters[1].kp.sk, e.rng))
    with pytest.raises(InvalidRingSignature):
        submit_cast(e.state, adv.outsider_ballot(e.state, keygen(e.params, e.rng), e.rng))
    assert len(e.state.ledger.entries) == n
    assert not e.state.key_images


@settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(seed=st.integers(0, 2**32))
def test_interloper_ring_signatures_are_rejected(seed):
    rng = random.Random(seed)
    e = _VOTING
    outsider = keygen(e.params, rng)
    with pytest.raises(InvalidRingSignature):
        e.state.validate_cast(adv.outsider_ballot(e.state, outsider, rng))


def _voting_election():
    e = new_election(seed=9)
    register(e, 6, seed=9)
    to_voting(e)
    return e


_VOTING = _voting_election()


def test_ballot_ciphertexts_decrypt_to_one_hot():
    e = new_election()
    register(e, 1)
    to_voting(e)
    rec = build_ballot(e.state, e.voters[0].kp.sk, C, COMMIT, e.rng)
    x = _election_secret(e)
    plain = [linear_dlog(e.params.p, e.params.g, decrypt_with_secret(e.params.p, x, ct.a, ct.b), 1)
             for ct in rec.ballot_cts]
    assert plain == [0, 0, 1]
    assert check_ballot_proofs(e.params, e.state.election_pk, e.state.manifest_hash, rec, 3) == (True, True)


def _election_secret(e):
    # interpolate trustee shares at zero; only a test holds all of them
    q = e.params.q
    ids = [1, 2, 3]
    total = 0
    for j in ids:
        lam = 1
        for m in ids:
            if m != j:
                lam = lam * m * pow(m - j, -1, q) % q
        total += lam * e.keys.trustees[j - 1].share
    x = total % q
    assert e.params.gexp(x) == e.state.election_pk
    return x


# tally


def test_spoiled_ballots_are_excluded():
    e = tallied([A, A, B, B], [COMMIT, COMMIT, COMMIT, SPOIL])
    assert e.state.tally.counts == (2, 1, 0)


def test_no_committed_ballots_gives_zero_counts():
    e = voted([A], [SPOIL])
    assert all(ct == IDENTITY for ct in e.state.aggregate)
    finalize_tally(e.state)
    assert e.state.tally.counts == (0, 0, 0)


def test_trustees_1_3_5_match_ground_truth():
    choices = [A, B, C, C, B, C]
    e = tallied(choices, trustees=(1, 3, 5))
    assert list(e.state.tally.counts) == brute_force_tally(choices, [False] * 6, 3)


def test_two_trustees_are_insufficient():
    e = voted([A, B], trustees=(1, 2))
    with pytest.raises(InsufficientShares):
        finalize_tally(e.state)
    assert not any(en.payload_kind == PayloadKind.RESULT for en in e.state.ledger.entries)


def test_every_threshold_subset_gives_identical_counts():
    base = voted([A, C, C, B, C], trustees=(1, 2, 3, 4, 5))
    results = set()
    for subset in combinations(range(1, 6), 3):
        s = ElectionState.replay(base.params, base.state.ledger.entries)
        s.shares = {j: s.shares[j] for j in subset}
        results.add(s.compute_tally().counts)
    assert results == {(1, 1, 3)}


def test_share_errors():
    e = voted([A, B], trustees=(1,))
    s = e.state
    with pytest.raises(DuplicateTrusteeIndex):
        e.share(1)
    t = e.keys.trustees[1]
    shares = t.decryption_shares(s.params, s.manifest_hash, s.aggregate, s.vks[2], e.rng)
    shares[0] = dataclasses.replace(shares[0], share_value=s.params.mul(shares[0].share_value, s.params.g))
    n = len(s.ledger.entries)
    with pytest.raises(ShareProofInvalid):
        submit_decryption_share(s, 2, shares, t.kp)
    assert len(s.ledger.entries) == n


def test_share_during_voting_is_a_phase_violation():
    e = _voting_election()
    t = e.keys.trustees[0]
    s = e.state
    shares = t.decryption_shares(s.params, s.manifest_hash, s.running_aggregate(), s.vks[1], e.rng)
    with pytest.raises(PhaseViolation):
        submit_decryption_share(s, 1, shares, t.kp)


# certification


class _Report:
    def __init__(self, *failing):
        Row = type("Row", (), {})
        self.checks = []
        for cid in ("chain.integrity", "cast.binary_proofs"):
            r = Row()
            r.check_id, r.tag, r.passed = cid, "Accuracy", cid not in failing
            self.checks.append(r)


def test_certification_gates_on_the_audit():
    e = tallied([A, B])
    with pytest.raises(AuditFailed) as exc:
        certify_result(e.state, e.keys.officers, _Report("cast.binary_proofs"))
    assert exc.value.check_id == "cast.binary_proofs"
    two = dict(list(e.keys.officers.items())[:2])
    with pytest.raises(QuorumNotMet):
        certify_result(e.state, two, _Report())
    certify_result(e.state, e.keys.officers, _Report())
    assert e.state.phase == Phase.CERTIFIED


# replay


def test_replay_reproduces_state_exactly():
    e = tallied([A, B, B], [COMMIT, SPOIL, COMMIT])
    certify_result(e.state, e.keys.officers, _Report())
    entries, cps = read_transcript(e.state.ledger.to_bytes())
    again = ElectionState.replay(e.params, entries, cps)
    assert again.snapshot() == e.state.snapshot()


def test_replay_makes_the_same_decisions_on_new_events():
    e = _voting_election()
    again = ElectionState.replay(e.params, e.state.ledger.entries, e.state.ledger.checkpoints, e.keys.registry)
    v = e.voters[0]
    rec = build_ballot(e.state, v.kp.sk, A, COMMIT, random.Random(1))
    submit_cast(e.state, rec)
    again.advance(e.state.clock)
    submit_cast(again, rec)
    assert again.snapshot() == e.state.snapshot()
    for s in (e.state, again):
        with pytest.raises(DuplicateNullifier):
            submit_cast(s, rec)


def test_replay_rejects_a_tampered_entry():
    e = tallied([A])
    entries = list(e.state.ledger.entries)
    bad = entries[3]
    flipped = bytes([bad.payload[0] ^ 1]) + bad.payload[1:]
    entries[3] = dataclasses.replace(bad, payload=flipped)
    with pytest.raises(ReplayError) as exc:
        ElectionState.replay(e.params, entries)
    assert exc.value.index == 3


def test_phase_transitions_increase():
    e = tallied([A, C])
    phases = [en.decoded()[1] for en in e.state.ledger.entries if en.payload_kind == PayloadKind.PHASE_TRANSITION]
    assert phases == sorted(set(phases))
    assert phases == [Phase.REGISTRATION, Phase.VOTING, Phase.TALLY]


def test_cast_entries_carry_no_identifiers():
    e = tallied([A, B, C, A])
    blobs = [en.to_bytes() for en in e.state.ledger.entries if en.payload_kind == PayloadKind.CAST]
    from vspace.crypto.encoding import encode

    for v in e.voters:
        for blob in blobs:
            assert v.did.encode() not in blob
            assert encode(v.kp.pk)[1:] not in blob


@settings(max_examples=8, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(st.tuples(st.integers(0, 2), st.booleans()), min_size=1, max_size=8), st.integers(0, 10**6))
def test_counts_equal_brute_force(ballots, seed):
    choices = [c for c, _ in ballots]
    spoiled = [s for _, s in ballots]
    e = tallied(choices, [SPOIL if s else COMMIT for s in spoiled], seed=seed % 50)
    assert list(e.state.tally.counts) == brute_force_tally(choices, spoiled, 3)


def test_no_result_without_threshold_shares():
    e = voted([A, B], trustees=(2, 4))
    for _ in range(2):
        with pytest.raises(InsufficientShares):
            finalize_tally(e.state)
    e.share(5)
    finalize_tally(e.state)
    assert e.state.tally.counts == (1, 1, 0)


def test_open_registration_needs_setup_phase():
    e = new_election()
    with pytest.raises(PhaseViolation):
        open_registration(e.state, e.keys.officers)


def test_close_voting_quorum():
    e = new_election()
    register(e, 1)
    to_voting(e)
    with pytest.raises(QuorumNotMet):
        close_voting(e.state, dict(list(e.keys.officers.items())[:2]))


def test_mfca_weights_sum_to_one():
    assert sum(MFCA_WEIGHTS.values()) == pytest.approx(1.0)


def test_ballot_context_binds_bucket():
    e = _VOTING
    assert ballot_context(e.state.manifest_hash, e.state.election_pk, b"x" * 32).digest() != \
        ballot_context(e.state.manifest_hash, e.state.election_pk, b"y" * 32).digest()
