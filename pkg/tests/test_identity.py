import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vspace.crypto import keygen
from vspace.identity import (
    AuthSession,
    DidDocument,
    Reason,
    ScoreOutOfRange,
    attest_node,
    did_for_pk,
    issue_credential,
    measure,
    mfca_authenticated,
    mfca_update,
    verify_attestation,
    verify_presentation,
)


@pytest.fixture
def issuer(group, rng):
    return keygen(group, rng)


@pytest.fixture
def cred(group, issuer):
    return issue_credential(group, issuer, "did:vspace:abc", "E1", "north", expires_at=50)


class TestCredentials:
    def test_roundtrip(self, group, issuer, cred):
        assert verify_presentation(group, cred, "E1", issuer.pk, now=10)

    def test_expired(self, group, issuer, cred):
        v = verify_presentation(group, cred, "E1", issuer.pk, now=51)
        assert not v and v.reason is Reason.EXPIRED

    def test_expiry_inclusive(self, group, issuer, cred):
        assert verify_presentation(group, cred, "E1", issuer.pk, now=50)

    def test_wrong_election(self, group, issuer, cred):
        assert verify_presentation(group, cred, "E2", issuer.pk, now=1).reason is Reason.WRONG_ELECTION

    def test_flipped_constituency_byte(self, group, issuer, cred):
        forged = dataclasses.replace(cred, constituency="nort\x68"[:-1] + "i")
        assert verify_presentation(group, forged, "E1", issuer.pk, 1).reason is Reason.BAD_SIGNATURE

    def test_wrong_issuer(self, group, rng, cred):
        other = keygen(group, rng)
        assert verify_presentation(group, cred, "E1", other.pk, 1).reason is Reason.BAD_SIGNATURE

    @pytest.mark.parametrize(
        "field,value",
        [("subject_did", "did:vspace:abd"), ("election_id", "E1 "), ("constituency", "south"), ("expires_at", 51)],
    )
    def test_single_field_mutation(self, group, issuer, cred, field, value):
        forged = dataclasses.replace(cred, **{field: value})
        assert not verify_presentation(group, forged, forged.election_id, issuer.pk, 0)

    def test_signature_mutation(self, group, issuer, cred):
        sig = dataclasses.replace(cred.issuer_signature, response=(cred.issuer_signature.response + 1) % group.q)
        assert not verify_presentation(group, dataclasses.replace(cred, issuer_signature=sig), "E1", issuer.pk, 0)


class TestDid:
    def test_deterministic(self, group, rng):
        kp = keygen(group, rng)
        assert did_for_pk(kp.pk) == did_for_pk(kp.pk)
        assert DidDocument.create(kp.pk).is_consistent()
        assert did_for_pk(kp.pk).startswith("did:vspace:") and len(did_for_pk(kp.pk)) == 11 + 64

    def test_distinct_keys_distinct_dids(self, group, rng):
        dids = {did_for_pk(keygen(group, rng).pk) for _ in range(200)}
        assert len(dids) == 200

    def test_inconsistent_document(self, group, rng):
        a, b = keygen(group, rng), keygen(group, rng)
        assert not DidDocument(did_for_pk(a.pk), b.pk, 0).is_consistent()


WEIGHTS = {"face": 0.5, "keystroke": 0.5}


class TestMfca:
    def test_hand_computed_fusion(self):
        s = AuthSession("d", WEIGHTS)
        s = mfca_update(s, "face", 1.0, now=1)
        s = mfca_update(s, "keystroke", 0.6, now=1)
        assert s.fused_score == pytest.approx(0.8)
        assert mfca_authenticated(s, 0.8, now=2)

    def test_below_threshold(self):
        s = AuthSession("d", WEIGHTS, {"face": 0.98, "keystroke": 0.6})
        assert s.fused_score == pytest.approx(0.79)
        assert not mfca_authenticated(s, 0.8, now=0)

    @pytest.mark.parametrize("threshold", [1e-6, 0.1, 0.8, 1.0])
    def test_zero_scores(self, threshold):
        s = AuthSession("d", WEIGHTS, {"face": 0.0, "keystroke": 0.0})
        assert not mfca_authenticated(s, threshold, now=0)

    def test_stale(self):
        s = AuthSession("d", WEIGHTS, {"face": 1.0, "keystroke": 1.0}, last_update=0, ttl=10)
        assert mfca_authenticated(s, 0.8, now=10)
        assert not mfca_authenticated(s, 0.8, now=11)

    def test_score_range(self):
        with pytest.raises(ScoreOutOfRange):
            mfca_update(AuthSession("d", WEIGHTS), "face", 1.2, now=0)

    def test_weights_validated(self):
        with pytest.raises(ValueError):
            AuthSession("d", {"face": 0.7, "keystroke": 0.7})

    @given(
        a=st.floats(0, 1), b=st.floats(0, 1), bump=st.floats(0, 1),
        w=st.floats(0, 1),
    )
    def test_fusion_monotone(self, a, b, bump, w):
        weights = {"face": w, "keystroke": 1 - w}
        base = AuthSession("d", weights, {"face": a, "keystroke": b})
        higher = AuthSession("d", weights, {"face": max(a, bump), "keystroke": b})
        assert higher.fused_score >= base.fused_score - 1e-12
        assert 0.0 <= base.fused_score <= 1.0 + 1e-12


class TestAttestation:
    def test_fresh_allow_listed(self, group, rng):
        auth = keygen(group, rng)
        m = measure(b"node-image-v1")
        report = attest_node(group, auth, "po-1", m, now=5)
        assert verify_attestation(group, report, auth.pk, [m], now=6, max_age=10)

    def test_unknown_measurement(self, group, rng):
        auth = keygen(group, rng)
        report = attest_node(group, auth, "po-1", measure(b"rogue"), now=5)
        v = verify_attestation(group, report, auth.pk, [measure(b"node-image-v1")], now=6, max_age=10)
        assert v.reason is Reason.UNKNOWN_MEASUREMENT

    def test_stale(self, group, rng):
        auth = keygen(group, rng)
        m = measure(b"x")
        report = attest_node(group, auth, "po-1", m, now=5)
        assert verify_attestation(group, report, auth.pk, [m], now=20, max_age=10).reason is Reason.STALE_REPORT

    def test_bad_signature(self, group, rng):
        auth, other = keygen(group, rng), keygen(group, rng)
        m = measure(b"x")
        report = attest_node(group, other, "po-1", m, now=5)
        assert verify_attestation(group, report, auth.pk, [m], now=5, max_age=10).reason is Reason.BAD_SIGNATURE

    def test_pure_function(self, group, rng):
        auth = keygen(group, rng)
        m = measure(b"x")
        report = attest_node(group, auth, "po-1", m, now=5)
        results = {verify_attestation(group, report, auth.pk, [m], now=7, max_age=3) for _ in range(3)}
        assert len(results) == 1
        assert '"node_id": "po-1"' in report.to_json()
