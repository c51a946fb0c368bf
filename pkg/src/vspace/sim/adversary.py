"""Hostile ballot and credential constructions used by scenario adversaries."""

from __future__ import annotations

from ..crypto.elgamal import encrypt
from ..crypto.group import Rng
from ..crypto.lsag import canonical_ring, lsag_sign, ring_digest
from ..crypto.proofs import ChaumPedersenProof, prove_binary
from ..crypto.schnorr import KeyPair
from ..identity import DidDocument, issue_credential
from ..protocol.records import (
    CastRecord,
    CastStatus,
    ballot_context,
    build_cast,
    candidate_context,
    cast_message,
    encrypt_ballot,
    ring_context,
    sign_cast,
)
from ..protocol.state import ElectionState


def second_ballot(state: ElectionState, sk: int, choice: int, rng: Rng) -> CastRecord:
    """A well-formed ballot from a voter who already cast; skips the client-side nullifier check."""
    m = state.manifest
    bucket = state.bucket_for(state.params.gexp(sk))
    return build_cast(state.params, m.election_id, state.manifest_hash, state.election_pk, bucket,
                      state.ring_digest, sk, choice, m.k, CastStatus.COMMITTED, rng)


def outsider_ballot(state: ElectionState, outsider: KeyPair, rng: Rng) -> CastRecord:
    """Ballot claiming a real ring but ring-signed over a ring with one slot swapped for the outsider."""
    params, m = state.params, state.manifest
    bucket = state.buckets[0]
    fake = canonical_ring([outsider.pk, *bucket[1:]])
    real_digest = ring_digest(bucket)
    ctx = ballot_context(state.manifest_hash, state.election_pk, real_digest)
    cts, proofs, sum_proof = encrypt_ballot(params, state.election_pk, [1] + [0] * (m.k - 1), ctx, rng)
    unsigned = CastRecord(cts, proofs, sum_proof, real_digest, CastStatus.COMMITTED, None)
    msg = cast_message(m.election_id, unsigned.body())
    sig = lsag_sign(params, fake, outsider.sk, fake.index(outsider.pk), msg, ring_context(state.manifest_hash),
                    rng, scope=state.ring_digest)
    return CastRecord(cts, proofs, sum_proof, real_digest, CastStatus.COMMITTED, sig)


def bad_binary_ballot(state: ElectionState, sk: int, rng: Rng) -> CastRecord:
    """Slot 0 encrypts 2; proofs are lifted from an honest one-hot ballot."""
    params, m = state.params, state.manifest
    bucket = state.bucket_for(params.gexp(sk))
    ctx = ballot_context(state.manifest_hash, state.election_pk, ring_digest(bucket))
    cts, proofs, sum_proof = encrypt_ballot(params, state.election_pk, [1] + [0] * (m.k - 1), ctx, rng)
    inflated = (encrypt(params, state.election_pk, 2, params.random_scalar(rng)),) + cts[1:]
    return sign_cast(params, m.election_id, state.manifest_hash, bucket, state.ring_digest, sk,
                     inflated, proofs, sum_proof, CastStatus.COMMITTED, rng)


def bad_sum_ballot(state: ElectionState, sk: int, rng: Rng) -> CastRecord:
    """Two slots set to 1, each with a valid binary proof; the sum proof cannot be honest."""
    params, m = state.params, state.manifest
    pk = state.election_pk
    bucket = state.bucket_for(params.gexp(sk))
    ctx = ballot_context(state.manifest_hash, pk, ring_digest(bucket))
    plain = [1, 1] + [0] * (m.k - 2)
    rs = [params.random_scalar(rng) for _ in plain]
    cts = tuple(encrypt(params, pk, v, r) for v, r in zip(plain, rs))
    proofs = tuple(prove_binary(params, pk, v, r, ct, candidate_context(ctx, i), rng)
                   for i, (v, r, ct) in enumerate(zip(plain, rs, cts)))
    forged = ChaumPedersenProof(params.random_scalar(rng), params.random_scalar(rng))
    return sign_cast(params, m.election_id, state.manifest_hash, bucket, state.ring_digest, sk,
                     cts, proofs, forged, CastStatus.COMMITTED, rng)


def forged_credential(params, rogue_issuer: KeyPair, holder: KeyPair, election_id: str, expires_at: int):
    doc = DidDocument.create(holder.pk)
    return doc, issue_credential(params, rogue_issuer, doc.did, election_id, "district-1", expires_at)
