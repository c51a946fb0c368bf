"""Ledger payload records and ballot construction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

from ..crypto.dkg import DecryptionShare
from ..crypto.elgamal import Ciphertext, ct_sum, encrypt
from ..crypto.encoding import encode
from ..crypto.errors import DecodeError
from ..crypto.group import GroupParams, Rng, sha256
from ..crypto.lsag import RingSignature, lsag_sign, lsag_verify, ring_digest
from ..crypto.proofs import (
    BinaryProof,
    ChaumPedersenProof,
    prove_binary,
    prove_sum_one,
    verify_binary,
    verify_sum_one,
)
from ..crypto.schnorr import SchnorrSignature
from ..crypto.transcript import Transcript
from ..identity import EligibilityCredential

CERTIFICATION_DOMAIN = "vspace/certification"


class CastStatus(IntEnum):
    COMMITTED = 1
    SPOILED = 2


@dataclass(frozen=True)
class RegistrationRecord:
    did: str
    voting_pk: int
    credential: EligibilityCredential
    registered_at: int

    def to_canonical(self) -> list:
        return [self.did, self.voting_pk, self.credential.to_canonical(), self.registered_at]

    @classmethod
    def from_canonical(cls, value, params: GroupParams) -> "RegistrationRecord":
        try:
            did, pk, cred, at = value
        except (TypeError, ValueError):
            raise DecodeError("registration: expected 4 fields") from None
        if not isinstance(did, str) or not isinstance(at, int):
            raise DecodeError("registration: field types")
        return cls(did, params.check_element(pk, "voting pk"),
                   EligibilityCredential.from_canonical(cred, params), at)


@dataclass(frozen=True)
class CastRecord:
    ballot_cts: tuple[Ciphertext, ...]
    binary_proofs: tuple[BinaryProof, ...]
    sum_proof: ChaumPedersenProof
    ring_digest: bytes
    status: CastStatus
    ring_sig: RingSignature

    def body(self) -> list:
        """Everything the ring signature covers."""
        return [[c.to_canonical() for c in self.ballot_cts],
                [p.to_canonical() for p in self.binary_proofs],
                self.sum_proof.to_canonical(), self.ring_digest, int(self.status)]

    def to_canonical(self) -> list:
        return self.body() + [self.ring_sig.to_canonical()]

    def to_bytes(self) -> bytes:
        return encode(self.to_canonical())

    @property
    def tracker(self) -> bytes:
        return tracker_for(self.to_bytes())

    @property
    def key_image(self) -> int:
        return self.ring_sig.key_image

    @classmethod
    def from_canonical(cls, value, params: GroupParams) -> "CastRecord":
        try:
            cts, proofs, sum_proof, digest, status, sig = value
            record = cls(
                tuple(Ciphertext.from_canonical(c, params) for c in cts),
                tuple(BinaryProof.from_canonical(p, params) for p in proofs),
                ChaumPedersenProof.from_canonical(sum_proof, params),
                digest, CastStatus(status), RingSignature.from_canonical(sig, params),
            )
        except (TypeError, ValueError) as exc:
            raise DecodeError(f"cast: {exc}") from None
        if not isinstance(digest, bytes) or len(digest) != 32:
            raise DecodeError("cast: ring digest must be 32 bytes")
        if len(record.ballot_cts) != len(record.binary_proofs):
            raise DecodeError("cast: ciphertext/proof count mismatch")
        return record


def tracker_for(cast_payload: bytes) -> bytes:
    return sha256(b"vspace/tracker" + cast_payload)


@dataclass(frozen=True)
class TallyRecord:
    aggregate_cts: tuple[Ciphertext, ...]
    counts: tuple[int, ...]
    shares_per_candidate: tuple[tuple[DecryptionShare, ...], ...]

    def to_canonical(self) -> list:
        return [[c.to_canonical() for c in self.aggregate_cts], list(self.counts),
                [[s.to_canonical() for s in shares] for shares in self.shares_per_candidate]]

    def result_hash(self) -> bytes:
        return sha256(encode(["vspace/tally", self.to_canonical()]))


@dataclass(frozen=True)
class CertificationRecord:
    result_hash: bytes
    verdict: tuple[tuple[str, str, int], ...]  # (check_id, requirement tag, passed)
    signatures: tuple[tuple[str, SchnorrSignature], ...]

    @property
    def verdict_hash(self) -> bytes:
        return verdict_hash(self.verdict)

    def to_canonical(self) -> list:
        return [self.result_hash, [list(v) for v in self.verdict],
                [[oid, s.to_canonical()] for oid, s in self.signatures]]

    @classmethod
    def from_canonical(cls, value, params: GroupParams) -> "CertificationRecord":
        try:
            rh, verdict, sigs = value
            rec = cls(rh, tuple((a, b, c) for a, b, c in verdict),
                      tuple((oid, SchnorrSignature.from_canonical(s, params)) for oid, s in sigs))
        except (TypeError, ValueError) as exc:
            raise DecodeError(f"certification: {exc}") from None
        if not isinstance(rh, bytes):
            raise DecodeError("certification: result hash")
        return rec


def verdict_hash(verdict: Sequence[Sequence]) -> bytes:
    return sha256(encode(["vspace/verdict", [list(v) for v in verdict]]))


def certification_message(election_id: str, result_hash: bytes, vhash: bytes) -> bytes:
    return encode(["vspace/certify", election_id, result_hash, vhash])


# rings


def partition_ring(ring: Sequence[int], max_size: int) -> tuple[tuple[int, ...], ...]:
    """Split a sorted ring into ``ceil(n / max_size)`` contiguous buckets of near-equal size.

    ``max_size == 0`` keeps the whole ring as one bucket.
    """
    n = len(ring)
    if n == 0:
        return ()
    b = 1 if max_size == 0 else math.ceil(n / max_size)
    return tuple(tuple(ring[i * n // b:(i + 1) * n // b]) for i in range(b))


# ballot construction


def ballot_context(manifest_hash: bytes, election_pk: int, bucket_digest: bytes) -> Transcript:
    return Transcript("vspace/ballot", manifest_hash, election_pk, bucket_digest)


def ring_context(manifest_hash: bytes) -> Transcript:
    return Transcript("vspace/cast-ring", manifest_hash)


def candidate_context(ctx: Transcript, i: int) -> Transcript:
    return ctx.fork("candidate").absorb(i)


def cast_message(election_id: str, body: list) -> bytes:
    return encode(["vspace/cast", election_id, body])


def encrypt_ballot(
    params: GroupParams, election_pk: int, plaintexts: Sequence[int], ctx: Transcript, rng: Rng
) -> tuple[tuple[Ciphertext, ...], tuple[BinaryProof, ...], ChaumPedersenProof]:
    """Encrypt a one-hot vector with per-slot binary proofs and a sum-one proof."""
    rs = [params.random_scalar(rng) for _ in plaintexts]
    cts = tuple(encrypt(params, election_pk, m, r) for m, r in zip(plaintexts, rs))
    proofs = tuple(prove_binary(params, election_pk, m, r, ct, candidate_context(ctx, i), rng)
                   for i, (m, r, ct) in enumerate(zip(plaintexts, rs, cts)))
    total = ct_sum(params, cts)
    sum_proof = prove_sum_one(params, election_pk, sum(rs) % params.q, total, ctx, rng)
    return cts, proofs, sum_proof


def sign_cast(
    params: GroupParams,
    election_id: str,
    manifest_hash: bytes,
    bucket: Sequence[int],
    scope: bytes,
    sk: int,
    cts: Sequence[Ciphertext],
    proofs: Sequence[BinaryProof],
    sum_proof: ChaumPedersenProof,
    status: CastStatus,
    rng: Rng,
) -> CastRecord:
    digest = ring_digest(bucket)
    unsigned = CastRecord(tuple(cts), tuple(proofs), sum_proof, digest, status, RingSignature(1, 0, ()))
    msg = cast_message(election_id, unsigned.body())
    signer = list(bucket).index(params.gexp(sk))
    sig = lsag_sign(params, bucket, sk, signer, msg, ring_context(manifest_hash), rng, scope=scope)
    return CastRecord(unsigned.ballot_cts, unsigned.binary_proofs, sum_proof, digest, status, sig)


def build_cast(
    params: GroupParams,
    election_id: str,
    manifest_hash: bytes,
    election_pk: int,
    bucket: Sequence[int],
    scope: bytes,
    sk: int,
    choice: int,
    k: int,
    status: CastStatus,
    rng: Rng,
) -> CastRecord:
    plaintexts = [1 if i == choice else 0 for i in range(k)]
    ctx = ballot_context(manifest_hash, election_pk, ring_digest(bucket))
    cts, proofs, sum_proof = encrypt_ballot(params, election_pk, plaintexts, ctx, rng)
    return sign_cast(params, election_id, manifest_hash, bucket, scope, sk, cts, proofs, sum_proof, status, rng)


def check_ballot_proofs(
    params: GroupParams, election_pk: int, manifest_hash: bytes, record: CastRecord, k: int
) -> tuple[bool, bool]:
    """Return ``(binary_ok, sum_ok)``."""
    if len(record.ballot_cts) != k:
        return False, False
    ctx = ballot_context(manifest_hash, election_pk, record.ring_digest)
    binary_ok = all(
        verify_binary(params, election_pk, ct, proof, candidate_context(ctx, i))
        for i, (ct, proof) in enumerate(zip(record.ballot_cts, record.binary_proofs))
    )
    sum_ok = verify_sum_one(params, election_pk, ct_sum(params, record.ballot_cts), record.sum_proof, ctx)
    return binary_ok, sum_ok


def check_ring_signature(
    params: GroupParams,
    election_id: str,
    manifest_hash: bytes,
    bucket: Sequence[int],
    scope: bytes,
    record: CastRecord,
) -> bool:
    msg = cast_message(election_id, record.body())
    return lsag_verify(params, bucket, msg, record.ring_sig, ring_context(manifest_hash), scope=scope)
