"""Self-sovereign identity artifacts: DIDs, eligibility credentials,
continuous-authentication sessions and node attestation reports.

Biometric scoring and hardware attestation are simulated: modality scores
are inputs, and attestation reports are signed by a software authority key.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping

from .crypto.encoding import encode, encode_int
from .crypto.errors import DecodeError
from .crypto.group import GroupParams, sha256
from .crypto.schnorr import KeyPair, SchnorrSignature, schnorr_sign, schnorr_verify

DID_PREFIX = "did:vspace:"
CREDENTIAL_DOMAIN = "vspace/credential"
ATTESTATION_DOMAIN = "vspace/attestation"

DEFAULT_MFCA_THRESHOLD = 0.8
DEFAULT_MFCA_TTL = 10
_FUSION_EPS = 1e-9


class Reason(str, Enum):
    BAD_SIGNATURE = "BadSignature"
    WRONG_ELECTION = "WrongElection"
    EXPIRED = "Expired"
    SUBJECT_MISMATCH = "SubjectMismatch"
    UNKNOWN_MEASUREMENT = "UnknownMeasurement"
    STALE_REPORT = "StaleReport"


@dataclass(frozen=True)
class Verdict:
    """Boolean outcome with the reason for rejection."""

    ok: bool
    reason: Reason | None = None

    def __bool__(self) -> bool:
        return self.ok


ACCEPTED = Verdict(True)


class ScoreOutOfRange(ValueError):
    pass


# DIDs


def did_for_pk(pk: int) -> str:
    return DID_PREFIX + sha256(encode_int(pk)).hex()


@dataclass(frozen=True)
class DidDocument:
    did: str
    pk: int
    created_at: int

    @classmethod
    def create(cls, pk: int, created_at: int = 0) -> "DidDocument":
        return cls(did_for_pk(pk), pk, created_at)

    def is_consistent(self) -> bool:
        return self.did == did_for_pk(self.pk)

    def to_canonical(self) -> list:
        return [self.did, self.pk, self.created_at]

    @classmethod
    def from_canonical(cls, value: list, params: GroupParams) -> "DidDocument":
        if not isinstance(value, list) or len(value) != 3:
            raise DecodeError("did document: expected 3 fields")
        return cls(value[0], params.check_element(value[1], "did pk"), value[2])


# credentials


@dataclass(frozen=True)
class EligibilityCredential:
    subject_did: str
    election_id: str
    constituency: str
    expires_at: int
    issuer_signature: SchnorrSignature

    def signed_bytes(self) -> bytes:
        return credential_bytes(self.subject_did, self.election_id, self.constituency, self.expires_at)

    def to_canonical(self) -> list:
        return [self.subject_did, self.election_id, self.constituency, self.expires_at,
                self.issuer_signature.to_canonical()]

    @classmethod
    def from_canonical(cls, value: list, params: GroupParams) -> "EligibilityCredential":
        if not isinstance(value, list) or len(value) != 5:
            raise DecodeError("credential: expected 5 fields")
        return cls(value[0], value[1], value[2], value[3],
                   SchnorrSignature.from_canonical(value[4], params))


def credential_bytes(subject_did: str, election_id: str, constituency: str, expires_at: int) -> bytes:
    return encode([subject_did, election_id, constituency, expires_at])


def issue_credential(
    params: GroupParams,
    issuer_kp: KeyPair,
    subject_did: str,
    election_id: str,
    constituency: str,
    expires_at: int,
) -> EligibilityCredential:
    msg = credential_bytes(subject_did, election_id, constituency, expires_at)
    sig = schnorr_sign(params, issuer_kp, msg, CREDENTIAL_DOMAIN)
    return EligibilityCredential(subject_did, election_id, constituency, expires_at, sig)


def verify_presentation(
    params: GroupParams,
    cred: EligibilityCredential,
    expected_election: str,
    issuer_pk: int,
    now: int,
) -> Verdict:
    """Signature, then election binding, then expiry (valid at ``now == expires_at``)."""
    if not schnorr_verify(params, issuer_pk, cred.signed_bytes(), CREDENTIAL_DOMAIN, cred.issuer_signature):
        return Verdict(False, Reason.BAD_SIGNATURE)
    if cred.election_id != expected_election:
        return Verdict(False, Reason.WRONG_ELECTION)
    if now > cred.expires_at:
        return Verdict(False, Reason.EXPIRED)
    return ACCEPTED


# continuous authentication


@dataclass(frozen=True)
class AuthSession:
    did: str
    weights: Mapping[str, float]
    modality_scores: Mapping[str, float] = field(default_factory=dict)
    last_update: int = 0
    ttl: int = DEFAULT_MFCA_TTL

    def __post_init__(self) -> None:
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("weights must be non-negative")
        if not math.isclose(math.fsum(self.weights.values()), 1.0, abs_tol=1e-9):
            raise ValueError("weights must sum to 1")

    @property
    def fused_score(self) -> float:
        return math.fsum(w * self.modality_scores.get(m, 0.0) for m, w in self.weights.items())

    def is_stale(self, now: int) -> bool:
        return now - self.last_update > self.ttl


def mfca_update(session: AuthSession, modality: str, score: float, now: int) -> AuthSession:
    if not 0.0 <= score <= 1.0:
        raise ScoreOutOfRange(f"score {score} for {modality!r} outside [0, 1]")
    if modality not in session.weights:
        raise KeyError(f"modality {modality!r} has no fusion weight")
    scores = dict(session.modality_scores)
    scores[modality] = score
    return replace(session, modality_scores=scores, last_update=now)


def mfca_authenticated(session: AuthSession, threshold: float, now: int) -> bool:
    if session.is_stale(now):
        return False
    return session.fused_score >= threshold - _FUSION_EPS


# attestation


@dataclass(frozen=True)
class AttestationReport:
    node_id: str
    measurement: bytes
    issued_at: int
    authority_signature: SchnorrSignature

    def signed_bytes(self) -> bytes:
        return encode([self.node_id, self.measurement, self.issued_at])

    def to_canonical(self) -> list:
        return [self.node_id, self.measurement, self.issued_at, self.authority_signature.to_canonical()]

    @classmethod
    def from_canonical(cls, value: list, params: GroupParams) -> "AttestationReport":
        if not isinstance(value, list) or len(value) != 4:
            raise DecodeError("attestation: expected 4 fields")
        return cls(value[0], value[1], value[2], SchnorrSignature.from_canonical(value[3], params))

    def to_json(self) -> str:
        return json.dumps(
            {
                "node_id": self.node_id,
                "measurement": self.measurement.hex(),
                "issued_at": self.issued_at,
                "authority_signature": {
                    "challenge": hex(self.authority_signature.challenge),
                    "response": hex(self.authority_signature.response),
                },
            },
            sort_keys=True,
        )


def measure(config: bytes) -> bytes:
    """256-bit measurement of a node configuration."""
    return sha256(b"vspace/measurement" + config)


def attest_node(
    params: GroupParams, authority_kp: KeyPair, node_id: str, measurement: bytes, now: int
) -> AttestationReport:
    msg = encode([node_id, measurement, now])
    return AttestationReport(node_id, measurement, now, schnorr_sign(params, authority_kp, msg, ATTESTATION_DOMAIN))


def verify_attestation(
    params: GroupParams,
    report: AttestationReport,
    authority_pk: int,
    allow_list: Iterable[bytes],
    now: int,
    max_age: int,
) -> Verdict:
    if not schnorr_verify(params, authority_pk, report.signed_bytes(), ATTESTATION_DOMAIN,
                          report.authority_signature):
        return Verdict(False, Reason.BAD_SIGNATURE)
    if report.measurement not in set(allow_list):
        return Verdict(False, Reason.UNKNOWN_MEASUREMENT)
    if now - report.issued_at > max_age or report.issued_at > now:
        return Verdict(False, Reason.STALE_REPORT)
    return ACCEPTED
