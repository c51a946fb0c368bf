"""Protocol-level rejections.

Crypto-layer failures that the protocol surfaces unchanged
(``InsufficientShares``, ``DuplicateTrusteeIndex``, ``ShareVerificationFailed``)
and the ledger's ``QuorumNotMet`` are re-exported from the package root.
"""

from __future__ import annotations


class ProtocolError(Exception):
    """Base class for rejected protocol events."""


class ManifestInvalid(ProtocolError):
    pass


class PhaseViolation(ProtocolError):
    pass


class InvalidEntry(ProtocolError):
    """Payload is malformed or disagrees with state derived from earlier entries."""


class AttestationRejected(ProtocolError):
    def __init__(self, node: str, reason: str) -> None:
        super().__init__(f"attestation rejected for {node}: {reason}")
        self.node = node
        self.reason = reason


class CredentialRejected(ProtocolError):
    def __init__(self, reason: str) -> None:
        super().__init__(f"credential rejected: {reason}")
        self.reason = reason


class AuthenticationFailed(ProtocolError):
    pass


class DuplicateDid(ProtocolError):
    pass


class DuplicateKey(ProtocolError):
    pass


class EmptyRing(ProtocolError):
    pass


class NotRegistered(ProtocolError):
    pass


class DuplicateNullifier(ProtocolError):
    pass


class InvalidChoice(ProtocolError):
    def __init__(self, index: int, k: int) -> None:
        super().__init__(f"choice {index} outside [0, {k})")
        self.index = index


class InvalidCast(ProtocolError):
    """Cast payload failed structural or proof checks."""


class InvalidBallotProof(InvalidCast):
    pass


class InvalidRingSignature(InvalidCast):
    pass


class ShareProofInvalid(ProtocolError):
    pass


class TallyMismatch(ProtocolError):
    pass


class AuditFailed(ProtocolError):
    def __init__(self, check_id: str) -> None:
        super().__init__(f"audit failed at {check_id}")
        self.check_id = check_id


class ReplayError(ProtocolError):
    def __init__(self, index: int, cause: Exception) -> None:
        super().__init__(f"entry {index}: {type(cause).__name__}: {cause}")
        self.index = index
        self.cause = cause
