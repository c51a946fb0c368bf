"""Election state machine: setup, key ceremony, registration, casting, tally, certification."""

from ..crypto.errors import DuplicateTrusteeIndex, InsufficientShares, ShareVerificationFailed
from ..ledger import QuorumNotMet
from .errors import (
    AttestationRejected,
    AuditFailed,
    AuthenticationFailed,
    CredentialRejected,
    DuplicateDid,
    DuplicateKey,
    DuplicateNullifier,
    EmptyRing,
    InvalidBallotProof,
    InvalidCast,
    InvalidChoice,
    InvalidEntry,
    InvalidRingSignature,
    ManifestInvalid,
    NotRegistered,
    PhaseViolation,
    ProtocolError,
    ReplayError,
    ShareProofInvalid,
    TallyMismatch,
)
from .manifest import REGISTRY, ElectionManifest, Phase, make_schedule, officer_id, sign_manifest, trustee_id
from .operations import (
    build_ballot,
    cast_ballot,
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
from .records import (
    CastRecord,
    CastStatus,
    CertificationRecord,
    RegistrationRecord,
    TallyRecord,
    build_cast,
    partition_ring,
    tracker_for,
)
from .state import ElectionState, tally_context
from .trustee import TrusteeNode
