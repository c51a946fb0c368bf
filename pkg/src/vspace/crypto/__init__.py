"""Cryptographic primitives: group, signatures, ElGamal, sigma proofs, LSAG, DKG."""

from .dkg import (
    DecryptionShare,
    VSSDealing,
    combine_shares,
    dkg_aggregate,
    dkg_deal,
    dkg_verify_share,
    interpolate_at_zero,
    lagrange_coefficient,
    open_share,
    partial_decrypt,
    verification_key,
    verify_share_proof,
)
from .dlog import decode_dlog
from .elgamal import IDENTITY, Ciphertext, ct_combine, ct_sum, encrypt
from .encoding import decode, encode
from .errors import (
    CryptoError,
    DecodeError,
    DuplicateTrusteeIndex,
    InsufficientDealings,
    InsufficientShares,
    InvalidWitness,
    MessageTooLarge,
    NotInRange,
    ShareVerificationFailed,
    SignerNotInRing,
)
from .group import MODP2048, TEST256, TOY, GroupParams, Rng, derive_rng, get_group, sha256
from .lsag import RingSignature, canonical_ring, key_image, lsag_sign, lsag_verify, ring_digest
from .proofs import (
    BinaryProof,
    ChaumPedersenProof,
    prove_binary,
    prove_dlog_equality,
    prove_sum_one,
    verify_binary,
    verify_dlog_equality,
    verify_sum_one,
)
from .schnorr import KeyPair, SchnorrSignature, keygen, keypair_from_secret, schnorr_sign, schnorr_verify
from .transcript import Transcript
