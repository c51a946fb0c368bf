"""Key pairs and Schnorr signatures."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DecodeError
from .group import GroupParams, Rng, hash_items


@dataclass(frozen=True)
class KeyPair:
    sk: int
    pk: int

    def __repr__(self) -> str:  # keep secrets out of logs
        return f"KeyPair(pk={self.pk:#x})"


@dataclass(frozen=True)
class SchnorrSignature:
    challenge: int
    response: int

    def to_canonical(self) -> list:
        return [self.challenge, self.response]

    @classmethod
    def from_canonical(cls, value: list, params: GroupParams) -> "SchnorrSignature":
        if not isinstance(value, list) or len(value) != 2:
            raise DecodeError("signature: expected 2 fields")
        return cls(
            params.check_scalar(value[0], "signature challenge"),
            params.check_scalar(value[1], "signature response"),
        )


def keypair_from_secret(params: GroupParams, sk: int) -> KeyPair:
    if not 0 < sk < params.q:
        raise ValueError("secret key must lie in [1, q)")
    return KeyPair(sk, params.gexp(sk))


def keygen(params: GroupParams, rng: Rng) -> KeyPair:
    """Sample ``sk`` uniformly from ``[1, q)``; a zero draw is resampled."""
    while True:
        sk = rng.randrange(params.q)
        if sk:
            return keypair_from_secret(params, sk)


def _challenge(params: GroupParams, domain: str, pk: int, commitment: int, msg: bytes) -> int:
    return params.hash_to_scalar("vspace/schnorr", domain, pk, commitment, msg)


def schnorr_sign(params: GroupParams, kp: KeyPair, msg: bytes, domain: str) -> SchnorrSignature:
    # Deterministic nonce: no randomness source needed and no nonce reuse across messages.
    counter = 0
    while True:
        nonce = int.from_bytes(
            hash_items("vspace/schnorr-nonce", params.label, kp.sk, kp.pk, domain, msg, counter),
            "big",
        ) % params.q
        if nonce:
            break
        counter += 1
    c = _challenge(params, domain, kp.pk, params.gexp(nonce), msg)
    return SchnorrSignature(c, (nonce - c * kp.sk) % params.q)


def schnorr_verify(
    params: GroupParams, pk: int, msg: bytes, domain: str, sig: SchnorrSignature
) -> bool:
    if not (params.is_element(pk) and params.is_scalar(sig.challenge) and params.is_scalar(sig.response)):
        return False
    commitment = params.exp2(params.g, sig.response, pk, sig.challenge)
    return _challenge(params, domain, pk, commitment, msg) == sig.challenge
