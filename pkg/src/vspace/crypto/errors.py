"""Exceptions raised by the cryptographic core."""

from __future__ import annotations


class CryptoError(Exception):
    """Base class for crypto-core failures."""


class DecodeError(CryptoError):
    """Canonical bytes are malformed or a value fails validation."""

    def __init__(self, message: str, offset: int | None = None) -> None:
        super().__init__(message if offset is None else f"{message} (offset {offset})")
        self.offset = offset


class MessageTooLarge(CryptoError):
    pass


class InvalidWitness(CryptoError):
    pass


class SignerNotInRing(CryptoError):
    pass


class ShareVerificationFailed(CryptoError):
    def __init__(self, dealer: int, trustee: int) -> None:
        super().__init__(f"share from dealer {dealer} to trustee {trustee} failed verification")
        self.dealer = dealer
        self.trustee = trustee


class InsufficientDealings(CryptoError):
    pass


class InsufficientShares(CryptoError):
    def __init__(self, got: int, need: int) -> None:
        super().__init__(f"insufficient decryption shares: got {got}, need {need}")
        self.got = got
        self.need = need


class DuplicateTrusteeIndex(CryptoError):
    def __init__(self, index: int) -> None:
        super().__init__(f"duplicate trustee index {index}")
        self.index = index


class NotInRange(CryptoError):
    pass
