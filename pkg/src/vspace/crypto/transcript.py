"""Fiat-Shamir transcripts."""

from __future__ import annotations

import hashlib
from typing import Any

from .encoding import encode


class Transcript:
    """Domain-separated absorb-then-challenge channel.

    The challenge is ``SHA-256(encode(domain_label) || absorbed) mod q`` where
    ``absorbed`` is the concatenated canonical encoding of every absorbed
    item, in order.
    """

    __slots__ = ("domain_label", "_hash", "_absorbed")

    def __init__(self, domain_label: str, *items: Any) -> None:
        self.domain_label = domain_label
        self._hash = hashlib.sha256(encode(domain_label))
        self._absorbed = bytearray()
        self.absorb(*items)

    def absorb(self, *items: Any) -> "Transcript":
        for item in items:
            raw = encode(item)
            self._hash.update(raw)
            self._absorbed += raw
        return self

    @property
    def absorbed(self) -> bytes:
        return bytes(self._absorbed)

    def fork(self, label: str) -> "Transcript":
        """Copy of this transcript with ``label`` absorbed; the original is untouched."""
        child = Transcript.__new__(Transcript)
        child.domain_label = self.domain_label
        child._hash = self._hash.copy()
        child._absorbed = bytearray(self._absorbed)
        return child.absorb(label)

    def digest(self) -> bytes:
        return self._hash.digest()

    def challenge(self, q: int) -> int:
        return int.from_bytes(self._hash.digest(), "big") % q
