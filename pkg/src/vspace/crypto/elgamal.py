"""Exponential ElGamal: additively homomorphic in the exponent."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable

from .errors import DecodeError, MessageTooLarge
from .group import GroupParams


@dataclass(frozen=True)
class Ciphertext:
    a: int  # g^r
    b: int  # pk^r * g^m

    def to_canonical(self) -> list:
        return [self.a, self.b]

    @classmethod
    def from_canonical(cls, value: list, params: GroupParams) -> "Ciphertext":
        if not isinstance(value, list) or len(value) != 2:
            raise DecodeError("ciphertext: expected 2 fields")
        return cls(params.check_element(value[0], "ciphertext.a"), params.check_element(value[1], "ciphertext.b"))

    def is_valid(self, params: GroupParams) -> bool:
        return params.is_element(self.a) and params.is_element(self.b)


IDENTITY = Ciphertext(1, 1)


def encrypt(
    params: GroupParams, pk: int, m: int, r: int, *, max_message: int | None = None
) -> Ciphertext:
    if m < 0 or (max_message is not None and m > max_message):
        raise MessageTooLarge(f"message {m} outside [0, {max_message}]")
    return Ciphertext(params.gexp(r), params.exp2(pk, r, params.g, m))


def ct_combine(params: GroupParams, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
    return Ciphertext(c1.a * c2.a % params.p, c1.b * c2.b % params.p)


def ct_sum(params: GroupParams, cts: Iterable[Ciphertext]) -> Ciphertext:
    return reduce(lambda x, y: ct_combine(params, x, y), cts, IDENTITY)
