"""Linkable spontaneous anonymous group (LSAG) ring signatures.

Each ring member ``i`` has a linking base ``h_i = H2(scope, pk_i)``; the
signer publishes the key image ``I = h_pi^sk``. ``scope`` defaults to the
ring digest, so two signatures by one key under the same scope carry the
same key image regardless of message.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .encoding import encode, encode_int
from .errors import DecodeError, SignerNotInRing
from .group import GroupParams, Rng, sha256
from .transcript import Transcript


@dataclass(frozen=True)
class RingSignature:
    key_image: int
    c0: int
    responses: tuple[int, ...]

    def to_canonical(self) -> list:
        return [self.key_image, self.c0, list(self.responses)]

    @classmethod
    def from_canonical(cls, value: list, params: GroupParams) -> "RingSignature":
        if not isinstance(value, list) or len(value) != 3 or not isinstance(value[2], list):
            raise DecodeError("ring signature: expected 3 fields")
        return cls(
            params.check_element(value[0], "key image"),
            params.check_scalar(value[1], "ring c0"),
            tuple(params.check_scalar(s, "ring response") for s in value[2]),
        )


def canonical_ring(ring: Sequence[int]) -> list[int]:
    """Deduplicated ring sorted by canonical encoding (numeric order)."""
    return sorted(set(ring), key=encode_int)


def ring_digest(ring: Sequence[int]) -> bytes:
    return sha256(encode(["vspace/ring", list(ring)]))


@lru_cache(maxsize=1 << 16)
def linking_base(params: GroupParams, scope: bytes, pk: int) -> int:
    return params.hash_to_group(encode(["vspace/lsag-link", scope, pk]))


def key_image(params: GroupParams, sk: int, scope: bytes) -> int:
    return params.exp(linking_base(params, scope, params.gexp(sk)), sk)


@lru_cache(maxsize=4096)
def _ring_members_valid(params: GroupParams, ring: tuple[int, ...]) -> bool:
    return all(params.is_element(pk) for pk in ring)


def _chain_hasher(params: GroupParams, ctx: Transcript, digest: bytes, image: int, msg: bytes):
    return ctx.fork("lsag").absorb(params.label, digest, image, msg)._hash


def _step(params: GroupParams, base_hash, z1: int, z2: int) -> int:
    h = base_hash.copy()
    h.update(encode_int(z1))
    h.update(encode_int(z2))
    return int.from_bytes(h.digest(), "big") % params.q


def _check_ring(ring: Sequence[int]) -> None:
    if not ring:
        raise ValueError("ring must be non-empty")
    if list(ring) != canonical_ring(ring):
        raise ValueError("ring must be deduplicated and canonically ordered")


def lsag_sign(
    params: GroupParams,
    ring: Sequence[int],
    sk: int,
    signer_index: int,
    msg: bytes,
    ctx: Transcript,
    rng: Rng,
    *,
    scope: bytes | None = None,
) -> RingSignature:
    _check_ring(ring)
    n = len(ring)
    if not 0 <= signer_index < n or ring[signer_index] != params.gexp(sk):
        raise SignerNotInRing("secret key does not match ring[signer_index]")
    digest = ring_digest(ring)
    scope = digest if scope is None else scope
    bases = [linking_base(params, scope, pk) for pk in ring]
    image = params.exp(bases[signer_index], sk)
    base_hash = _chain_hasher(params, ctx, digest, image, msg)

    q = params.q
    u = params.random_scalar(rng)
    responses = [0] * n
    challenges = [0] * n
    i = (signer_index + 1) % n
    challenges[i] = _step(params, base_hash, params.gexp(u), params.exp(bases[signer_index], u))
    while i != signer_index:
        s = params.random_scalar(rng)
        responses[i] = s
        z1 = params.exp2(params.g, s, ring[i], challenges[i])
        z2 = params.exp2(bases[i], s, image, challenges[i])
        nxt = (i + 1) % n
        challenges[nxt] = _step(params, base_hash, z1, z2)
        i = nxt
    responses[signer_index] = (u - sk * challenges[signer_index]) % q
    return RingSignature(image, challenges[0], tuple(responses))


def lsag_verify(
    params: GroupParams,
    ring: Sequence[int],
    msg: bytes,
    sig: RingSignature,
    ctx: Transcript,
    *,
    scope: bytes | None = None,
) -> bool:
    n = len(ring)
    if n == 0 or len(sig.responses) != n or list(ring) != canonical_ring(ring):
        return False
    if not _ring_members_valid(params, tuple(ring)):
        return False
    if not params.is_element(sig.key_image) or sig.key_image == 1:
        return False
    if not params.is_scalar(sig.c0) or not all(params.is_scalar(s) for s in sig.responses):
        return False
    digest = ring_digest(ring)
    scope = digest if scope is None else scope
    base_hash = _chain_hasher(params, ctx, digest, sig.key_image, msg)
    c = sig.c0
    for pk, s in zip(ring, sig.responses):
        z1 = params.exp2(params.g, s, pk, c)
        z2 = params.exp2(linking_base(params, scope, pk), s, sig.key_image, c)
        c = _step(params, base_hash, z1, z2)
    return c == sig.c0
