"""Prime-order subgroups of Z_p^* and the hash functions defined over them."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Any, Protocol

from ..kernels import ModContext
from .encoding import encode
from .errors import DecodeError


class Rng(Protocol):
    """Anything with ``randrange``: ``random.Random`` or ``secrets.SystemRandom``."""

    def randrange(self, start: int, stop: int | None = None) -> int: ...


def derive_rng(seed: int, *labels: Any) -> random.Random:
    """Deterministic per-actor PRNG derived from a scenario seed."""
    digest = hashlib.sha256(encode(["vspace/rng", seed, *[str(x) for x in labels]])).digest()
    return random.Random(int.from_bytes(digest, "big"))


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def hash_items(domain: str, *items: Any) -> bytes:
    return sha256(encode([domain, *items]))


def _probable_prime(n: int, rounds: int = 32) -> bool:
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % small == 0:
            return n == small
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    rng = random.Random(n)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class GroupParams:
    """Order-``q`` subgroup of ``Z_p^*`` generated by ``g``.

    Elements and scalars are plain ints; this object carries the arithmetic
    and membership checks.
    """

    p: int
    q: int
    g: int
    label: str
    _ctx: ModContext = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_ctx", ModContext(self.p))

    def validate(self) -> None:
        if (self.p - 1) % self.q:
            raise ValueError("q does not divide p-1")
        if not (_probable_prime(self.p) and _probable_prime(self.q)):
            raise ValueError("p and q must be prime")
        if self.g in (0, 1) or not 1 < self.g < self.p or pow(self.g, self.q, self.p) != 1:
            raise ValueError("g does not generate the order-q subgroup")

    @property
    def cofactor(self) -> int:
        return (self.p - 1) // self.q

    @property
    def element_size(self) -> int:
        return (self.p.bit_length() + 7) // 8

    # membership

    def is_element(self, x: Any) -> bool:
        return (
            isinstance(x, int)
            and not isinstance(x, bool)
            and 0 < x < self.p
            and self._ctx.pow(x, self.q) == 1
        )

    def is_scalar(self, x: Any) -> bool:
        return isinstance(x, int) and not isinstance(x, bool) and 0 <= x < self.q

    def check_element(self, x: Any, what: str = "element") -> int:
        if not self.is_element(x):
            raise DecodeError(f"{what} is not a subgroup element")
        return x

    def check_scalar(self, x: Any, what: str = "scalar") -> int:
        if not self.is_scalar(x):
            raise DecodeError(f"{what} is not a scalar mod q")
        return x

    # arithmetic

    def exp(self, base: int, e: int) -> int:
        return self._ctx.pow(base, e % self.q)

    def gexp(self, e: int) -> int:
        return self._ctx.pow(self.g, e % self.q)

    def exp2(self, b1: int, e1: int, b2: int, e2: int) -> int:
        """``b1^e1 * b2^e2 mod p`` for subgroup elements."""
        return self._ctx.pow2(b1, e1 % self.q, b2, e2 % self.q)

    def mul(self, *xs: int) -> int:
        acc = 1
        for x in xs:
            acc = acc * x % self.p
        return acc

    def inv(self, x: int) -> int:
        return pow(x, -1, self.p)

    def div(self, a: int, b: int) -> int:
        return a * pow(b, -1, self.p) % self.p

    def random_scalar(self, rng: Rng) -> int:
        return rng.randrange(self.q)

    def random_nonzero_scalar(self, rng: Rng) -> int:
        while True:
            x = rng.randrange(self.q)
            if x:
                return x

    # hashing

    def hash_to_scalar(self, domain: str, *items: Any) -> int:
        return int.from_bytes(hash_items(domain, self.label, *items), "big") % self.q

    def hash_to_group(self, data: bytes) -> int:
        """Deterministic subgroup element with unknown discrete log.

        Expands ``data`` to ``element_size + 16`` bytes, reduces mod p and
        raises to the cofactor, retrying with a counter on 0 or 1.
        """
        width = self.element_size + 16
        blocks = (width + 31) // 32
        counter = 0
        while True:
            stream = b"".join(
                hash_items("vspace/hash-to-group", self.label, counter, i, data)
                for i in range(blocks)
            )
            t = int.from_bytes(stream[:width], "big") % self.p
            if t:
                h = pow(t, self.cofactor, self.p)
                if h != 1:
                    return h
            counter += 1

    def to_canonical(self) -> list:
        return [self.label, self.p, self.q, self.g]


_TEST256_P = 0x876595E384CFBD71802A51E3ADE377C041D586CB99558285FF1CBC8C32712063

_MODP2048_P = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1"
    "29024E088A67CC74020BBEA63B139B22514A08798E3404DD"
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245"
    "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D"
    "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F"
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D"
    "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9"
    "DE2BCBF6955817183995497CEA956AE515D2261898FA0510"
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)

# p = 23, q = 11, g = 2: small enough to check by hand.
TOY = GroupParams(p=23, q=11, g=2, label="toy23")
# Safe prime found by searching upward from SHA-256("vspace/test-group-256").
TEST256 = GroupParams(p=_TEST256_P, q=(_TEST256_P - 1) // 2, g=4, label="test256")
# RFC 3526 group 14.
MODP2048 = GroupParams(p=_MODP2048_P, q=(_MODP2048_P - 1) // 2, g=2, label="modp2048")

GROUPS = {grp.label: grp for grp in (TOY, TEST256, MODP2048)}


def get_group(label: str) -> GroupParams:
    try:
        return GROUPS[label]
    except KeyError:
        raise ValueError(f"unknown group {label!r}; known: {sorted(GROUPS)}") from None
