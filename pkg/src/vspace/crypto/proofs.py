"""Sigma-protocol proofs made non-interactive with Fiat-Shamir.

All proofs take a caller-built :class:`Transcript` that binds the group and
election context; each proof forks it under its own label before absorbing
the statement and commitments.
"""

from __future__ import annotations

from dataclasses import dataclass

from .elgamal import Ciphertext
from .errors import DecodeError, InvalidWitness
from .group import GroupParams, Rng
from .transcript import Transcript


@dataclass(frozen=True)
class ChaumPedersenProof:
    """Proof that ``log_{g1} h1 == log_{g2} h2``."""

    challenge: int
    response: int

    def to_canonical(self) -> list:
        return [self.challenge, self.response]

    @classmethod
    def from_canonical(cls, value: list, params: GroupParams) -> "ChaumPedersenProof":
        if not isinstance(value, list) or len(value) != 2:
            raise DecodeError("chaum-pedersen proof: expected 2 fields")
        return cls(params.check_scalar(value[0], "cp.challenge"), params.check_scalar(value[1], "cp.response"))


@dataclass(frozen=True)
class BinaryProof:
    """Disjunctive proof that a ciphertext encrypts 0 or 1."""

    a0: int
    b0: int
    a1: int
    b1: int
    challenge0: int
    response0: int
    challenge1: int
    response1: int

    def to_canonical(self) -> list:
        return [self.a0, self.b0, self.a1, self.b1,
                self.challenge0, self.response0, self.challenge1, self.response1]

    @classmethod
    def from_canonical(cls, value: list, params: GroupParams) -> "BinaryProof":
        if not isinstance(value, list) or len(value) != 8:
            raise DecodeError("binary proof: expected 8 fields")
        elems = [params.check_element(v, "binary proof commitment") for v in value[:4]]
        scalars = [params.check_scalar(v, "binary proof scalar") for v in value[4:]]
        return cls(*elems, *scalars)


def _cp_challenge(params: GroupParams, ctx: Transcript, g1: int, h1: int, g2: int, h2: int,
                  a: int, b: int) -> int:
    return ctx.fork("chaum-pedersen").absorb(params.label, g1, h1, g2, h2, a, b).challenge(params.q)


def prove_dlog_equality(
    params: GroupParams, g1: int, h1: int, g2: int, h2: int, x: int, ctx: Transcript, rng: Rng
) -> ChaumPedersenProof:
    if params.exp(g1, x) != h1 or params.exp(g2, x) != h2:
        raise InvalidWitness("witness does not open both statements")
    w = params.random_scalar(rng)
    c = _cp_challenge(params, ctx, g1, h1, g2, h2, params.exp(g1, w), params.exp(g2, w))
    return ChaumPedersenProof(c, (w - c * x) % params.q)


def verify_dlog_equality(
    params: GroupParams, g1: int, h1: int, g2: int, h2: int, proof: ChaumPedersenProof, ctx: Transcript
) -> bool:
    if not all(params.is_element(v) for v in (g1, h1, g2, h2)):
        return False
    if not (params.is_scalar(proof.challenge) and params.is_scalar(proof.response)):
        return False
    a = params.exp2(g1, proof.response, h1, proof.challenge)
    b = params.exp2(g2, proof.response, h2, proof.challenge)
    return _cp_challenge(params, ctx, g1, h1, g2, h2, a, b) == proof.challenge


def _binary_challenge(params: GroupParams, ctx: Transcript, pk: int, ct: Ciphertext,
                      a0: int, b0: int, a1: int, b1: int) -> int:
    return ctx.fork("binary").absorb(params.label, pk, ct.a, ct.b, a0, b0, a1, b1).challenge(params.q)


def prove_binary(
    params: GroupParams, pk: int, m: int, r: int, ct: Ciphertext, ctx: Transcript, rng: Rng
) -> BinaryProof:
    if m not in (0, 1):
        raise InvalidWitness(f"plaintext {m} is not in {{0, 1}}")
    if ct.a != params.gexp(r) or ct.b != params.exp2(pk, r, params.g, m):
        raise InvalidWitness("ciphertext does not match the witness")
    q = params.q
    # branch j proves log_g(a) == log_pk(b / g^j)
    b_over = [ct.b, params.div(ct.b, params.g)]
    w = params.random_scalar(rng)
    sim_c = params.random_scalar(rng)
    sim_s = params.random_scalar(rng)
    other = 1 - m
    commits = [None, None]
    commits[m] = (params.gexp(w), params.exp(pk, w))
    commits[other] = (
        params.exp2(params.g, sim_s, ct.a, sim_c),
        params.exp2(pk, sim_s, b_over[other], sim_c),
    )
    (a0, b0), (a1, b1) = commits
    c = _binary_challenge(params, ctx, pk, ct, a0, b0, a1, b1)
    real_c = (c - sim_c) % q
    real_s = (w - real_c * r) % q
    if m == 0:
        return BinaryProof(a0, b0, a1, b1, real_c, real_s, sim_c, sim_s)
    return BinaryProof(a0, b0, a1, b1, sim_c, sim_s, real_c, real_s)


def verify_binary(
    params: GroupParams, pk: int, ct: Ciphertext, proof: BinaryProof, ctx: Transcript
) -> bool:
    if not (params.is_element(pk) and ct.is_valid(params)):
        return False
    if not all(params.is_element(v) for v in (proof.a0, proof.b0, proof.a1, proof.b1)):
        return False
    if not all(params.is_scalar(v) for v in (proof.challenge0, proof.response0,
                                               proof.challenge1, proof.response1)):
        return False
    c = _binary_challenge(params, ctx, pk, ct, proof.a0, proof.b0, proof.a1, proof.b1)
    if (proof.challenge0 + proof.challenge1) % params.q != c:
        return False
    b1 = params.div(ct.b, params.g)
    return (
        params.exp2(params.g, proof.response0, ct.a, proof.challenge0) == proof.a0
        and params.exp2(pk, proof.response0, ct.b, proof.challenge0) == proof.b0
        and params.exp2(params.g, proof.response1, ct.a, proof.challenge1) == proof.a1
        and params.exp2(pk, proof.response1, b1, proof.challenge1) == proof.b1
    )


def prove_sum_one(
    params: GroupParams, pk: int, randomness_sum: int, aggregated: Ciphertext, ctx: Transcript, rng: Rng
) -> ChaumPedersenProof:
    """Prove ``aggregated`` encrypts exactly 1 (i.e. ``(a, b/g)`` encrypts 0)."""
    b_over = params.div(aggregated.b, params.g)
    if params.gexp(randomness_sum) != aggregated.a or params.exp(pk, randomness_sum) != b_over:
        raise InvalidWitness("aggregate does not encrypt 1 under the given randomness")
    return prove_dlog_equality(params, params.g, aggregated.a, pk, b_over, randomness_sum,
                               ctx.fork("sum-one"), rng)


def verify_sum_one(
    params: GroupParams, pk: int, aggregated: Ciphertext, proof: ChaumPedersenProof, ctx: Transcript
) -> bool:
    if not aggregated.is_valid(params):
        return False
    b_over = params.div(aggregated.b, params.g)
    return verify_dlog_equality(params, params.g, aggregated.a, pk, b_over, proof, ctx.fork("sum-one"))
