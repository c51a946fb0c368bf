"""Feldman-VSS distributed key generation and threshold decryption.

Every trustee deals a random degree ``t-1`` polynomial; the election key is
the product of the constant-term commitments and trustee ``j`` holds the
sum of the shares it received. Shares travel encrypted under a pad derived
from the Diffie-Hellman secret between dealer and recipient identity keys,
so they can be relayed by an untrusted channel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .elgamal import Ciphertext
from .errors import (
    DecodeError,
    DuplicateTrusteeIndex,
    InsufficientDealings,
    InsufficientShares,
    ShareVerificationFailed,
)
from .group import GroupParams, Rng
from .proofs import ChaumPedersenProof, prove_dlog_equality, verify_dlog_equality
from .schnorr import KeyPair
from .transcript import Transcript


@dataclass(frozen=True)
class VSSDealing:
    dealer_index: int
    commitments: tuple[int, ...]
    encrypted_shares: Mapping[int, int]

    @property
    def threshold(self) -> int:
        return len(self.commitments)

    def public_part(self) -> list:
        """Ledger payload: commitments only, shares stay off the board."""
        return [self.dealer_index, list(self.commitments)]


@dataclass(frozen=True)
class DecryptionShare:
    trustee_index: int
    share_value: int
    proof: ChaumPedersenProof

    def to_canonical(self) -> list:
        return [self.trustee_index, self.share_value, self.proof.to_canonical()]

    @classmethod
    def from_canonical(cls, value: list, params: GroupParams) -> "DecryptionShare":
        if not isinstance(value, list) or len(value) != 3 or not isinstance(value[0], int):
            raise DecodeError("decryption share: expected 3 fields")
        return cls(value[0], params.check_element(value[1], "share value"),
                   ChaumPedersenProof.from_canonical(value[2], params))


def _share_pad(params: GroupParams, shared_secret: int, dealer: int, trustee: int) -> int:
    return params.hash_to_scalar("vspace/dkg-share-pad", shared_secret, dealer, trustee)


def eval_poly(coefficients: Sequence[int], x: int, q: int) -> int:
    acc = 0
    for coeff in reversed(coefficients):
        acc = (acc * x + coeff) % q
    return acc


def dkg_deal(
    params: GroupParams,
    dealer_index: int,
    threshold: int,
    trustee_pks: Mapping[int, int],
    dealer_kp: KeyPair,
    rng: Rng,
    *,
    coefficients: Sequence[int] | None = None,
) -> VSSDealing:
    n = len(trustee_pks)
    if not 1 <= threshold <= n:
        raise ValueError(f"threshold {threshold} outside [1, {n}]")
    if coefficients is None:
        coefficients = [params.random_scalar(rng) for _ in range(threshold)]
    elif len(coefficients) != threshold:
        raise ValueError("need exactly `threshold` coefficients")
    commitments = tuple(params.gexp(a) for a in coefficients)
    shares = {}
    for j, pk_j in sorted(trustee_pks.items()):
        pad = _share_pad(params, params.exp(pk_j, dealer_kp.sk), dealer_index, j)
        shares[j] = (eval_poly(coefficients, j, params.q) + pad) % params.q
    return VSSDealing(dealer_index, commitments, shares)


def open_share(
    params: GroupParams, dealing: VSSDealing, trustee_index: int, trustee_kp: KeyPair, dealer_pk: int
) -> int:
    pad = _share_pad(params, params.exp(dealer_pk, trustee_kp.sk), dealing.dealer_index, trustee_index)
    return (dealing.encrypted_shares[trustee_index] - pad) % params.q


def commitment_eval(params: GroupParams, commitments: Sequence[int], j: int) -> int:
    """``prod_k C_k^(j^k)``, i.e. ``g^f(j)`` computed from the commitments."""
    acc = 1
    power = 1
    for c in commitments:
        acc = acc * params.exp(c, power) % params.p
        power = power * j % params.q
    return acc


def dkg_verify_share(params: GroupParams, dealing: VSSDealing, trustee_index: int, share: int) -> bool:
    if not params.is_scalar(share):
        return False
    return params.gexp(share) == commitment_eval(params, dealing.commitments, trustee_index)


def election_key(params: GroupParams, commitment_sets: Sequence[Sequence[int]]) -> int:
    return params.mul(*(cs[0] for cs in commitment_sets))


def verification_key(params: GroupParams, commitment_sets: Sequence[Sequence[int]], j: int) -> int:
    """Public ``vk_j = g^{share_j}`` derived from all dealers' commitments."""
    return params.mul(*(commitment_eval(params, cs, j) for cs in commitment_sets))


def dkg_aggregate(
    params: GroupParams,
    dealings: Sequence[VSSDealing],
    received: Mapping[tuple[int, int], int],
) -> tuple[int, dict[int, int], dict[int, int]]:
    """Combine verified dealings.

    ``received[(dealer, trustee)]`` is the decrypted share. Returns the
    election public key, each trustee's secret share and verification keys.
    """
    if not dealings:
        raise InsufficientDealings("no dealings")
    trustees = sorted(dealings[0].encrypted_shares)
    dealers = sorted(d.dealer_index for d in dealings)
    if dealers != trustees:
        raise InsufficientDealings(f"dealings from {dealers}, expected one per trustee {trustees}")
    secret_shares = {j: 0 for j in trustees}
    for dealing in dealings:
        for j in trustees:
            share = received.get((dealing.dealer_index, j))
            if share is None or not dkg_verify_share(params, dealing, j, share):
                raise ShareVerificationFailed(dealing.dealer_index, j)
            secret_shares[j] = (secret_shares[j] + share) % params.q
    commitment_sets = [d.commitments for d in dealings]
    pk = election_key(params, commitment_sets)
    vks = {j: params.gexp(s) for j, s in secret_shares.items()}
    return pk, secret_shares, vks


def partial_decrypt(
    params: GroupParams,
    trustee_index: int,
    share: int,
    vk: int,
    ct: Ciphertext,
    ctx: Transcript,
    rng: Rng,
) -> DecryptionShare:
    d = params.exp(ct.a, share)
    proof = prove_dlog_equality(params, params.g, vk, ct.a, d, share,
                                ctx.fork("decryption-share").absorb(trustee_index, ct), rng)
    return DecryptionShare(trustee_index, d, proof)


def verify_share_proof(
    params: GroupParams, ct: Ciphertext, ds: DecryptionShare, vk: int, ctx: Transcript
) -> bool:
    if not ct.is_valid(params):
        return False
    return verify_dlog_equality(params, params.g, vk, ct.a, ds.share_value, ds.proof,
                                ctx.fork("decryption-share").absorb(ds.trustee_index, ct))


def lagrange_coefficient(index: int, indices: Sequence[int], q: int) -> int:
    """Lagrange basis polynomial for ``index`` evaluated at zero, mod q."""
    num, den = 1, 1
    for m in indices:
        if m != index:
            num = num * m % q
            den = den * (m - index) % q
    return num * pow(den, -1, q) % q


def interpolate_at_zero(points: Mapping[int, int], q: int) -> int:
    xs = list(points)
    return sum(lagrange_coefficient(x, xs, q) * y for x, y in points.items()) % q


def combine_shares(
    params: GroupParams, ct: Ciphertext, shares: Sequence[DecryptionShare], threshold: int
) -> int:
    """Return ``g^m`` from at least ``threshold`` verified shares."""
    indices = []
    for ds in shares:
        if ds.trustee_index in indices:
            raise DuplicateTrusteeIndex(ds.trustee_index)
        indices.append(ds.trustee_index)
    if len(indices) < threshold:
        raise InsufficientShares(len(indices), threshold)
    acc = 1
    for ds in shares:
        lam = lagrange_coefficient(ds.trustee_index, indices, params.q)
        acc = acc * params.exp(ds.share_value, lam) % params.p
    return params.div(ct.b, acc)
