import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import decrypt_with_secret, linear_dlog, poly_eval
from vspace.crypto import (
    IDENTITY,
    MODP2048,
    TEST256,
    TOY,
    Ciphertext,
    InsufficientShares,
    MessageTooLarge,
    NotInRange,
    SchnorrSignature,
    ct_combine,
    ct_sum,
    decode_dlog,
    encrypt,
    interpolate_at_zero,
    keygen,
    keypair_from_secret,
    lagrange_coefficient,
    schnorr_sign,
    schnorr_verify,
)


class _Scripted:
    """RNG stub returning scripted values."""

    def __init__(self, values):
        self._values = iter(values)

    def randrange(self, start, stop=None):
        return next(self._values)


@pytest.mark.parametrize("params", [TOY, TEST256, MODP2048], ids=lambda g: g.label)
def test_group_parameters_valid(params):
    params.validate()
    assert params.q * params.cofactor == params.p - 1


def test_keygen_toy_hand_value():
    assert keypair_from_secret(TOY, 3).pk == 8


def test_keygen_resamples_zero():
    kp = keygen(TOY, _Scripted([0, 3]))
    assert kp.sk == 3 and kp.pk == 8


def test_keygen_deterministic_under_seed():
    a = keygen(TEST256, random.Random(9))
    b = keygen(TEST256, random.Random(9))
    assert a == b and 1 <= a.sk < TEST256.q


def test_zero_secret_rejected():
    with pytest.raises(ValueError):
        keypair_from_secret(TOY, 0)


class TestSchnorr:
    def test_roundtrip(self, group, rng):
        kp = keygen(group, rng)
        sig = schnorr_sign(group, kp, b"manifest", "vspace/test")
        assert schnorr_verify(group, kp.pk, b"manifest", "vspace/test", sig)

    def test_wrong_domain(self, group, rng):
        kp = keygen(group, rng)
        sig = schnorr_sign(group, kp, b"manifest", "vspace/test")
        assert not schnorr_verify(group, kp.pk, b"manifest", "vspace/other", sig)

    def test_wrong_key(self, group, rng):
        kp, other = keygen(group, rng), keygen(group, rng)
        sig = schnorr_sign(group, kp, b"manifest", "d")
        assert not schnorr_verify(group, other.pk, b"manifest", "d", sig)

    def test_bit_flips_rejected(self, group, rng):
        kp = keygen(group, rng)
        msg = b"manifest bytes"
        sig = schnorr_sign(group, kp, msg, "d")
        for i in range(len(msg) * 8):
            flipped = bytearray(msg)
            flipped[i // 8] ^= 1 << (i % 8)
            assert not schnorr_verify(group, kp.pk, bytes(flipped), "d", sig)

    def test_out_of_range_fields_rejected(self, group, rng):
        kp = keygen(group, rng)
        sig = schnorr_sign(group, kp, b"m", "d")
        bad = SchnorrSignature(sig.challenge, sig.response + group.q)
        assert not schnorr_verify(group, kp.pk, b"m", "d", bad)
        assert not schnorr_verify(group, group.p - 1, b"m", "d", sig)


class TestElGamal:
    def test_identity_case(self):
        assert encrypt(TOY, 8, 0, 0) == Ciphertext(1, 1)

    def test_toy_hand_value(self):
        assert encrypt(TOY, 8, 1, 2) == Ciphertext(4, 13)

    def test_message_too_large(self, group):
        with pytest.raises(MessageTooLarge):
            encrypt(group, group.g, 11, 5, max_message=10)
        with pytest.raises(MessageTooLarge):
            encrypt(group, group.g, -1, 5)

    @settings(max_examples=60, deadline=None)
    @given(m=st.integers(0, 1000), r=st.integers(0, TEST256.q - 1), sk=st.integers(1, TEST256.q - 1))
    def test_decrypt_oracle_roundtrip(self, m, r, sk):
        pk = TEST256.gexp(sk)
        ct = encrypt(TEST256, pk, m, r)
        assert decrypt_with_secret(TEST256.p, sk, ct.a, ct.b) == pow(TEST256.g, m, TEST256.p)

    @settings(max_examples=60, deadline=None)
    @given(
        m1=st.integers(0, 500), m2=st.integers(0, 500),
        r1=st.integers(0, TEST256.q - 1), r2=st.integers(0, TEST256.q - 1),
    )
    def test_homomorphism(self, m1, m2, r1, r2):
        sk = 0x1234567
        pk = TEST256.gexp(sk)
        ct = ct_combine(TEST256, encrypt(TEST256, pk, m1, r1), encrypt(TEST256, pk, m2, r2))
        assert decrypt_with_secret(TEST256.p, sk, ct.a, ct.b) == pow(TEST256.g, m1 + m2, TEST256.p)

    def test_combine_identity(self, group, rng):
        ct = encrypt(group, group.gexp(77), 1, group.random_scalar(rng))
        assert ct_combine(group, encrypt(group, group.gexp(77), 0, 0), ct) == ct
        assert ct_combine(group, IDENTITY, ct) == ct

    def test_fold_matches_plaintext_sum(self, group, rng):
        sk = 987654321
        pk = group.gexp(sk)
        msgs = [rng.randrange(2) for _ in range(40)]
        folded = ct_sum(group, [encrypt(group, pk, m, group.random_scalar(rng)) for m in msgs])
        plain = decrypt_with_secret(group.p, sk, folded.a, folded.b)
        assert linear_dlog(group.p, group.g, plain, len(msgs)) == sum(msgs)


class TestLagrange:
    def test_toy_hand_values(self):
        assert lagrange_coefficient(1, [1, 2], 11) == 2
        assert lagrange_coefficient(2, [1, 2], 11) == 10
        assert interpolate_at_zero({1: 8, 2: 0}, 11) == 5

    def test_every_subset_recovers_secret(self, rng):
        q = TEST256.q
        coeffs = [rng.randrange(q) for _ in range(3)]
        points = {j: poly_eval(coeffs, j, q) for j in range(1, 6)}
        for subset in itertools.combinations(points, 3):
            assert interpolate_at_zero({j: points[j] for j in subset}, q) == coeffs[0]


class TestDlog:
    def test_toy_values(self):
        assert decode_dlog(TOY, 1, 3) == 0
        assert decode_dlog(TOY, 4, 3) == 2

    def test_toy_not_in_range(self):
        # exhaustive scan: 2^0..2^3 = 1, 2, 4, 8
        assert linear_dlog(23, 2, 5, 3) is None
        with pytest.raises(NotInRange):
            decode_dlog(TOY, 5, 3)

    @pytest.mark.parametrize("bound", [0, 1, 2, 15, 16, 17, 1000])
    def test_matches_linear_scan(self, group, bound):
        for m in sorted({0, bound // 2, bound}):
            assert decode_dlog(group, group.gexp(m), bound) == m
        with pytest.raises(NotInRange):
            decode_dlog(group, group.gexp(bound + 1), bound)


def test_insufficient_shares_carries_counts():
    err = InsufficientShares(2, 3)
    assert (err.got, err.need) == (2, 3)
