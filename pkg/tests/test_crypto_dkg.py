import itertools
import random

import pytest

from oracles import decrypt_with_secret
from vspace.crypto import (
    TEST256,
    TOY,
    DuplicateTrusteeIndex,
    InsufficientDealings,
    InsufficientShares,
    ShareVerificationFailed,
    Transcript,
    VSSDealing,
    combine_shares,
    decode_dlog,
    dkg_aggregate,
    dkg_deal,
    dkg_verify_share,
    encrypt,
    keygen,
    open_share,
    partial_decrypt,
    verification_key,
    verify_share_proof,
)
from vspace.crypto.dkg import DecryptionShare

CTX = Transcript("vspace/test-dkg")


def _ceremony(params, n, t, rng, coefficients=None):
    kps = {j: keygen(params, rng) for j in range(1, n + 1)}
    pks = {j: kp.pk for j, kp in kps.items()}
    dealings = [
        dkg_deal(params, i, t, pks, kps[i], rng,
                 coefficients=None if coefficients is None else coefficients[i - 1])
        for i in range(1, n + 1)
    ]
    received = {
        (d.dealer_index, j): open_share(params, d, j, kps[j], kps[d.dealer_index].pk)
        for d in dealings for j in kps
    }
    return kps, dealings, received


def test_single_dealer(group, rng):
    kps, dealings, received = _ceremony(group, 1, 1, rng)
    pk, shares, vks = dkg_aggregate(group, dealings, received)
    assert pk == dealings[0].commitments[0]
    assert vks[1] == group.gexp(shares[1])


def test_toy_two_dealers_hand_value(rng):
    _, dealings, received = _ceremony(TOY, 2, 1, rng, coefficients=[[5], [3]])
    pk, _, _ = dkg_aggregate(TOY, dealings, received)
    assert pk == 3  # 2^8 mod 23


def test_shares_verify_against_commitments(group, rng):
    kps, dealings, received = _ceremony(group, 5, 3, rng)
    for (i, j), s in received.items():
        assert dkg_verify_share(group, dealings[i - 1], j, s)


def test_tampered_share_identified(group, rng):
    _, dealings, received = _ceremony(group, 3, 2, rng)
    received[(1, 2)] = (received[(1, 2)] + 1) % group.q
    with pytest.raises(ShareVerificationFailed) as exc:
        dkg_aggregate(group, dealings, received)
    assert (exc.value.dealer, exc.value.trustee) == (1, 2)


def test_missing_dealing(group, rng):
    _, dealings, received = _ceremony(group, 3, 2, rng)
    with pytest.raises(InsufficientDealings):
        dkg_aggregate(group, dealings[:2], received)
    with pytest.raises(InsufficientDealings):
        dkg_aggregate(group, [], received)


def test_public_verification_keys_match(group, rng):
    _, dealings, received = _ceremony(group, 4, 3, rng)
    _, shares, vks = dkg_aggregate(group, dealings, received)
    for j in shares:
        assert verification_key(group, [d.commitments for d in dealings], j) == vks[j]


def test_election_secret_is_sum_of_constant_terms(group, rng):
    coeffs = [[rng.randrange(group.q) for _ in range(3)] for _ in range(5)]
    _, dealings, received = _ceremony(group, 5, 3, rng, coefficients=coeffs)
    pk, _, _ = dkg_aggregate(group, dealings, received)
    secret = sum(c[0] for c in coeffs) % group.q
    assert pk == group.gexp(secret)


@pytest.fixture(scope="module")
def threshold_setup():
    rng = random.Random(11)
    kps, dealings, received = _ceremony(TEST256, 5, 3, rng)
    pk, shares, vks = dkg_aggregate(TEST256, dealings, received)
    ct = encrypt(TEST256, pk, 42, TEST256.random_scalar(rng))
    dshares = {j: partial_decrypt(TEST256, j, shares[j], vks[j], ct, CTX, rng) for j in shares}
    return pk, shares, vks, ct, dshares


def test_share_proofs(threshold_setup, rng):
    pk, shares, vks, ct, dshares = threshold_setup
    for j, ds in dshares.items():
        assert verify_share_proof(TEST256, ct, ds, vks[j], CTX)
    ds = dshares[1]
    bumped = DecryptionShare(1, TEST256.exp(ct.a, shares[1] + 1), ds.proof)
    assert not verify_share_proof(TEST256, ct, bumped, vks[1], CTX)
    other = encrypt(TEST256, pk, 1, 7)
    assert not verify_share_proof(TEST256, other, ds, vks[1], CTX)
    assert not verify_share_proof(TEST256, ct, ds, vks[2], CTX)


def test_every_threshold_subset_decrypts(threshold_setup):
    pk, shares, vks, ct, dshares = threshold_setup
    results = set()
    for subset in itertools.combinations(sorted(dshares), 3):
        results.add(combine_shares(TEST256, ct, [dshares[j] for j in subset], 3))
    assert results == {TEST256.gexp(42)}
    assert decode_dlog(TEST256, results.pop(), 100) == 42
    for subset in itertools.combinations(sorted(dshares), 2):
        with pytest.raises(InsufficientShares):
            combine_shares(TEST256, ct, [dshares[j] for j in subset], 3)


def test_combine_matches_full_key_oracle(threshold_setup):
    pk, shares, vks, ct, dshares = threshold_setup
    from vspace.crypto import interpolate_at_zero

    full_sk = interpolate_at_zero({j: shares[j] for j in (1, 2, 3)}, TEST256.q)
    assert TEST256.gexp(full_sk) == pk
    assert decrypt_with_secret(TEST256.p, full_sk, ct.a, ct.b) == combine_shares(
        TEST256, ct, list(dshares.values()), 3
    )


def test_duplicate_share_index(threshold_setup):
    _, _, _, ct, dshares = threshold_setup
    with pytest.raises(DuplicateTrusteeIndex):
        combine_shares(TEST256, ct, [dshares[1], dshares[1], dshares[2]], 3)


def test_dealing_rejects_bad_threshold(group, rng):
    kp = keygen(group, rng)
    with pytest.raises(ValueError):
        dkg_deal(group, 1, 3, {1: kp.pk, 2: kp.pk}, kp, rng)
    assert isinstance(dkg_deal(group, 1, 1, {1: kp.pk}, kp, rng), VSSDealing)
