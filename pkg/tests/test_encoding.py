import pytest
from hypothesis import given
from hypothesis import strategies as st

from vspace.crypto import TEST256, TOY, DecodeError, Transcript, decode, encode
from vspace.crypto.encoding import encode_int

values = st.recursive(
    st.none() | st.integers(min_value=0, max_value=1 << 600) | st.binary(max_size=40) | st.text(max_size=20),
    lambda children: st.lists(children, max_size=5),
    max_leaves=30,
)


@given(values)
def test_roundtrip(value):
    assert decode(encode(value)) == value


def test_known_bytes():
    assert encode(0) == b"\x01\x00\x00\x00\x00"
    assert encode(258) == b"\x01\x00\x00\x00\x02\x01\x02"
    assert encode("ab") == b"\x03\x00\x00\x00\x02ab"
    assert encode([1, b"\xff"]) == b"\x04\x00\x00\x00\x02" + b"\x01\x00\x00\x00\x01\x01" + b"\x02\x00\x00\x00\x01\xff"
    assert encode(None) == b"\x00\x00\x00\x00\x00"


@pytest.mark.parametrize(
    "raw",
    [
        b"\x01\x00\x00\x00\x02\x00\x05",  # non-minimal int
        b"\x01\x00\x00\x00\x05\x01",  # truncated
        b"\x09\x00\x00\x00\x00",  # unknown tag
        b"\x01\x00\x00\x00\x00\x00",  # trailing
    ],
)
def test_rejects_malformed(raw):
    with pytest.raises(DecodeError):
        decode(raw)


@given(st.integers(min_value=0, max_value=1 << 300), st.integers(min_value=0, max_value=1 << 300))
def test_encoded_order_matches_numeric(a, b):
    assert (encode_int(a) < encode_int(b)) == (a < b)


def test_element_decoding_rejects_non_members():
    # 5 is a non-residue mod 23, so it lies outside the order-11 subgroup
    assert TOY.is_element(4) and not TOY.is_element(5)
    with pytest.raises(DecodeError):
        TOY.check_element(decode(encode(5)))
    assert TOY.check_element(decode(encode(4))) == 4
    assert not TEST256.is_element(TEST256.p - 1)  # -1 has order 2


def test_transcript_domain_separation():
    a = Transcript("vspace/a", 1, b"x").challenge(TEST256.q)
    b = Transcript("vspace/b", 1, b"x").challenge(TEST256.q)
    assert a != b
    assert Transcript("vspace/a", 1, b"x").challenge(TEST256.q) == a


def test_transcript_fork_is_independent():
    base = Transcript("d", 7)
    before = base.digest()
    fork = base.fork("child")
    assert base.digest() == before
    assert fork.digest() != before
    assert fork.absorbed.startswith(base.absorbed)
