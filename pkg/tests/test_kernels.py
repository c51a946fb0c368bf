import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vspace import _pymodexp, kernels
from vspace.crypto import MODP2048, TEST256

MODULI = [23, 0xFFFFFFFFFFFFFFC5, (1 << 127) - 1, TEST256.p, MODP2048.p]


def test_compiled_backend_selected():
    # the build in this repo ships the extension; fallback is exercised below
    assert kernels.compiled_available()
    assert kernels.BACKEND == "compiled"


@pytest.mark.parametrize("modulus", MODULI)
def test_backends_agree(modulus):
    rng = random.Random(modulus)
    fast, slow = kernels.ModContext(modulus), _pymodexp.ModContext(modulus)
    for _ in range(50):
        b1, b2 = rng.randrange(modulus), rng.randrange(modulus)
        e1, e2 = rng.getrandbits(rng.randint(0, 2100)), rng.getrandbits(rng.randint(0, 300))
        assert fast.pow(b1, e1) == slow.pow(b1, e1) == pow(b1, e1, modulus)
        assert fast.pow2(b1, e1, b2, e2) == slow.pow2(b1, e1, b2, e2)


@settings(max_examples=300, deadline=None)
@given(
    base=st.integers(min_value=0, max_value=TEST256.p * 3),
    e1=st.integers(min_value=0, max_value=(1 << 300)),
    e2=st.integers(min_value=0, max_value=(1 << 300)),
)
def test_pow2_matches_builtin(base, e1, e2):
    ctx = kernels.ModContext(TEST256.p)
    p = TEST256.p
    assert ctx.pow2(base, e1, base + 7, e2) == pow(base, e1, p) * pow(base + 7, e2, p) % p


def test_edge_exponents():
    ctx = kernels.ModContext(TEST256.p)
    assert ctx.pow(5, 0) == 1
    assert ctx.pow(0, 5) == 0
    assert ctx.pow2(3, 0, 7, 0) == 1
    assert ctx.pow(TEST256.p + 2, 1) == 2


@pytest.mark.parametrize("impl", [kernels.ModContext, _pymodexp.ModContext])
def test_rejects_bad_input(impl):
    with pytest.raises(ValueError):
        impl(10)
    with pytest.raises(ValueError):
        impl(23).pow(2, -1)
