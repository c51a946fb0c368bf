"""Small-range discrete logarithms for decoding exponential-ElGamal tallies."""

from __future__ import annotations

from functools import lru_cache
from math import isqrt

from .errors import NotInRange
from .group import GroupParams


@lru_cache(maxsize=32)
def _baby_steps(params: GroupParams, m: int) -> dict[int, int]:
    table = {}
    x = 1
    for j in range(m):
        table.setdefault(x, j)
        x = x * params.g % params.p
    return table


def decode_dlog(params: GroupParams, elem: int, max_value: int) -> int:
    """Return ``m`` in ``[0, max_value]`` with ``g^m == elem`` (baby-step giant-step)."""
    if max_value < 0:
        raise NotInRange("negative bound")
    m = isqrt(max_value) + 1
    table = _baby_steps(params, m)
    giant = pow(params.gexp(m), -1, params.p)
    y = elem % params.p
    for i in range(max_value // m + 1):
        j = table.get(y)
        if j is not None:
            value = i * m + j
            if value <= max_value:
                return value
            break
        y = y * giant % params.p
    raise NotInRange(f"element is not g^m for any m <= {max_value}")
