"""Independent oracles used to compute expected values in tests.

Nothing here calls into the code paths it checks: decryption uses the full
secret key, discrete logs are found by linear scan, tallies by counting.
"""

from __future__ import annotations

from collections import Counter


def decrypt_with_secret(p: int, sk: int, a: int, b: int) -> int:
    """Return ``g^m`` for ElGamal ``(a, b)`` under the full secret key."""
    return b * pow(pow(a, sk, p), -1, p) % p


def linear_dlog(p: int, g: int, elem: int, max_value: int) -> int | None:
    x = 1
    for m in range(max_value + 1):
        if x == elem:
            return m
        x = x * g % p
    return None


def brute_force_tally(intents: list[int | None], spoiled: list[bool], k: int) -> list[int]:
    counts = Counter(i for i, s in zip(intents, spoiled) if i is not None and not s)
    return [counts.get(c, 0) for c in range(k)]


def poly_eval(coeffs: list[int], x: int, q: int) -> int:
    return sum(c * x**i for i, c in enumerate(coeffs)) % q
