"""Pure-Python fallback for the modular exponentiation kernel."""

from __future__ import annotations

BACKEND = "python"


class ModContext:
    """Exponentiation modulo a fixed odd modulus."""

    __slots__ = ("modulus",)

    def __init__(self, modulus: int) -> None:
        modulus = int(modulus)
        if modulus < 3 or modulus % 2 == 0:
            raise ValueError("modulus must be odd and > 2")
        self.modulus = modulus

    def pow(self, base: int, exponent: int) -> int:
        if exponent < 0:
            raise ValueError("negative exponent")
        return pow(base, exponent, self.modulus)

    def pow2(self, b1: int, e1: int, b2: int, e2: int) -> int:
        """Return ``b1**e1 * b2**e2 mod m``."""
        if e1 < 0 or e2 < 0:
            raise ValueError("negative exponent")
        m = self.modulus
        return pow(b1, e1, m) * pow(b2, e2, m) % m
