# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled modular exponentiation kernel (Montgomery, 64-bit limbs)."""

from libc.stdint cimport uint64_t
from libc.string cimport memcpy, memset

cdef extern from "_montgomery.h":
    enum: MONT_MAX_LIMBS
    ctypedef struct mont_ctx:
        int n
        uint64_t mod[MONT_MAX_LIMBS]
        uint64_t r2[MONT_MAX_LIMBS]
        uint64_t one[MONT_MAX_LIMBS]
        uint64_t minv
    void mont_pow(const mont_ctx *c, uint64_t *r, const uint64_t *base,
                  const uint64_t *e, int en) nogil
    void mont_pow2(const mont_ctx *c, uint64_t *r, const uint64_t *b1, const uint64_t *e1,
                   const uint64_t *b2, const uint64_t *e2, int en) nogil

BACKEND = "compiled"

cdef inline void _load(uint64_t *dst, object value, int n) except *:
    cdef bytes raw = (<object>value).to_bytes(8 * n, "little")
    memcpy(dst, <const char *>raw, 8 * n)

cdef inline object _store(const uint64_t *src, int n):
    return int.from_bytes((<const char *>src)[:8 * n], "little")


cdef class ModContext:
    """Exponentiation modulo a fixed odd modulus."""

    cdef mont_ctx ctx
    cdef readonly object modulus
    cdef int limbs

    def __cinit__(self, modulus):
        modulus = int(modulus)
        if modulus < 3 or modulus % 2 == 0:
            raise ValueError("modulus must be odd and > 2")
        n = (modulus.bit_length() + 63) // 64
        if n > MONT_MAX_LIMBS:
            raise ValueError("modulus too large for kernel")
        self.modulus = modulus
        self.limbs = n
        self.ctx.n = n
        R = 1 << (64 * n)
        _load(self.ctx.mod, modulus, n)
        _load(self.ctx.r2, (R * R) % modulus, n)
        _load(self.ctx.one, R % modulus, n)
        self.ctx.minv = (-pow(modulus, -1, 1 << 64)) % (1 << 64)

    cpdef object pow(self, object base, object exponent):
        cdef uint64_t b[MONT_MAX_LIMBS]
        cdef uint64_t e[MONT_MAX_LIMBS]
        cdef uint64_t r[MONT_MAX_LIMBS]
        cdef int en
        if exponent < 0:
            raise ValueError("negative exponent")
        en = max(1, (exponent.bit_length() + 63) // 64)
        if en > MONT_MAX_LIMBS:
            return pow(base, exponent, self.modulus)
        _load(b, base % self.modulus, self.limbs)
        _load(e, exponent, en)
        with nogil:
            mont_pow(&self.ctx, r, b, e, en)
        return _store(r, self.limbs)

    cpdef object pow2(self, object b1, object e1, object b2, object e2):
        """Return ``b1**e1 * b2**e2 mod m`` with a shared squaring chain."""
        cdef uint64_t x1[MONT_MAX_LIMBS]
        cdef uint64_t x2[MONT_MAX_LIMBS]
        cdef uint64_t y1[MONT_MAX_LIMBS]
        cdef uint64_t y2[MONT_MAX_LIMBS]
        cdef uint64_t r[MONT_MAX_LIMBS]
        cdef int en
        if e1 < 0 or e2 < 0:
            raise ValueError("negative exponent")
        en = max(1, (max(e1.bit_length(), e2.bit_length()) + 63) // 64)
        if en > MONT_MAX_LIMBS:
            return pow(b1, e1, self.modulus) * pow(b2, e2, self.modulus) % self.modulus
        _load(x1, b1 % self.modulus, self.limbs)
        _load(x2, b2 % self.modulus, self.limbs)
        _load(y1, e1, en)
        _load(y2, e2, en)
        with nogil:
            mont_pow2(&self.ctx, r, x1, y1, x2, y2, en)
        return _store(r, self.limbs)
