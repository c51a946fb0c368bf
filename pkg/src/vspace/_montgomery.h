/* Montgomery arithmetic over odd moduli of up to MONT_MAX_LIMBS 64-bit limbs. */
#ifndef VSPACE_MONTGOMERY_H
#define VSPACE_MONTGOMERY_H

#include <stdint.h>
#include <string.h>

#define MONT_MAX_LIMBS 64

typedef unsigned __int128 mont_u128;

typedef struct {
    int n;
    uint64_t mod[MONT_MAX_LIMBS];
    uint64_t r2[MONT_MAX_LIMBS];  /* R^2 mod m */
    uint64_t one[MONT_MAX_LIMBS]; /* R mod m */
    uint64_t minv;                /* -m^{-1} mod 2^64 */
} mont_ctx;

static int mont_geq(const uint64_t *a, const uint64_t *b, int n) {
    for (int i = n - 1; i >= 0; i--) {
        if (a[i] != b[i]) return a[i] > b[i];
    }
    return 1;
}

static void mont_sub(uint64_t *r, const uint64_t *a, const uint64_t *b, int n) {
    uint64_t borrow = 0;
    for (int i = 0; i < n; i++) {
        mont_u128 d = (mont_u128)a[i] - b[i] - borrow;
        r[i] = (uint64_t)d;
        borrow = (uint64_t)(d >> 64) ? 1 : 0;
    }
}

/* r = a * b * R^{-1} mod m (CIOS). r may alias a or b. */
static inline __attribute__((always_inline)) void
mont_mul_impl(const mont_ctx *c, uint64_t *r, const uint64_t *a, const uint64_t *b, const int n) {
    uint64_t t[MONT_MAX_LIMBS + 2];
    memset(t, 0, sizeof(uint64_t) * (n + 2));
    for (int i = 0; i < n; i++) {
        mont_u128 acc = 0;
        uint64_t carry = 0;
        const uint64_t bi = b[i];
        for (int j = 0; j < n; j++) {
            acc = (mont_u128)a[j] * bi + t[j] + carry;
            t[j] = (uint64_t)acc;
            carry = (uint64_t)(acc >> 64);
        }
        acc = (mont_u128)t[n] + carry;
        t[n] = (uint64_t)acc;
        t[n + 1] = (uint64_t)(acc >> 64);

        const uint64_t m = t[0] * c->minv;
        acc = (mont_u128)m * c->mod[0] + t[0];
        carry = (uint64_t)(acc >> 64);
        for (int j = 1; j < n; j++) {
            acc = (mont_u128)m * c->mod[j] + t[j] + carry;
            t[j - 1] = (uint64_t)acc;
            carry = (uint64_t)(acc >> 64);
        }
        acc = (mont_u128)t[n] + carry;
        t[n - 1] = (uint64_t)acc;
        t[n] = t[n + 1] + (uint64_t)(acc >> 64);
    }
    if (t[n] || mont_geq(t, c->mod, n)) {
        mont_sub(r, t, c->mod, n);
    } else {
        memcpy(r, t, sizeof(uint64_t) * n);
    }
}

/* constant limb counts let the compiler unroll the inner loops */
static void mont_mul(const mont_ctx *c, uint64_t *r, const uint64_t *a, const uint64_t *b) {
    switch (c->n) {
    case 1: mont_mul_impl(c, r, a, b, 1); break;
    case 2: mont_mul_impl(c, r, a, b, 2); break;
    case 4: mont_mul_impl(c, r, a, b, 4); break;
    case 32: mont_mul_impl(c, r, a, b, 32); break;
    default: mont_mul_impl(c, r, a, b, c->n); break;
    }
}

static inline int mont_bit(const uint64_t *e, int i) {
    return (int)((e[i >> 6] >> (i & 63)) & 1);
}

static inline int mont_window(const uint64_t *e, int hi, int w) {
    /* bits [hi-w+1 .. hi] of e, hi-w+1 >= 0 */
    int v = 0;
    for (int k = hi; k > hi - w; k--) v = (v << 1) | mont_bit(e, k);
    return v;
}

/* r = base^e mod m; base, r in normal (non-Montgomery) form; e has en limbs. */
static void mont_pow(const mont_ctx *c, uint64_t *r, const uint64_t *base,
                     const uint64_t *e, int en) {
    const int n = c->n;
    const int W = 5;
    uint64_t table[1 << 5][MONT_MAX_LIMBS];
    uint64_t acc[MONT_MAX_LIMBS];
    uint64_t unit[MONT_MAX_LIMBS];

    int bits = en * 64;
    while (bits > 0 && !mont_bit(e, bits - 1)) bits--;

    memcpy(table[0], c->one, sizeof(uint64_t) * n);
    mont_mul(c, table[1], base, c->r2);
    for (int i = 2; i < (1 << W); i++) mont_mul(c, table[i], table[i - 1], table[1]);

    memcpy(acc, c->one, sizeof(uint64_t) * n);
    int top = bits - 1;
    int lead = bits % W;
    if (lead && top >= 0) {
        memcpy(acc, table[mont_window(e, top, lead)], sizeof(uint64_t) * n);
        top -= lead;
    }
    while (top >= 0) {
        for (int k = 0; k < W; k++) mont_mul(c, acc, acc, acc);
        int d = mont_window(e, top, W);
        if (d) mont_mul(c, acc, acc, table[d]);
        top -= W;
    }
    memset(unit, 0, sizeof(uint64_t) * n);
    unit[0] = 1;
    mont_mul(c, r, acc, unit);
}

/* r = b1^e1 * b2^e2 mod m via interleaved fixed 4-bit windows. */
static void mont_pow2(const mont_ctx *c, uint64_t *r,
                      const uint64_t *b1, const uint64_t *e1,
                      const uint64_t *b2, const uint64_t *e2, int en) {
    const int n = c->n;
    uint64_t t1[16][MONT_MAX_LIMBS];
    uint64_t t2[16][MONT_MAX_LIMBS];
    uint64_t acc[MONT_MAX_LIMBS];
    uint64_t unit[MONT_MAX_LIMBS];

    int bits = en * 64;
    while (bits > 0 && !mont_bit(e1, bits - 1) && !mont_bit(e2, bits - 1)) bits--;
    bits = ((bits + 3) / 4) * 4;

    memcpy(t1[0], c->one, sizeof(uint64_t) * n);
    memcpy(t2[0], c->one, sizeof(uint64_t) * n);
    mont_mul(c, t1[1], b1, c->r2);
    mont_mul(c, t2[1], b2, c->r2);
    for (int i = 2; i < 16; i++) {
        mont_mul(c, t1[i], t1[i - 1], t1[1]);
        mont_mul(c, t2[i], t2[i - 1], t2[1]);
    }

    memcpy(acc, c->one, sizeof(uint64_t) * n);
    int first = 1;
    for (int top = bits - 1; top >= 0; top -= 4) {
        if (!first) {
            for (int k = 0; k < 4; k++) mont_mul(c, acc, acc, acc);
        }
        int d1 = (top >> 6) < en ? mont_window(e1, top, 4) : 0;
        int d2 = (top >> 6) < en ? mont_window(e2, top, 4) : 0;
        if (d1) { mont_mul(c, acc, acc, t1[d1]); first = 0; }
        if (d2) { mont_mul(c, acc, acc, t2[d2]); first = 0; }
    }
    memset(unit, 0, sizeof(uint64_t) * n);
    unit[0] = 1;
    mont_mul(c, r, acc, unit);
}

#endif
