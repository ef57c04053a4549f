/* Checked scaled-integer helpers for the compiled correlator core. */
#ifndef HDFT_FASTCORE_OPS_H
#define HDFT_FASTCORE_OPS_H

#include <stdint.h>

typedef __int128 hdft_i128;

/* acc += v * num / den; 1 if the quotient is inexact, 2 on overflow. */
static inline int hdft_muldiv_add(int64_t *acc, int64_t v, int64_t num, int64_t den)
{
    hdft_i128 t = (hdft_i128)v * (hdft_i128)num;
    if (t % den)
        return 1;
    t /= den;
    t += (hdft_i128)(*acc);
    if (t > (hdft_i128)INT64_MAX || t < (hdft_i128)INT64_MIN)
        return 2;
    *acc = (int64_t)t;
    return 0;
}

static inline int hdft_add(int64_t *acc, int64_t v)
{
    int64_t r;
    if (__builtin_add_overflow(*acc, v, &r))
        return 2;
    *acc = r;
    return 0;
}

/* acc += a * b in 128 bits; 2 on overflow. */
static inline int hdft_fma128(hdft_i128 *acc, int64_t a, int64_t b)
{
    hdft_i128 p = (hdft_i128)a * (hdft_i128)b;
    hdft_i128 r;
    if (__builtin_add_overflow(*acc, p, &r))
        return 2;
    *acc = r;
    return 0;
}

static inline int64_t hdft_hi(hdft_i128 x) { return (int64_t)(x >> 64); }
static inline uint64_t hdft_lo(hdft_i128 x) { return (uint64_t)x; }

#endif
