# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled Horner and Aberth kernels on gmpy2 ``mpc`` values.

Same contracts as ``_kernels_py``, evaluated in C at the active context
precision.
"""

from libc.stdlib cimport malloc, free
from gmpy2 cimport *

import gmpy2

cdef extern from "mpfr.h":
    int mpfr_init2(mpfr_ptr, mpfr_prec_t)
    void mpfr_clear(mpfr_ptr)
    double mpfr_get_d(mpfr_srcptr, mpfr_rnd_t)
    int mpfr_zero_p(mpfr_srcptr)
    int mpfr_set_ui(mpfr_ptr, unsigned long, mpfr_rnd_t)
    int mpfr_add(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_sub(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_mul(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_div(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_sqr(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_neg(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t)
    int mpfr_hypot(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t)

cdef extern from "mpc.h":
    void mpc_init2(mpc_ptr, mpfr_prec_t)
    void mpc_clear(mpc_ptr)

import_gmpy2()

# Complex values are mpc_t used as plain (re, im) pairs of mpfr: products and
# quotients are computed from real operations, accurate to a few ulps but not
# correctly rounded, which is several times cheaper than mpc_mul/mpc_div.

cdef struct _Scratch:
    mpfr_t a
    mpfr_t b
    mpfr_t c
    mpfr_t d


cdef void _scratch_init(_Scratch *t, mpfr_prec_t prec):
    mpfr_init2(t.a, prec)
    mpfr_init2(t.b, prec)
    mpfr_init2(t.c, prec)
    mpfr_init2(t.d, prec)


cdef void _scratch_clear(_Scratch *t):
    mpfr_clear(t.a)
    mpfr_clear(t.b)
    mpfr_clear(t.c)
    mpfr_clear(t.d)


cdef inline bint _is_zero(mpc_srcptr x):
    return mpfr_zero_p(x.re) and mpfr_zero_p(x.im)


cdef inline void _cset(mpc_ptr r, mpc_srcptr x):
    mpfr_set(r.re, x.re, MPFR_RNDN)
    mpfr_set(r.im, x.im, MPFR_RNDN)


cdef inline void _cadd(mpc_ptr r, mpc_srcptr x, mpc_srcptr y):
    mpfr_add(r.re, x.re, y.re, MPFR_RNDN)
    mpfr_add(r.im, x.im, y.im, MPFR_RNDN)


cdef inline void _csub(mpc_ptr r, mpc_srcptr x, mpc_srcptr y):
    mpfr_sub(r.re, x.re, y.re, MPFR_RNDN)
    mpfr_sub(r.im, x.im, y.im, MPFR_RNDN)


cdef inline void _cmul(mpc_ptr r, mpc_srcptr x, mpc_srcptr y, _Scratch *t):
    # r may alias x or y
    mpfr_mul(t.a, x.re, y.re, MPFR_RNDN)
    mpfr_mul(t.b, x.im, y.im, MPFR_RNDN)
    mpfr_mul(t.c, x.re, y.im, MPFR_RNDN)
    mpfr_mul(t.d, x.im, y.re, MPFR_RNDN)
    mpfr_sub(r.re, t.a, t.b, MPFR_RNDN)
    mpfr_add(r.im, t.c, t.d, MPFR_RNDN)


cdef inline void _cdiv(mpc_ptr r, mpc_srcptr x, mpc_srcptr y, _Scratch *t):
    # x * conj(y) / |y|^2; r may alias x or y
    mpfr_sqr(t.a, y.re, MPFR_RNDN)
    mpfr_sqr(t.b, y.im, MPFR_RNDN)
    mpfr_add(t.a, t.a, t.b, MPFR_RNDN)
    mpfr_mul(t.b, x.re, y.re, MPFR_RNDN)
    mpfr_mul(t.c, x.im, y.im, MPFR_RNDN)
    mpfr_add(t.b, t.b, t.c, MPFR_RNDN)
    mpfr_mul(t.c, x.im, y.re, MPFR_RNDN)
    mpfr_mul(t.d, x.re, y.im, MPFR_RNDN)
    mpfr_sub(t.c, t.c, t.d, MPFR_RNDN)
    mpfr_div(r.re, t.b, t.a, MPFR_RNDN)
    mpfr_div(r.im, t.c, t.a, MPFR_RNDN)


cdef inline void _cinv(mpc_ptr r, mpc_srcptr y, _Scratch *t):
    mpfr_sqr(t.a, y.re, MPFR_RNDN)
    mpfr_sqr(t.b, y.im, MPFR_RNDN)
    mpfr_add(t.a, t.a, t.b, MPFR_RNDN)
    mpfr_div(r.re, y.re, t.a, MPFR_RNDN)
    mpfr_neg(t.b, y.im, MPFR_RNDN)
    mpfr_div(r.im, t.b, t.a, MPFR_RNDN)


cdef inline double _cabs(mpc_srcptr x, _Scratch *t):
    mpfr_hypot(t.a, x.re, x.im, MPFR_RNDN)
    return mpfr_get_d(t.a, MPFR_RNDN)


cdef inline mpc _as_mpc(x):
    if type(x) is mpc:
        return <mpc>x
    return <mpc>gmpy2.mpc(x)


cdef inline mpc _wrap(mpc_srcptr x, mpfr_prec_t prec):
    cdef mpc r = GMPy_MPC_New(prec, prec, NULL)
    _cset(MPC(r), x)
    return r


cdef class _Poly:
    """Coefficients copied into a C array at one precision."""

    cdef mpc_t *c
    cdef int n
    cdef _Scratch t

    def __cinit__(self, coeffs, mpfr_prec_t prec):
        cdef int k
        self.n = len(coeffs)
        self.c = <mpc_t *>malloc(max(self.n, 1) * sizeof(mpc_t))
        if self.c == NULL:
            raise MemoryError()
        _scratch_init(&self.t, prec)
        for k in range(self.n):
            mpc_init2(self.c[k], prec)
            _cset(self.c[k], MPC(_as_mpc(coeffs[k])))

    def __dealloc__(self):
        cdef int k
        if self.c != NULL:
            for k in range(self.n):
                mpc_clear(self.c[k])
            free(self.c)
            _scratch_clear(&self.t)

    cdef void value(self, mpc_ptr p, mpc_srcptr x):
        cdef int k
        _cset(p, self.c[self.n - 1])
        for k in range(self.n - 2, -1, -1):
            _cmul(p, p, x, &self.t)
            _cadd(p, p, self.c[k])

    cdef void value_d(self, mpc_ptr p, mpc_ptr dp, mpc_srcptr x):
        cdef int k
        _cset(p, self.c[self.n - 1])
        mpfr_set_ui(dp.re, 0, MPFR_RNDN)
        mpfr_set_ui(dp.im, 0, MPFR_RNDN)
        for k in range(self.n - 2, -1, -1):
            _cmul(dp, dp, x, &self.t)
            _cadd(dp, dp, p)
            _cmul(p, p, x, &self.t)
            _cadd(p, p, self.c[k])


cdef mpfr_prec_t _prec():
    return gmpy2.get_context().precision


def horner(coeffs, x):
    cdef mpfr_prec_t prec = _prec()
    cdef _Poly P = _Poly(coeffs, prec)
    cdef mpc xx = _as_mpc(x)
    cdef mpc r = GMPy_MPC_New(prec, prec, NULL)
    P.value(MPC(r), MPC(xx))
    return r


def horner_d(coeffs, x):
    """Value and first derivative."""
    cdef mpfr_prec_t prec = _prec()
    cdef _Poly P = _Poly(coeffs, prec)
    cdef mpc xx = _as_mpc(x)
    cdef mpc p = GMPy_MPC_New(prec, prec, NULL)
    cdef mpc dp = GMPy_MPC_New(prec, prec, NULL)
    P.value_d(MPC(p), MPC(dp), MPC(xx))
    return p, dp


def aberth(coeffs, roots, double tol, int maxiter):
    """Simultaneous Aberth–Ehrlich refinement of all roots.

    Stopping rule and return value as in the pure-Python kernel.
    """
    cdef mpfr_prec_t prec = _prec()
    cdef _Poly P = _Poly(coeffs, prec)
    cdef int n = len(roots)
    cdef int i, j, it = 0
    cdef double worst, rel, az, prev = float("inf")
    cdef double floor_ = tol ** 0.5
    cdef bint done = False
    cdef mpc_t p, dp, ratio, s, d
    cdef _Scratch t
    cdef mpc_t *z = <mpc_t *>malloc(max(n, 1) * sizeof(mpc_t))
    if z == NULL:
        raise MemoryError()
    for i in range(n):
        mpc_init2(z[i], prec)
        _cset(z[i], MPC(_as_mpc(roots[i])))
    mpc_init2(p, prec)
    mpc_init2(dp, prec)
    mpc_init2(ratio, prec)
    mpc_init2(s, prec)
    mpc_init2(d, prec)
    _scratch_init(&t, prec)
    try:
        while it < maxiter:
            it += 1
            worst = 0.0
            for i in range(n):
                P.value_d(p, dp, z[i])
                if _is_zero(p):
                    continue
                if _is_zero(dp):
                    _cset(ratio, p)
                else:
                    _cdiv(ratio, p, dp, &t)
                mpfr_set_ui(s.re, 0, MPFR_RNDN)
                mpfr_set_ui(s.im, 0, MPFR_RNDN)
                for j in range(n):
                    if j != i:
                        _csub(d, z[i], z[j])
                        if not _is_zero(d):
                            _cinv(d, d, &t)
                            _cadd(s, s, d)
                # correction ratio / (1 - ratio * s), left in d
                _cmul(d, ratio, s, &t)
                mpfr_neg(d.re, d.re, MPFR_RNDN)
                mpfr_neg(d.im, d.im, MPFR_RNDN)
                mpfr_set_ui(t.a, 1, MPFR_RNDN)
                mpfr_add(d.re, d.re, t.a, MPFR_RNDN)
                _cdiv(d, ratio, d, &t)
                az = _cabs(z[i], &t)
                _csub(z[i], z[i], d)
                rel = _cabs(d, &t) / (az if az > 1.0 else 1.0)
                if rel > worst:
                    worst = rel
            if worst <= tol or (worst <= floor_ and worst > 0.5 * prev):
                done = True
                break
            prev = worst
        out = [_wrap(z[i], prec) for i in range(n)]
    finally:
        for i in range(n):
            mpc_clear(z[i])
        free(z)
        mpc_clear(p)
        mpc_clear(dp)
        mpc_clear(ratio)
        mpc_clear(s)
        mpc_clear(d)
        _scratch_clear(&t)
    return out, it, done
