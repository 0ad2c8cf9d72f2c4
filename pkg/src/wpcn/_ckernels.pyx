# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Line-by-line twin of :mod:`wpcn._pykernels`; see that module for the
algorithm notes.  Both expose the same names and signatures.
"""
import heapq
from math import fsum

from libc.math cimport exp, fabs, lgamma, log, log1p, sqrt, M_PI, NAN
from libc.stdlib cimport free, malloc

EULER_GAMMA = 0.57721566490153286061
INV_E = 0.36787944117144232160

cdef double _EULER = 0.57721566490153286061
cdef double _INV_E = 0.36787944117144232160
cdef double _E = 2.71828182845904523536
cdef double _LN2 = 0.69314718055994530942
cdef double _FPMIN = 1e-300
cdef int _CAPACITY = 0, _WEIGHT = 1
cdef double _CDF_REL_TOL = 1e-14
cdef int _CDF_MAX_SUB = 400

cdef double[8] _XGK
cdef double[8] _WGK
cdef double[4] _WG
_XGK[:] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
]
_WGK[:] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
]
_WG[:] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
]


cpdef double ln_gamma(double a):
    return lgamma(a)


cdef double _gamma_series(double a, double x, double eps, int max_terms) nogil:
    cdef double ap = a
    cdef double term = 1.0 / a
    cdef double total = term
    cdef int i
    for i in range(max_terms):
        ap += 1.0
        term *= x / ap
        total += term
        if fabs(term) < fabs(total) * eps:
            return total * exp(-x + a * log(x) - lgamma(a))
    return NAN


cdef double _gamma_cf(double a, double x, double eps, int max_terms) nogil:
    cdef double b = x + 1.0 - a
    cdef double c = 1.0 / _FPMIN
    cdef double d = 1.0 / b
    cdef double h = d
    cdef double an, delta
    cdef int i
    for i in range(1, max_terms + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < eps:
            return exp(-x + a * log(x) - lgamma(a)) * h
    return NAN


cpdef double gammainc_lower_reg(double a, double x, double eps, int max_terms):
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x, eps, max_terms)
    return 1.0 - _gamma_cf(a, x, eps, max_terms)


cpdef double gammainc_upper_reg(double a, double x, double eps, int max_terms):
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x, eps, max_terms)
    return _gamma_cf(a, x, eps, max_terms)


cpdef double digamma(double x):
    cdef double shift = 0.0
    cdef double f, tail
    while x < 6.0:
        shift -= 1.0 / x
        x += 1.0
    f = 1.0 / (x * x)
    tail = f * (-1.0 / 12 + f * (1.0 / 120 + f * (-1.0 / 252 + f * (
        1.0 / 240 + f * (-1.0 / 132 + f * (691.0 / 32760 - f / 12.0))))))
    return shift + log(x) - 0.5 / x + tail


cdef int _k01_series(double x, double eps, int max_terms, double* k0e, double* k1e) nogil:
    cdef double q = 0.25 * x * x
    cdef double lx = log(0.5 * x)
    cdef double t0 = 1.0, t1 = 1.0, harm = 0.0
    cdef double i0 = 1.0, i1 = 1.0, s0 = 0.0
    cdef double s1 = -2.0 * _EULER + 1.0
    cdef double ex
    cdef int k
    cdef bint done = False
    for k in range(1, max_terms + 1):
        t0 *= q / (<double>k * k)
        t1 *= q / (k * (k + 1.0))
        harm += 1.0 / k
        i0 += t0
        i1 += t1
        s0 += harm * t0
        s1 += (2.0 * harm + 1.0 / (k + 1.0) - 2.0 * _EULER) * t1
        if t0 < eps * i0 and t1 < eps * i1:
            done = True
            break
    if not done:
        k0e[0] = NAN
        k1e[0] = NAN
        return 1
    ex = exp(x)
    k0e[0] = (-(lx + _EULER) * i0 + s0) * ex
    k1e[0] = (1.0 / x + lx * (0.5 * x * i1) - 0.25 * x * s1) * ex
    return 0


cdef int _k01_steed(double x, double eps, int max_terms, double* k0e, double* k1e) nogil:
    cdef double b = 2.0 * (1.0 + x)
    cdef double d = 1.0 / b
    cdef double h = d, delh = d
    cdef double q1 = 0.0, q2 = 1.0
    cdef double a1 = 0.25
    cdef double q = a1, c = a1
    cdef double a = -a1
    cdef double s = 1.0 + q * delh
    cdef double qnew, dels
    cdef int i
    cdef bint done = False
    for i in range(2, max_terms + 2):
        a -= 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if fabs(dels / s) < eps:
            done = True
            break
    if not done:
        k0e[0] = NAN
        k1e[0] = NAN
        return 1
    h *= a1
    k0e[0] = sqrt(M_PI / (2.0 * x)) / s
    k1e[0] = k0e[0] * (x + 0.5 - h) / x
    return 0


cdef int _bessel_k01e(double x, double eps, int max_terms, double* k0e, double* k1e) nogil:
    if x <= 2.0:
        return _k01_series(x, eps, max_terms, k0e, k1e)
    return _k01_steed(x, eps, max_terms, k0e, k1e)


cpdef tuple bessel_k01e(double x, double eps, int max_terms):
    cdef double k0e, k1e
    _bessel_k01e(x, eps, max_terms, &k0e, &k1e)
    return k0e, k1e


cdef void _log_bessel_k_all(int n, double x, double eps, int max_terms, double* out) nogil:
    cdef double k0e, k1e, r, lk
    cdef int k
    _bessel_k01e(x, eps, max_terms, &k0e, &k1e)
    out[0] = log(k0e) - x
    if n == 0:
        return
    lk = log(k1e) - x
    out[1] = lk
    r = k1e / k0e
    for k in range(1, n):
        r = 1.0 / r + 2.0 * k / x
        lk += log(r)
        out[k + 1] = lk


cpdef list log_bessel_k_all(int n, double x, double eps, int max_terms):
    cdef double* buf = <double*>malloc((n + 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        _log_bessel_k_all(n, x, eps, max_terms, buf)
        return [buf[k] for k in range(n + 1)]
    finally:
        free(buf)


cpdef double log_bessel_k(int n, double x, double eps, int max_terms):
    cdef double* buf = <double*>malloc((n + 1) * sizeof(double))
    cdef double v
    if buf == NULL:
        raise MemoryError()
    _log_bessel_k_all(n, x, eps, max_terms, buf)
    v = buf[n]
    free(buf)
    return v


cpdef double lambert_w0(double x):
    cdef double w, p, l1, l2, ew, f, wp1, dw
    cdef int i
    if x == 0.0:
        return 0.0
    if x <= -_INV_E:
        return -1.0
    if x < -0.25:
        p = 2.0 * (_E * x + 1.0)
        p = sqrt(p) if p > 0.0 else 0.0
        w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0))
    elif x < 3.0:
        w = log1p(x)
        if x > 0.0:
            w *= 1.0 - log1p(w) / (2.0 + w)
    else:
        l1 = log(x)
        l2 = log(l1)
        w = l1 - l2 + l2 / l1
    for i in range(64):
        ew = exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        dw = f / (ew * wp1 - 0.5 * (w + 2.0) * f / wp1)
        w -= dw
        if fabs(dw) <= 4e-16 * (1.0 + fabs(w)):
            break
    return w


cdef double _product_sf(double z, int n, double c, double eps, int max_terms) nogil:
    cdef double u, lu, m, v, s, total, comp, t, y
    cdef double* lk
    cdef double* logs
    cdef int p
    u = sqrt(z / c) if z > 0.0 else 0.0
    if u <= 0.0:
        return 1.0
    lu = log(u)
    lk = <double*>malloc((2 * n + 1) * sizeof(double))
    logs = lk + n + 1
    _log_bessel_k_all(n, 2.0 * u, eps, max_terms, lk)
    m = -1e308
    for p in range(n):
        v = (n + p) * lu + lk[n - p] - lgamma(p + 1.0)
        logs[p] = v
        if v > m:
            m = v
    # Neumaier compensated sum of the shifted terms
    total = 0.0
    comp = 0.0
    for p in range(n):
        y = exp(logs[p] - m)
        t = total + y
        if fabs(total) >= fabs(y):
            comp += (total - t) + y
        else:
            comp += (y - t) + total
        total = t
    free(lk)
    s = exp(_LN2 - lgamma(n) + m + log(total + comp))
    return s if s < 1.0 else 1.0


cpdef double product_sf(double z, int n, double c, double eps, int max_terms):
    return _product_sf(z, n, c, eps, max_terms)


cpdef double product_cdf(double z, int n, double c, double eps, int max_terms):
    cdef double sf = _product_sf(z, n, c, eps, max_terms)
    if sf <= 0.5:
        return 1.0 - sf
    if sqrt(z / c) <= 0.0:
        return 0.0
    val = _adaptive(_WEIGHT, n, 0.0, 0.0, sqrt(z / c), 0.0, _CDF_REL_TOL, _CDF_MAX_SUB, eps,
                    max_terms)[0]
    return val if val < 0.5 else 0.5


cpdef double product_log_pdf(double z, int n, double c, double eps, int max_terms):
    cdef double k0e, k1e, x, lk0
    cdef double lz = log(z) - log(c)
    x = 2.0 * sqrt(z / c)
    if x < 1e-150:
        lk0 = log(-0.5 * lz - EULER_GAMMA)
    else:
        _bessel_k01e(x, eps, max_terms, &k0e, &k1e)
        lk0 = log(k0e) - x
    return _LN2 - 2.0 * lgamma(n) - log(c) + (n - 1) * lz + lk0


cdef double _density_t(double t, int n, double eps, int max_terms) nogil:
    cdef double k0e, k1e
    if t <= 0.0:
        return 0.0
    _bessel_k01e(2.0 * t, eps, max_terms, &k0e, &k1e)
    return exp(log(4.0) + (2 * n - 1) * log(t) + log(k0e) - 2.0 * t - 2.0 * lgamma(n))


cdef double _capacity_integrand(double t, int n, double c, double eps, int max_terms) nogil:
    return log1p(c * t * t) / _LN2 * _density_t(t, n, eps, max_terms)


cpdef double capacity_integrand(double t, int n, double c, double eps, int max_terms):
    return _capacity_integrand(t, n, c, eps, max_terms)


cdef inline double _integrand(int kind, double t, int n, double c, double eps,
                              int max_terms) nogil:
    if kind == _WEIGHT:
        return _density_t(t, n, eps, max_terms)
    return _capacity_integrand(t, n, c, eps, max_terms)


cdef void _gk15(int kind, int n, double c, double lo, double hi, double eps, int max_terms,
                double* val, double* err) nogil:
    cdef double center = 0.5 * (lo + hi)
    cdef double half = 0.5 * (hi - lo)
    cdef double fc = _integrand(kind, center, n, c, eps, max_terms)
    cdef double resk = fc * _WGK[7]
    cdef double resg = fc * _WG[3]
    cdef double dx, f1, f2
    cdef int j
    for j in range(7):
        dx = half * _XGK[j]
        f1 = _integrand(kind, center - dx, n, c, eps, max_terms)
        f2 = _integrand(kind, center + dx, n, c, eps, max_terms)
        resk += _WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += _WG[j // 2] * (f1 + f2)
    val[0] = resk * half
    err[0] = fabs((resk - resg) * half)


cpdef double capacity_cutoff(int n, double c, double abs_tol, double eps, int max_terms):
    cdef double t = 2.0 * n if 2.0 * n > 4.0 else 4.0
    while 2.0 * _capacity_integrand(t, n, c, eps, max_terms) > 0.1 * abs_tol:
        t *= 1.25
    return t


cdef tuple _adaptive(int kind, int n, double c, double lo, double hi, double abs_tol,
                     double rel_tol, int max_sub, double eps, int max_terms):
    cdef double val, err, v1, e1, v2, e2, mid, a, b
    cdef double total, total_err
    cdef int nsub
    _gk15(kind, n, c, lo, hi, eps, max_terms, &val, &err)
    heap = [(-err, lo, hi, val)]
    total = val
    total_err = err
    nsub = 1
    while total_err > max(abs_tol, rel_tol * fabs(total)):
        if nsub >= max_sub:
            return total, total_err, nsub, False
        _, a, b, _ = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        _gk15(kind, n, c, a, mid, eps, max_terms, &v1, &e1)
        _gk15(kind, n, c, mid, b, eps, max_terms, &v2, &e2)
        heapq.heappush(heap, (-e1, a, mid, v1))
        heapq.heappush(heap, (-e2, mid, b, v2))
        nsub += 1
        total = fsum([item[3] for item in heap])
        total_err = fsum([-item[0] for item in heap])
    return total, total_err, nsub, True


cpdef tuple capacity_integral(int n, double c, double abs_tol, double rel_tol,
                              int max_sub, double eps, int max_terms):
    if c <= 0.0:
        return 0.0, 0.0, 0, True
    upper = capacity_cutoff(n, c, abs_tol, eps, max_terms)
    return _adaptive(_CAPACITY, n, c, 0.0, upper, abs_tol, rel_tol, max_sub, eps, max_terms)
