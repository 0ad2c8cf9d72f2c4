"""Pure-Python numerical kernels.

This module is the reference implementation of the hot scalar routines and
the fallback used when the compiled ``_ckernels`` extension is unavailable.
The Cython twin in ``_ckernels.pyx`` follows the same algorithms line by
line, so both backends agree to rounding.

Nothing here validates its arguments; the public wrappers in
:mod:`wpcn.specfun` and :mod:`wpcn.analytic` do that.  Routines that can
fail to converge return ``nan`` instead of raising.
"""
import heapq
import math

EULER_GAMMA = 0.57721566490153286061
INV_E = 0.36787944117144232160
_LN2 = math.log(2.0)
_FPMIN = 1e-300
_CAPACITY, _WEIGHT = 0, 1
# lower-tail CDF quadrature: relative accuracy target and interval budget
_CDF_REL_TOL = 1e-14
_CDF_MAX_SUB = 400

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def ln_gamma(a):
    return math.lgamma(a)


def gammainc_lower_reg(a, x, eps, max_terms):
    """Regularized lower incomplete gamma P(a, x)."""
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x, eps, max_terms)
    return 1.0 - _gamma_cf(a, x, eps, max_terms)


def gammainc_upper_reg(a, x, eps, max_terms):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x, eps, max_terms)
    return _gamma_cf(a, x, eps, max_terms)


def _gamma_series(a, x, eps, max_terms):
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(max_terms):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * eps:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    return math.nan


def _gamma_cf(a, x, eps, max_terms):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, max_terms + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    return math.nan


def digamma(x):
    shift = 0.0
    while x < 6.0:
        shift -= 1.0 / x
        x += 1.0
    f = 1.0 / (x * x)
    tail = f * (-1.0 / 12 + f * (1.0 / 120 + f * (-1.0 / 252 + f * (
        1.0 / 240 + f * (-1.0 / 132 + f * (691.0 / 32760 - f / 12.0))))))
    return shift + math.log(x) - 0.5 / x + tail


def bessel_k01e(x, eps, max_terms):
    """Return ``(e^x K_0(x), e^x K_1(x))`` for ``x > 0``."""
    if x <= 2.0:
        return _k01_series(x, eps, max_terms)
    return _k01_steed(x, eps, max_terms)


def _k01_series(x, eps, max_terms):
    q = 0.25 * x * x
    lx = math.log(0.5 * x)
    # k = 0 terms
    t0 = 1.0          # q^k / (k!)^2
    t1 = 1.0          # q^k / (k! (k+1)!)
    harm = 0.0        # H_k
    i0 = 1.0
    i1 = 1.0
    s0 = 0.0
    s1 = -2.0 * EULER_GAMMA + 1.0   # psi(1) + psi(2)
    for k in range(1, max_terms + 1):
        t0 *= q / (k * k)
        t1 *= q / (k * (k + 1.0))
        harm += 1.0 / k
        i0 += t0
        i1 += t1
        s0 += harm * t0
        s1 += (2.0 * harm + 1.0 / (k + 1.0) - 2.0 * EULER_GAMMA) * t1
        if t0 < eps * i0 and t1 < eps * i1:
            break
    else:
        return math.nan, math.nan
    k0 = -(lx + EULER_GAMMA) * i0 + s0
    k1 = 1.0 / x + lx * (0.5 * x * i1) - 0.25 * x * s1
    ex = math.exp(x)
    return k0 * ex, k1 * ex


def _k01_steed(x, eps, max_terms):
    # Steed/Temme continued fraction for K_0, K_1 at order mu = 0
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
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
        if abs(dels / s) < eps:
            break
    else:
        return math.nan, math.nan
    h *= a1
    k0e = math.sqrt(math.pi / (2.0 * x)) / s
    k1e = k0e * (x + 0.5 - h) / x
    return k0e, k1e


def log_bessel_k_all(n, x, eps, max_terms):
    """List of ``log K_k(x)`` for ``k = 0..n`` via upward ratio recurrence."""
    k0e, k1e = bessel_k01e(x, eps, max_terms)
    out = [math.log(k0e) - x]
    if n == 0:
        return out
    lk = math.log(k1e) - x
    out.append(lk)
    r = k1e / k0e
    for k in range(1, n):
        r = 1.0 / r + 2.0 * k / x
        lk += math.log(r)
        out.append(lk)
    return out


def log_bessel_k(n, x, eps, max_terms):
    return log_bessel_k_all(n, x, eps, max_terms)[n]


def lambert_w0(x):
    if x == 0.0:
        return 0.0
    if x <= -INV_E:
        return -1.0
    if x < -0.25:
        p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0))
    elif x < 3.0:
        w = math.log1p(x)
        if x > 0.0:
            w *= 1.0 - math.log1p(w) / (2.0 + w)
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        dw = f / (ew * wp1 - 0.5 * (w + 2.0) * f / wp1)
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    return w


def product_sf(z, n, c, eps, max_terms):
    """Survival function of ``c * X * Y`` with X, Y ~ Gamma(n, 1) iid.

    Evaluates the finite Bessel sum with every term in the log domain and
    sums the shifted exponentials exactly.
    """
    u = math.sqrt(z / c) if z > 0.0 else 0.0
    if u <= 0.0:
        return 1.0
    lu = math.log(u)
    lk = log_bessel_k_all(n, 2.0 * u, eps, max_terms)
    logs = [(n + p) * lu + lk[n - p] - math.lgamma(p + 1.0) for p in range(n)]
    m = max(logs)
    total = math.fsum(math.exp(v - m) for v in logs)
    s = math.exp(_LN2 - math.lgamma(n) + m + math.log(total))
    return min(1.0, s)


def product_cdf(z, n, c, eps, max_terms):
    """CDF of ``c * X * Y``.

    Below the median ``1 - sf`` cancels, so the lower tail is integrated
    directly from the density instead.
    """
    sf = product_sf(z, n, c, eps, max_terms)
    if sf <= 0.5:
        return 1.0 - sf
    u = math.sqrt(z / c)
    if u <= 0.0:
        return 0.0
    val, _, _, _ = _adaptive(_WEIGHT, n, 0.0, 0.0, u, 0.0, _CDF_REL_TOL, _CDF_MAX_SUB, eps,
                             max_terms)
    return min(val, 0.5)


def product_log_pdf(z, n, c, eps, max_terms):
    lz = math.log(z) - math.log(c)
    x = 2.0 * math.sqrt(z / c)
    if x < 1e-150:
        # K_0(x) ~ -ln(x/2) - gamma once z/c underflows
        lk0 = math.log(-0.5 * lz - EULER_GAMMA)
    else:
        lk0 = log_bessel_k(0, x, eps, max_terms)
    return _LN2 - 2.0 * math.lgamma(n) - math.log(c) + (n - 1) * lz + lk0


def _density_t(t, n, eps, max_terms):
    # density of sqrt(X Y): 4 t^(2n-1) K_0(2t) / ((n-1)!)^2
    if t <= 0.0:
        return 0.0
    k0e, _ = bessel_k01e(2.0 * t, eps, max_terms)
    return math.exp(math.log(4.0) + (2 * n - 1) * math.log(t) + math.log(k0e) - 2.0 * t
                    - 2.0 * math.lgamma(n))


def capacity_integrand(t, n, c, eps, max_terms):
    """Integrand of the ergodic capacity after ``z = c t^2``.

    ``log2(1 + c t^2) * 4 t^(2n-1) K_0(2t) / ((n-1)!)^2``; the weight does
    not depend on ``c``.
    """
    return math.log1p(c * t * t) / _LN2 * _density_t(t, n, eps, max_terms)


def _integrand(kind, t, n, c, eps, max_terms):
    if kind == _WEIGHT:
        return _density_t(t, n, eps, max_terms)
    return capacity_integrand(t, n, c, eps, max_terms)


def _gk15(kind, n, c, lo, hi, eps, max_terms):
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    fc = _integrand(kind, center, n, c, eps, max_terms)
    resk = fc * _WGK[7]
    resg = fc * _WG[3]
    for j in range(7):
        dx = half * _XGK[j]
        f1 = _integrand(kind, center - dx, n, c, eps, max_terms)
        f2 = _integrand(kind, center + dx, n, c, eps, max_terms)
        resk += _WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += _WG[j // 2] * (f1 + f2)
    return resk * half, abs((resk - resg) * half)


def capacity_cutoff(n, c, abs_tol, eps, max_terms):
    """Upper limit beyond which the capacity integrand tail is below ``abs_tol``.

    Past ``t = max(2n, 4)`` the log-slope of the integrand is at most -1/2,
    so the tail mass is bounded by twice the integrand value at the cutoff.
    """
    t = max(2.0 * n, 4.0)
    while 2.0 * capacity_integrand(t, n, c, eps, max_terms) > 0.1 * abs_tol:
        t *= 1.25
    return t


def _adaptive(kind, n, c, lo, hi, abs_tol, rel_tol, max_sub, eps, max_terms):
    """Globally adaptive G7-K15 on ``[lo, hi]``; bisects the worst interval.

    Returns ``(value, error_estimate, subdivisions, converged)``.
    """
    val, err = _gk15(kind, n, c, lo, hi, eps, max_terms)
    heap = [(-err, lo, hi, val)]
    total = val
    total_err = err
    nsub = 1
    while total_err > max(abs_tol, rel_tol * abs(total)):
        if nsub >= max_sub:
            return total, total_err, nsub, False
        _, a, b, _ = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        v1, e1 = _gk15(kind, n, c, a, mid, eps, max_terms)
        v2, e2 = _gk15(kind, n, c, mid, b, eps, max_terms)
        heapq.heappush(heap, (-e1, a, mid, v1))
        heapq.heappush(heap, (-e2, mid, b, v2))
        nsub += 1
        total = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
    return total, total_err, nsub, True


def capacity_integral(n, c, abs_tol, rel_tol, max_sub, eps, max_terms):
    """Adaptive Gauss-Kronrod integration of the ergodic capacity in bits.

    Returns ``(value, error_estimate, subdivisions, converged)``.
    """
    if c <= 0.0:
        return 0.0, 0.0, 0, True
    upper = capacity_cutoff(n, c, abs_tol, eps, max_terms)
    return _adaptive(_CAPACITY, n, c, 0.0, upper, abs_tol, rel_tol, max_sub, eps, max_terms)
