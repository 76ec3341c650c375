"""Special functions used by the interval constructions.

Everything here is scalar, pure Python and reentrant.  Inputs are plain
floats; NaN is rejected everywhere with :class:`DomainError`.

The incomplete beta function is evaluated with the classic continued
fraction, but its power prefactor ``x**a (1-x)**b / B(a, b)`` is built from
Stirling differences rather than three independent ``lgamma`` calls.  With
``b`` in the millions the naive route loses eight or more digits to
cancellation, which is far too much for exact intervals at ``p ~ 1e-6``.
"""

import math

from .errors import ConvergenceError, DomainError

__all__ = [
    "normal_cdf",
    "normal_sf",
    "normal_pdf",
    "log_normal_cdf",
    "normal_quantile",
    "log_gamma",
    "log_gamma_diff",
    "log_binomial_coefficient",
    "reg_inc_beta",
    "reg_inc_beta_inv",
]

_SQRT2 = math.sqrt(2.0)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# ln Phi(x) switches to the asymptotic series below this point.
_DEEP_TAIL = -30.0


def _check_real(name, x):
    if math.isnan(x):
        raise DomainError(f"{name} is NaN")


# ---------------------------------------------------------------------------
# Standard normal
# ---------------------------------------------------------------------------


def normal_cdf(x):
    """Standard normal CDF, accurate to a few ulp in both tails."""
    _check_real("x", x)
    return 0.5 * math.erfc(-x / _SQRT2)


def normal_sf(x):
    """Standard normal upper tail ``1 - Phi(x)`` without cancellation."""
    _check_real("x", x)
    return 0.5 * math.erfc(x / _SQRT2)


def normal_pdf(x):
    _check_real("x", x)
    return math.exp(-0.5 * x * x - _HALF_LOG_2PI)


def _log_normal_tail_asymptotic(x):
    # ln Phi(x) for x << 0:  -x^2/2 - ln(-x) - ln sqrt(2 pi) + ln(1 - 1/x^2 + 3/x^4 - ...)
    x2 = x * x
    term = 1.0
    total = 1.0
    for k in range(1, 16):
        term *= -(2 * k - 1) / x2
        total += term
        if abs(term) < 1e-17:
            break
    return -0.5 * x2 - math.log(-x) - _HALF_LOG_2PI + math.log(total)


def log_normal_cdf(x):
    """``ln Phi(x)``, finite for every finite ``x`` (no underflow in the lower tail)."""
    _check_real("x", x)
    if x > 5.0:
        return math.log1p(-normal_sf(x))
    if x >= _DEEP_TAIL:
        return math.log(normal_cdf(x))
    if x == -math.inf:
        return -math.inf
    return _log_normal_tail_asymptotic(x)


# Wichura (1988), algorithm AS 241 (PPND16).
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coef, r):
    acc = 0.0
    for c in reversed(coef):
        acc = acc * r + c
    return acc


def _ppnd16(q):
    d = q - 0.5
    if abs(d) <= 0.425:
        r = 0.180625 - d * d
        return d * _poly(_A, r) / _poly(_B, r)
    r = q if d < 0 else 1.0 - q
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        z = _poly(_C, r) / _poly(_D, r)
    else:
        r -= 5.0
        z = _poly(_E, r) / _poly(_F, r)
    return -z if d < 0 else z


def normal_quantile(q):
    """Inverse of :func:`normal_cdf` on ``(0, 1)``.

    A rational first guess (AS 241) is polished by two Newton steps on
    ``ln Phi(z) - ln q``; working on the log scale keeps the iteration
    well defined for ``q`` as small as the smallest subnormal double.
    """
    _check_real("q", q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"normal_quantile requires 0 < q < 1, got {q!r}")
    if q == 0.5:
        return 0.0
    if q > 0.5:
        # 1 - q is exact for q in [0.5, 1)
        return -normal_quantile(1.0 - q)
    z = _ppnd16(q)
    log_q = math.log(q)
    for _ in range(2):
        log_cdf = log_normal_cdf(z)
        # d/dz ln Phi(z) = phi(z) / Phi(z)
        hazard = math.exp(-0.5 * z * z - _HALF_LOG_2PI - log_cdf)
        z -= (log_cdf - log_q) / hazard
    return z


# ---------------------------------------------------------------------------
# Gamma and beta
# ---------------------------------------------------------------------------


def log_gamma(x):
    """``ln Gamma(x)`` for ``x > 0``."""
    _check_real("x", x)
    if x <= 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


# B_{2k} / (2k (2k-1)) for k = 1..8
_STIRLING = (1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0,
             -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0)


def _stirling_correction(x):
    # ln Gamma(x) - [(x - 1/2) ln x - x + ln sqrt(2 pi)]
    if x < 10.0:
        return math.lgamma(x) - ((x - 0.5) * math.log(x) - x + _HALF_LOG_2PI)
    inv = 1.0 / x
    inv2 = inv * inv
    acc = 0.0
    for c in reversed(_STIRLING):
        acc = acc * inv2 + c
    return acc * inv


def log_gamma_diff(a, b):
    """``ln Gamma(a + b) - ln Gamma(b)`` without cancellation for large ``b``."""
    _check_real("a", a)
    _check_real("b", b)
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"log_gamma_diff requires a, b > 0, got {a!r}, {b!r}")
    if b < 10.0:
        return math.lgamma(a + b) - math.lgamma(b)
    s = a + b
    return ((b - 0.5) * math.log1p(a / b) + a * math.log(s) - a
            + _stirling_correction(s) - _stirling_correction(b))


def log_binomial_coefficient(n, k):
    """``ln C(n, k)`` for real ``0 <= k <= n``."""
    _check_real("n", n)
    _check_real("k", k)
    if not 0 <= k <= n:
        raise DomainError(f"log_binomial_coefficient requires 0 <= k <= n, got n={n!r}, k={k!r}")
    if k == 0 or k == n:
        return 0.0
    small, large = (k, n - k) if k <= n - k else (n - k, k)
    # C(n, k) = Gamma(n + 1) / (Gamma(small + 1) Gamma(large + 1))
    return log_gamma_diff(small, large + 1.0) - math.lgamma(small + 1.0)


def _rlog1(e):
    # e - ln(1 + e) with full relative accuracy near e = 0
    if abs(e) >= 0.5:
        return e - math.log1p(e)
    t = e / (2.0 + e)
    t2 = t * t
    # ln(1 + e) = 2 atanh(t) and e - 2t = e t
    acc = 0.0
    for k in range(41, 1, -2):
        acc = acc * t2 + 1.0 / k
    return e * t - 2.0 * t * t2 * acc


def _log_beta_prefactor(x, a, b):
    """``ln[x^a (1 - x)^b / B(a, b)]`` for ``0 < x < 1``."""
    if a >= 10.0 and b >= 10.0:
        s = a + b
        lam = s * x - a
        e = lam / a
        f = -lam / b
        # a e + b f == 0, so the large logarithms collapse into x - ln(1 + x) terms;
        # far from the mean 1 + e = s x / a is formed directly rather than from e
        re = _rlog1(e) if abs(e) < 0.5 else e - (math.log(x) + math.log1p(b / a))
        rf = _rlog1(f) if abs(f) < 0.5 else f - (math.log1p(-x) + math.log1p(a / b))
        core = a * re + b * rf
        return (-core + 0.5 * math.log(a * b / s) - _HALF_LOG_2PI
                + _stirling_correction(s) - _stirling_correction(a) - _stirling_correction(b))
    log_terms = a * math.log(x) + b * math.log1p(-x)
    if a < 10.0 and b >= 10.0:
        return log_terms - math.lgamma(a) + log_gamma_diff(a, b)
    if b < 10.0 and a >= 10.0:
        return log_terms - math.lgamma(b) + log_gamma_diff(b, a)
    return log_terms - math.lgamma(a) - math.lgamma(b) + math.lgamma(a + b)


_CF_TINY = 1e-300
_CF_EPS = 1e-16
_CF_MAXIT = 10_000


def _beta_cf(a, b, x, xc):
    # modified Lentz evaluation of the continued fraction for I_x(a, b); xc = 1 - x
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    if x <= 0.5:
        d = 1.0 - qab * x / qap
    else:
        # same quantity written with the complement; avoids cancellation when xc is tiny
        d = (1.0 - b + qab * xc) / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _CF_EPS:
            return h
    raise ConvergenceError("incomplete beta continued fraction did not converge",
                           a=a, b=b, x=x, iterations=_CF_MAXIT)


def _check_beta_params(a, b):
    _check_real("a", a)
    _check_real("b", b)
    if not (a > 0.0 and b > 0.0) or math.isinf(a) or math.isinf(b):
        raise DomainError(f"beta parameters must be finite and positive, got a={a!r}, b={b!r}")


_SERIES_BUDGET = 20_000
_RESCALE = 1e280
_LOG_RESCALE = math.log(_RESCALE)


def _beta_series(a, b, x, xc, log_pref):
    # Pfaff-transformed hypergeometric series for I_x(a, b); every term is
    # positive while n < b - 1, so nothing cancels.  Returns None when the
    # series would need more than _SERIES_BUDGET terms.
    r = x / xc
    term = 1.0
    total = 1.0
    log_offset = 0.0
    for n in range(_SERIES_BUDGET):
        ratio = (b - 1.0 - n) * r / (a + 1.0 + n)
        if ratio < -1.0:
            # past n = b - 1 the terms alternate; growing ones never settle
            return None
        term *= ratio
        total += term
        if abs(term) <= 1e-17 * total and (b - 1.0 - n) * r < (a + 1.0 + n):
            return math.exp(log_pref + log_offset - math.log(a * xc)) * total
        if total > _RESCALE:
            total /= _RESCALE
            term /= _RESCALE
            log_offset += _LOG_RESCALE
    return None


# above this value the series result is replaced by 1 - (its complement)
_COMPLEMENT_SWITCH = 1.0 - 1e-3
_COMPLEMENT_FLOOR = 1.0 - 1e-6


def _inc_beta_lower_half(x, xc, a, b):
    # (I_x(a, b), 1 - I_x(a, b)) for x <= 1/2, xc = 1 - x supplied exactly;
    # whichever of the pair is small is computed directly, never as 1 - (something near 1)
    log_pref = _log_beta_prefactor(x, a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        value = math.exp(log_pref) * _beta_cf(a, b, x, xc) / a
        return value, 1.0 - value
    value = _beta_series(a, b, x, xc, log_pref)
    if value is not None and value <= _COMPLEMENT_SWITCH:
        return value, 1.0 - value
    # the complement I_xc(b, a) has the mirror-image series, which terminates
    # for integer a; the flipped fraction is the last resort because it
    # cancels badly when a is small next to b
    comp = _beta_series(b, a, xc, x, log_pref)
    if comp is None and value is not None and value < _COMPLEMENT_FLOOR:
        # the subtraction loses less than the fraction would here
        comp = 1.0 - value
    if comp is None:
        comp = math.exp(log_pref) * _beta_cf(b, a, xc, x) / b
    return 1.0 - comp, comp


def reg_inc_beta(x, a, b):
    """Regularized incomplete beta function ``I_x(a, b)``.

    For integer ``a, b`` this is ``P(Binomial(a + b - 1, x) >= a)``, which is
    how the exact binomial and negative-binomial CDFs are evaluated.
    """
    _check_real("x", x)
    _check_beta_params(a, b)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"reg_inc_beta requires 0 <= x <= 1, got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    if x <= 0.5:
        value, _ = _inc_beta_lower_half(x, 1.0 - x, a, b)
    else:
        # 1 - x is exact on [1/2, 1)
        _, value = _inc_beta_lower_half(1.0 - x, x, b, a)
    return min(1.0, max(0.0, value))


def _beta_inv_guess(q, a, b):
    # Numerical Recipes style starting point
    if a >= 1.0 and b >= 1.0:
        pp = q if q < 0.5 else 1.0 - q
        t = math.sqrt(-2.0 * math.log(pp))
        z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t
        if q < 0.5:
            z = -z
        al = (z * z - 3.0) / 6.0
        h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0))
        w = z * math.sqrt(al + h) / h - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (
            al + 5.0 / 6.0 - 2.0 / (3.0 * h))
        if w > 300.0:
            return 0.0
        return a / (a + b * math.exp(2.0 * w))
    lna = math.log(a / (a + b))
    lnb = math.log(b / (a + b))
    t = math.exp(a * lna) / a
    u = math.exp(b * lnb) / b
    w = t + u
    if q < t / w:
        return (a * w * q) ** (1.0 / a)
    return 1.0 - (b * w * (1.0 - q)) ** (1.0 / b)


def _inversion_resolution(x, a, b):
    """Change in ``I_x`` across a few ulps of ``x``: the best residual any double can reach."""
    log_density = _log_beta_prefactor(x, a, b) - math.log(x) - math.log1p(-x)
    return 4.0 * math.ulp(x) * math.exp(min(log_density, 700.0))


def reg_inc_beta_inv(q, a, b, tol=1e-12):
    """Solve ``I_x(a, b) = q`` for ``x``.

    Safeguarded Newton: every iterate shrinks a bracket ``[lo, hi]`` known to
    contain the root, and a step that would leave it is replaced by a
    bisection (geometric when the bracket spans many decades, which is the
    normal situation for rare-event quantiles).
    """
    _check_real("q", q)
    _check_beta_params(a, b)
    if not 0.0 < q < 1.0:
        raise DomainError(f"reg_inc_beta_inv requires 0 < q < 1, got {q!r}")
    if a == 1.0:
        return -math.expm1(math.log1p(-q) / b)
    if b == 1.0:
        return math.exp(math.log(q) / a)

    lo, hi = 0.0, 1.0
    x = _beta_inv_guess(q, a, b)
    if not 0.0 < x < 1.0:
        x = a / (a + b)
    best_x, best_err = x, math.inf
    for _ in range(200):
        err = reg_inc_beta(x, a, b) - q
        if abs(err) < best_err:
            best_x, best_err = x, abs(err)
        if err == 0.0:
            return x
        if err > 0.0:
            hi = x
        else:
            lo = x
        log_density = _log_beta_prefactor(x, a, b) - math.log(x) - math.log1p(-x)
        step = err / math.exp(log_density) if log_density > -700.0 else math.inf
        candidate = x - step
        if not lo < candidate < hi:
            if lo == 0.0:
                candidate = 0.1 * hi
            elif hi / lo > 4.0:
                candidate = math.sqrt(lo * hi)
            else:
                candidate = 0.5 * (lo + hi)
        if candidate == x or abs(candidate - x) <= 4e-16 * x:
            x = candidate
            break
        x = candidate
    err = abs(reg_inc_beta(x, a, b) - q)
    if err < best_err:
        best_x, best_err = x, err
    if best_err > max(tol, _inversion_resolution(best_x, a, b)):
        raise ConvergenceError("incomplete beta inversion failed", q=q, a=a, b=b,
                               x=best_x, residual=best_err)
    return best_x
