"""Independent reference computations used by the tests.

None of these call into rarecert; they trade speed for transparency.
"""

import math

import numpy as np
from scipy.special import ndtr


def _binom_log_comb(n, k, _cache={}):
    key = (n, k)
    if key not in _cache:
        _cache[key] = np.array([math.log(math.comb(n, j)) for j in range(k + 1)])
    return _cache[key]


def log_binom_cdf(n, k, p):
    """ln P(Bin(n, p) <= k) by direct summation of log pmf terms."""
    j = np.arange(k + 1)
    log_terms = _binom_log_comb(n, k) + j * math.log(p) + (n - j) * math.log1p(-p)
    top = log_terms.max()
    return top + math.log(math.fsum(np.exp(log_terms - top)))


def bisect_decreasing(f, target, lo, hi, iters=200):
    """Solve f(p) = target for f decreasing on [lo, hi]."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def exact_binomial_interval(n, k, alpha):
    """Clopper-Pearson endpoints by bisection on the summed binomial CDF."""
    half = alpha / 2
    # upper: P(X <= k) = alpha/2, decreasing in p
    upper = 1.0 if k == n else math.exp(bisect_decreasing(
        lambda lp: log_binom_cdf(n, k, math.exp(lp)), math.log(half), -800.0, 0.0))
    # lower: P(X >= k) = alpha/2, i.e. P(X <= k - 1) = 1 - alpha/2
    lower = 0.0 if k == 0 else math.exp(bisect_decreasing(
        lambda lp: log_binom_cdf(n, k - 1, math.exp(lp)), math.log1p(-half), -800.0, 0.0))
    return lower, upper


def nb_cdf(n0, m, p):
    """P(at most m failures before the n0-th success), summing C(j + n0 - 1, j) q^j p^n0."""
    j = np.arange(m + 1)
    log_terms = _nb_log_comb(n0, m) + j * math.log1p(-p) + n0 * math.log(p)
    top = log_terms.max()
    return math.exp(top) * float(np.exp(log_terms - top).sum())


def _nb_log_comb(n0, m, _cache={}):
    key = (n0, m)
    if key not in _cache:
        _cache[key] = np.array([math.log(math.comb(j + n0 - 1, j)) for j in range(m + 1)])
    return _cache[key]


def exact_targeted_interval(n0, N, alpha):
    """Exact targeted-stopping endpoints from the negative-binomial pmf.

    The failure count X = N - n0 has a CDF increasing in p, so the upper end
    solves P(X >= m) = alpha/2 and the lower end P(X <= m) = alpha/2.
    """
    m, half = N - n0, alpha / 2
    lower = -bisect_decreasing(lambda neg_p: nb_cdf(n0, m, -neg_p), half, -1.0, 0.0)
    upper = 1.0 if m == 0 else bisect_decreasing(
        lambda p: 1.0 - nb_cdf(n0, m - 1, p), half, 0.0, 1.0)
    return lower, upper


def be_standard_g(n, k, ps, C=0.4748):
    p_hat = k / n
    v = ps * (1 - ps)
    return ndtr((p_hat - ps) / np.sqrt(v / n)) + C / np.sqrt(n * v)


def last_inside(ps, g_values, threshold):
    """Largest grid point with g >= threshold, and the grid spacing."""
    idx = np.nonzero(g_values >= threshold)[0]
    return ps[idx[-1]], ps[1] - ps[0]


def first_inside(ps, g_values, threshold):
    idx = np.nonzero(g_values >= threshold)[0]
    return ps[idx[0]], ps[1] - ps[0]
