"""Confidence intervals when sampling stops at the ``n0``-th success.

The data are ``(n0, N)`` with ``N`` the total number of trials, so
``N - n0`` is negative binomial and ``p_hat = n0 / N``.
"""

import math
from dataclasses import dataclass

from .ci_standard import BE_C, CI_TOL, clt_bounds, wilson_bounds
from .errors import AssumptionError, BracketError, DomainError, PreconditionError
from .intervals import Interval, Method, as_level
from .rootfind import Bracket, bisect, level_set
from .specfun import normal_cdf, normal_quantile, reg_inc_beta_inv

__all__ = [
    "C_PRIME", "StoppedSummary", "BEConfigTargeted",
    "clt_interval_t", "wilson_interval_t", "exact_interval_t", "chernoff_interval_t",
    "chernoff_h", "be_region_interval_t", "be_relaxed_interval_t", "relaxed_lambda_t",
]

C_PRIME = 16 * BE_C

# interior guard keeping the log terms of the Chernoff criterion finite
EPS = 1e-15


@dataclass(frozen=True)
class StoppedSummary:
    n0: int
    N: int

    def __post_init__(self):
        for name in ("n0", "N"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise DomainError(f"{name} must be an int, got {v!r}")
        if not 1 <= self.n0 <= self.N:
            raise DomainError(f"need N >= n0 >= 1, got n0={self.n0}, N={self.N}")

    @property
    def p_hat(self):
        return self.n0 / self.N


@dataclass(frozen=True)
class BEConfigTargeted:
    C_prime: float = C_PRIME

    def __post_init__(self):
        if not self.C_prime > 0.0:
            raise DomainError(f"C_prime must be positive, got {self.C_prime!r}")

    def lower_trivial_threshold(self, alpha):
        """``4 C'^2 / alpha^2``: up to this ``n0`` the B-E lower bound is 0."""
        return 4.0 * self.C_prime**2 / alpha**2

    def upper_trivial_threshold(self, alpha):
        """``32 C'^2 / alpha^2``: up to this ``n0`` the B-E upper bound is 1/2."""
        return 32.0 * self.C_prime**2 / alpha**2


def clt_interval_t(s, a):
    level = as_level(a)
    raw_lo, raw_hi = clt_bounds(s.N, s.n0, level.z)
    lo, hi = max(raw_lo, 0.0), min(raw_hi, 1.0)
    return Interval(lo, hi, Method.CLT, level.alpha, clamped=(lo != raw_lo or hi != raw_hi))


def wilson_interval_t(s, a):
    level = as_level(a)
    lo, hi = wilson_bounds(s.N, s.n0, level.z)
    return Interval(lo, hi, Method.WILSON, level.alpha)


def exact_interval_t(s, a):
    """Exact interval from the negative-binomial law of the failure count.

    With ``X = N - n0`` failures, ``P(X <= m) = I_p(n0, m + 1)``.
    """
    level = as_level(a)
    n0, m, half = s.n0, s.N - s.n0, 0.5 * level.alpha
    upper = 1.0 if m == 0 else reg_inc_beta_inv(1.0 - half, n0, m)
    lower = reg_inc_beta_inv(half, n0, m + 1)
    return Interval(lower, upper, Method.EXACT, level.alpha)


def chernoff_h(s, a, p):
    """Log-likelihood-ratio criterion; the Chernoff region is ``{p: h(p) >= 0}``.

    Written relative to ``p_hat`` so that ``h(p_hat) = ln(2/alpha)`` exactly
    and the large terms cancel analytically rather than in floating point.
    """
    level = as_level(a)
    n0, m = s.n0, s.N - s.n0
    p_hat = s.p_hat
    h = n0 * math.log(p / p_hat)
    if m > 0:
        # 0 * ln 0 = 0 when N = n0
        h += m * (math.log1p(-p) - math.log1p(-p_hat))
    return h + level.log_two_over_alpha


def chernoff_interval_t(s, a):
    level = as_level(a)
    p_hat = s.p_hat

    def h(p):
        return chernoff_h(s, level, p)

    lo_edge = min(EPS, 0.5 * p_hat)
    bracket = Bracket(lo_edge, p_hat, h(lo_edge), h(p_hat))
    if not (bracket.f_lo < 0.0 < bracket.f_hi):
        raise BracketError(f"Chernoff criterion has no lower crossing for {s}")
    lower = bisect(h, bracket, CI_TOL)
    if s.N == s.n0:
        upper = 1.0
    else:
        hi_edge = 1.0 - EPS
        bracket = Bracket(p_hat, hi_edge, h(p_hat), h(hi_edge))
        if not (bracket.f_hi < 0.0 < bracket.f_lo):
            raise BracketError(f"Chernoff criterion has no upper crossing for {s}")
        upper = bisect(h, bracket, CI_TOL)
    return Interval(lower, upper, Method.CHERNOFF, level.alpha)


def be_region_interval_t(s, a, cfg=None):
    """Convex hull of the B-E region under targeted stopping.

    Each side of ``p_hat`` carries its own criterion; neither is known to be
    monotone, so both are located by a grid scan with refinement.  An
    endpoint whose criterion is dominated by the error term everywhere is
    reported at its trivial value (0 or 1/2).
    """
    level = as_level(a)
    cfg = cfg or BEConfigTargeted()
    n0, N, alpha = s.n0, s.N, level.alpha
    if 2 * n0 >= N:
        raise AssumptionError(f"B-E interval assumes p_hat < 1/2, got n0={n0}, N={N}")
    half, Cp, p_hat = 0.5 * alpha, cfg.C_prime, s.p_hat

    def error_term(p):
        return Cp / math.sqrt(n0 * (1.0 - p) ** 3)

    def g_left(p):
        return normal_cdf((N * p - n0) / math.sqrt(n0 * (1.0 - p))) + error_term(p)

    def g_right(p):
        return normal_cdf((n0 - N * p) / math.sqrt(n0 * (1.0 - p))) + error_term(p)

    disconnected = False
    if n0 <= cfg.lower_trivial_threshold(alpha):
        lower = 0.0
    else:
        left = level_set(g_left, EPS, p_hat, half, CI_TOL)
        lower = left.inf
        disconnected |= not left.connected
    if n0 <= cfg.upper_trivial_threshold(alpha):
        upper = 0.5
    else:
        right = level_set(g_right, p_hat, 0.5, half, CI_TOL)
        upper = right.sup
        disconnected |= not right.connected
    return Interval(lower, upper, Method.BE, alpha, disconnected=disconnected)


def relaxed_lambda_t(n0, alpha, cfg=None):
    """``lambda = 1 - 4 sqrt(2) C' / (sqrt(n0) alpha)``; positive exactly above the threshold."""
    cfg = cfg or BEConfigTargeted()
    return 1.0 - 4.0 * math.sqrt(2.0) * cfg.C_prime / (math.sqrt(n0) * alpha)


def be_relaxed_interval_t(s, a, cfg=None):
    """Closed-form relaxed B-E interval; needs ``n0 > 32 C'^2 / alpha^2``."""
    level = as_level(a)
    cfg = cfg or BEConfigTargeted()
    n0, N, alpha = s.n0, s.N, level.alpha
    threshold = cfg.upper_trivial_threshold(alpha)
    if not n0 > threshold:
        raise PreconditionError(
            f"relaxed targeted B-E interval needs n0 > {threshold:.6g}, got n0={n0}",
            required=threshold)
    lam = relaxed_lambda_t(n0, alpha, cfg)
    z = -normal_quantile(0.5 * lam * alpha)
    z2 = z * z
    b = 2.0 * N * n0 - z2 * n0
    disc = 4.0 * z2 * N * n0 * (N - n0) + z2 * z2 * n0 * n0
    upper = (b + math.sqrt(disc)) / (2.0 * N * N)
    # the roots multiply to (n0^2 - z^2 n0) / N^2
    lower = (n0 * n0 - z2 * n0) / (N * N * upper)
    hi = min(upper, 1.0)
    lo = max(lower, 0.0)
    return Interval(lo, hi, Method.BE_RELAXED, alpha, clamped=(lo != lower or hi != upper))
