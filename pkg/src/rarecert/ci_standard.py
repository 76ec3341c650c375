"""Confidence intervals for ``p`` from ``k`` successes in a fixed number ``n`` of trials."""

import math
from dataclasses import dataclass

from .errors import AssumptionError, DomainError, PreconditionError
from .intervals import Interval, Method, as_level
from .rootfind import Tolerance, level_set
from .specfun import log_normal_cdf, normal_cdf, normal_quantile, reg_inc_beta_inv

__all__ = [
    "BE_C", "TrialSummary", "BEConfig", "RelaxedDetails",
    "clt_interval", "wilson_interval", "exact_interval", "chernoff_interval",
    "chernoff_lower_raw", "chernoff_upper_raw", "be_region_interval", "be_relaxed_upper", "be_relaxed_details",
    "be_error_bound", "be_trivial_threshold", "relaxed_threshold",
]

BE_C = 0.4748

# bisection tolerance for interval endpoints; rare-event bounds sit near 1e-6
CI_TOL = Tolerance(abs_x=1e-18, rel_x=1e-13, max_iter=400)

# left edge used in place of p = 0, where the B-E criterion is singular
_P_FLOOR = 1e-300


@dataclass(frozen=True)
class TrialSummary:
    n: int
    k: int

    def __post_init__(self):
        for name in ("n", "k"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise DomainError(f"{name} must be an int, got {v!r}")
        if self.n < 1 or not 0 <= self.k <= self.n:
            raise DomainError(f"need n >= 1 and 0 <= k <= n, got n={self.n}, k={self.k}")

    @property
    def p_hat(self):
        return self.k / self.n


# ---------------------------------------------------------------------------
# normal-approximation intervals (also used by the targeted forms)
# ---------------------------------------------------------------------------


def clt_bounds(n, k, z):
    """Raw (unclamped) ``p_hat -/+ z sqrt(p_hat (1 - p_hat) / n)``."""
    p_hat = k / n
    h = z * math.sqrt(k * (n - k) / n**3)
    return p_hat - h, p_hat + h


def wilson_bounds(n, k, z):
    """Roots of ``(p_hat - p)^2 = z^2 p (1 - p) / n``."""
    z2 = z * z
    p_hat = k / n
    denom = 1.0 + z2 / n
    upper = (p_hat + z2 / (2 * n) + z * math.sqrt(k * (n - k) / n**3 + z2 / (4 * n * n))) / denom
    upper = min(upper, 1.0) if k < n else 1.0
    # product of the roots is p_hat^2 / denom; avoids cancellation for small p_hat
    lower = p_hat * p_hat / (denom * upper) if k > 0 else 0.0
    return min(lower, upper), upper


def _clt(method, n, k, level):
    raw_lo, raw_hi = clt_bounds(n, k, level.z)
    lo, hi = max(raw_lo, 0.0), min(raw_hi, 1.0)
    return Interval(lo, hi, method, level.alpha, clamped=(lo != raw_lo or hi != raw_hi))


def clt_interval(s, a):
    """CLT interval, clamped to ``[0, 1]``."""
    return _clt(Method.CLT, s.n, s.k, as_level(a))


def wilson_interval(s, a):
    level = as_level(a)
    lo, hi = wilson_bounds(s.n, s.k, level.z)
    return Interval(lo, hi, Method.WILSON, level.alpha)


def exact_interval(s, a):
    """Clopper-Pearson interval by incomplete-beta inversion."""
    level = as_level(a)
    n, k, half = s.n, s.k, 0.5 * level.alpha
    # P(Bin(n, p) <= k) = 1 - I_p(k + 1, n - k)
    upper = 1.0 if k == n else reg_inc_beta_inv(1.0 - half, k + 1, n - k)
    # P(Bin(n, p) >= k) = I_p(k, n - k + 1)
    lower = 0.0 if k == 0 else reg_inc_beta_inv(half, k, n - k + 1)
    return Interval(lower, upper, Method.EXACT, level.alpha)


def chernoff_upper_raw(s, a):
    """Upper Chernoff expression before clamping to 1."""
    L, n, p_hat = as_level(a).log_two_over_alpha, s.n, s.p_hat
    return p_hat + L / n + math.sqrt(L * L / (n * n) + 2 * p_hat * L / n)


def chernoff_lower_raw(s, a):
    """Lower Chernoff expression before clamping; negative iff ``p_hat < ln(2/alpha)/n``."""
    level = as_level(a)
    n, p_hat = s.n, s.p_hat
    a2 = level.log_two_over_alpha / (2 * n)
    # p_hat + a - sqrt(a^2 + 4 a p_hat), rationalized so that p_hat = 0 and p_hat = 2a give 0
    return p_hat * (p_hat - 2 * a2) / (p_hat + a2 + math.sqrt(a2 * a2 + 4 * a2 * p_hat))


def chernoff_interval(s, a):
    level = as_level(a)
    upper = chernoff_upper_raw(s, level)
    raw_lower = chernoff_lower_raw(s, level)
    lower = raw_lower if raw_lower > 0.0 else 0.0
    hi = min(upper, 1.0)
    return Interval(lower, hi, Method.CHERNOFF, level.alpha,
                    clamped=(raw_lower < 0.0 or hi != upper))


# ---------------------------------------------------------------------------
# Berry-Esseen intervals
# ---------------------------------------------------------------------------


def be_error_bound(n, p, C=BE_C):
    """Normal-approximation error budget ``C / sqrt(n p (1 - p))``."""
    if math.isnan(p) or not 0.0 < p < 1.0:
        raise DomainError(f"be_error_bound requires 0 < p < 1, got {p!r}")
    if n < 1:
        raise DomainError(f"n must be positive, got {n!r}")
    return C / math.sqrt(n * p * (1.0 - p))


def be_trivial_threshold(alpha, C=BE_C):
    """``(4C / alpha)^2``: at or below this ``n`` the B-E upper bound is 1/2."""
    return (4.0 * C / alpha) ** 2


@dataclass(frozen=True)
class BEConfig:
    """Constants of the relaxed B-E bound.

    ``z_star`` stands for ``z_{(1-u) alpha/2}``.  Since ``1 - u`` is far below
    machine epsilon for the default choice, it is carried as
    ``log_one_minus_u`` and ``u`` itself may round to 1.0.
    """

    C: float
    u: float
    z_star: float
    log_one_minus_u: float
    alpha: float

    @classmethod
    def default(cls, alpha, C=BE_C):
        """``z* = 2 sqrt(2) C / alpha`` and ``u = 1 - 2 Phi(-z*) / alpha``."""
        alpha = as_level(alpha).alpha
        z_star = 2.0 * math.sqrt(2.0) * C / alpha
        log_omu = log_normal_cdf(-z_star) + math.log(2.0 / alpha)
        return cls(C, -math.expm1(log_omu), z_star, log_omu, alpha)

    @classmethod
    def from_u(cls, alpha, u, C=BE_C):
        alpha = as_level(alpha).alpha
        if not 0.0 < u < 1.0:
            raise DomainError(f"u must lie in (0, 1), got {u!r}")
        z_star = -normal_quantile(0.5 * (1.0 - u) * alpha)
        return cls(C, u, z_star, math.log1p(-u), alpha)

    def __post_init__(self):
        if not self.C > 0.0:
            raise DomainError(f"C must be positive, got {self.C!r}")
        if not 4.0 * self.C**2 / (self.u * self.alpha) ** 2 < self.z_star**2:
            raise DomainError("side condition 4C^2/(u alpha)^2 < z*^2 fails")

    @property
    def one_minus_u(self):
        return math.exp(self.log_one_minus_u)

    @property
    def n0(self):
        """Sample size the relaxed bound needs to exceed."""
        C, u, a, z2 = self.C, self.u, self.alpha, self.z_star**2
        return max((4.0 * C / (u * a)) ** 2, 12.0 * z2 * C * C / (z2 * (u * a) ** 2 - 4.0 * C * C))


def relaxed_threshold(alpha, C=BE_C):
    return BEConfig.default(alpha, C).n0


def _be_config(cfg, level):
    if cfg is None:
        return BEConfig.default(level.alpha)
    if cfg.alpha != level.alpha:
        raise DomainError(f"BEConfig built for alpha={cfg.alpha}, used with alpha={level.alpha}")
    return cfg


def be_region_interval(s, a, cfg=None):
    """Convex hull ``[0, sup]`` of the B-E confidence region.

    The region keeps every ``p`` in ``[p_hat, 1/2)`` for which the normal
    tail plus the B-E error budget still reaches ``alpha/2``.  No useful
    lower bound exists, so the lower endpoint is always 0.
    """
    level = as_level(a)
    C = BE_C if cfg is None else cfg.C
    n, k = s.n, s.k
    if 2 * k >= n:
        raise AssumptionError(f"B-E interval assumes p_hat < 1/2, got k={k}, n={n}")
    half = 0.5 * level.alpha
    if n <= be_trivial_threshold(level.alpha, C):
        return Interval(0.0, 0.5, Method.BE, level.alpha)
    p_hat = s.p_hat

    def g(p):
        v = p * (1.0 - p)
        return normal_cdf((p_hat - p) / math.sqrt(v / n)) + C / math.sqrt(n * v)

    region = level_set(g, max(p_hat, _P_FLOOR), 0.5, half, CI_TOL)
    return Interval(0.0, region.sup, Method.BE, level.alpha,
                    disconnected=not region.connected)


@dataclass(frozen=True)
class RelaxedDetails:
    """Intermediate quantities of the relaxed B-E bound.

    ``one_minus_lambda`` is ``1 - lambda = 2 C~ / (sqrt(n) alpha)``; ``upper``
    is the returned branch U2 and ``discarded`` the branch U1 it must dominate.
    """

    C_tilde: float
    one_minus_lambda: float
    z: float
    upper: float
    discarded: float


def be_relaxed_details(s, a, cfg=None):
    level = as_level(a)
    cfg = _be_config(cfg, level)
    n, k, alpha = s.n, s.k, level.alpha
    if not n > cfg.n0:
        raise PreconditionError(
            f"relaxed B-E bound needs n > {cfg.n0:.6g}, got n={n}", required=cfg.n0)
    cap = cfg.u * math.sqrt(n) * alpha / 2.0
    if 0 < k < n:
        C_tilde = min(cfg.C / math.sqrt(k * (n - k) / n**2), cap)
    else:
        C_tilde = cap
    if C_tilde == cap:
        z = cfg.z_star
    else:
        # lambda alpha / 2 = alpha/2 - C~/sqrt(n) exceeds (1-u) alpha/2 on this branch
        t = 0.5 * alpha - C_tilde / math.sqrt(n)
        z = min(-normal_quantile(t), cfg.z_star) if t > 0.0 else cfg.z_star
    _, upper = wilson_bounds(n, k, z)
    one_minus_lambda = 2.0 * C_tilde / (math.sqrt(n) * alpha)
    x = 16.0 * cfg.C**2 / (n * one_minus_lambda**2 * alpha**2)
    discarded = x / (2.0 * (1.0 + math.sqrt(1.0 - x)))
    return RelaxedDetails(C_tilde, one_minus_lambda, z, upper, discarded)


def be_relaxed_upper(s, a, cfg=None):
    """Closed-form relaxed B-E upper bound; the lower bound is 0."""
    level = as_level(a)
    d = be_relaxed_details(s, level, cfg)
    return Interval(0.0, d.upper, Method.BE_RELAXED, level.alpha)
