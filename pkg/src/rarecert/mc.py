"""Deterministic Monte Carlo coverage experiments.

Every replication draws from its own SplitMix64 stream whose seed is a
hash of (root seed, regime, setting, replication index).  Replications
therefore do not depend on each other or on execution order, and the
reduction uses integer cover counts plus correctly rounded sums
(``math.fsum``), so results are bit-identical for any number of workers.
"""

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ci_standard as cs
from . import ci_targeted as ct
from .errors import AssumptionError, DomainError, UnsupportedRegimeError
from .intervals import Interval, Method, as_level
from .specfun import log_binomial_coefficient, reg_inc_beta

__all__ = [
    "MASK64", "mix64", "derive_seed", "SplitMix64", "sample_binomial", "sample_targeted",
    "ExperimentGrid", "CoverageReport", "coverage", "average_bounds", "n_for_setting",
    "BINOMIAL_MEAN_BUDGET", "ALL_METHODS",
]

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_POW_53_INV = 2.0**-53

BINOMIAL_MEAN_BUDGET = 1_000_000

# targeted draws at or above this n0 use the vectorized uniform generator
_VECTOR_N0 = 256
_VECTOR_BLOCK = 1 << 16

ALL_METHODS = tuple(Method)


def mix64(z):
    """SplitMix64 finalizer (a bijective 64-bit avalanche)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(root, *words):
    """Fold integers into ``root`` with :func:`mix64`; distinct word lists give unrelated seeds."""
    h = mix64(root & MASK64)
    for w in words:
        h = mix64(h ^ mix64(w & MASK64))
    return h


class SplitMix64:
    """Counter-based SplitMix64 stream."""

    def __init__(self, seed):
        self.state = seed & MASK64

    def next_u64(self):
        self.state = (self.state + _GOLDEN) & MASK64
        return mix64(self.state)

    def uniform(self):
        """Uniform draw on the open interval (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * _TWO_POW_53_INV

    def uniforms(self, count):
        """``count`` uniforms as a numpy array; same values as ``count`` calls to :meth:`uniform`."""
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(_GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z ^= z >> np.uint64(31)
        self.state = (self.state + count * _GOLDEN) & MASK64
        return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_POW_53_INV


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


def _check_p(p):
    if math.isnan(p) or not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")


def sample_binomial(n, p, stream):
    """Binomial(n, p) draw by sequential CDF inversion from k = 0."""
    _check_p(p)
    if n < 0:
        raise DomainError(f"n must be non-negative, got {n!r}")
    if p == 0.0 or n == 0:
        return 0
    if p == 1.0:
        return n
    mean = n * p
    if mean > BINOMIAL_MEAN_BUDGET:
        raise UnsupportedRegimeError(
            f"binomial inversion supports n*p <= {BINOMIAL_MEAN_BUDGET}, got {mean:.6g}")
    u = stream.uniform()
    ratio = p / (1.0 - p)
    log_p0 = n * math.log1p(-p)
    if log_p0 > -700.0:
        k, pmf = 0, math.exp(log_p0)
        cdf = pmf
    else:
        # P(0) underflows; start the walk a safe distance below the mean
        k = max(0, int(mean - 10.0 * math.sqrt(mean)))
        pmf = math.exp(log_binomial_coefficient(n, k) + k * math.log(p) + (n - k) * math.log1p(-p))
        below = reg_inc_beta(1.0 - p, n - k + 1, k) if k > 0 else 0.0
        while k > 0 and u <= below:
            # the start overshot this draw (probability below 1e-20); walk back
            pmf *= k / ((n - k + 1) * ratio)
            k -= 1
            below -= pmf
        cdf = below + pmf
    while u > cdf and k < n:
        pmf *= (n - k) * ratio / (k + 1)
        k += 1
        if pmf == 0.0 and k > mean:
            # the CDF has saturated in floating point
            break
        cdf += pmf
    return k


def sample_targeted(n0, p, stream):
    """Number of trials needed for ``n0`` successes: a sum of ``n0`` geometric draws."""
    _check_p(p)
    if n0 < 1:
        raise DomainError(f"n0 must be positive, got {n0!r}")
    if p == 0.0:
        raise DomainError("targeted stopping never ends when p = 0")
    if p == 1.0:
        return n0
    scale = 1.0 / math.log1p(-p)
    if n0 < _VECTOR_N0:
        return sum(math.ceil(math.log(stream.uniform()) * scale) for _ in range(n0))
    total, left = 0, n0
    while left:
        m = min(left, _VECTOR_BLOCK)
        total += int(np.ceil(np.log(stream.uniforms(m)) * scale).sum(dtype=np.int64))
        left -= m
    return total


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

_REGIME_TAG = {"standard": 1, "targeted": 2}


def n_for_setting(p, setting):
    """Sample size ``n = setting / p`` for a standard-regime setting given as ``n p``."""
    return max(1, round(setting / p))


@dataclass(frozen=True)
class ExperimentGrid:
    """Experiment description.

    ``settings`` are ``n p`` multiples in the standard regime (``n = setting / p``)
    and target counts ``n0`` in the targeted regime.
    """

    regime: str
    p: float
    settings: tuple
    reps: int = 1000
    alpha: float = 0.05
    seed: int = 42

    def __post_init__(self):
        if self.regime not in _REGIME_TAG:
            raise DomainError(f"regime must be 'standard' or 'targeted', got {self.regime!r}")
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p!r}")
        object.__setattr__(self, "settings", tuple(self.settings))
        if not self.settings or any(s <= 0 for s in self.settings):
            raise DomainError("settings must be a non-empty list of positive numbers")
        if self.regime == "targeted" and any(int(s) != s for s in self.settings):
            raise DomainError("targeted settings are n0 values and must be integers")
        if self.reps < 1:
            raise DomainError(f"reps must be at least 1, got {self.reps}")
        as_level(self.alpha)


@dataclass(frozen=True)
class CoverageReport:
    method: Method
    regime: str
    p: float
    setting: float
    reps: int
    alpha: float
    covered: int = 0
    avg_lower: float = math.nan
    avg_upper: float = math.nan
    status: str = "ok"
    reason: str = ""

    @property
    def coverage(self):
        return self.covered / self.reps if self.status == "ok" else math.nan

    @property
    def se(self):
        c = self.coverage
        return math.sqrt(c * (1.0 - c) / self.reps)

    @property
    def applicable(self):
        return self.status == "ok"


_STANDARD = {
    Method.CLT: cs.clt_interval,
    Method.WILSON: cs.wilson_interval,
    Method.EXACT: cs.exact_interval,
    Method.CHERNOFF: cs.chernoff_interval,
    Method.BE: cs.be_region_interval,
    Method.BE_RELAXED: cs.be_relaxed_upper,
}

_TARGETED = {
    Method.CLT: ct.clt_interval_t,
    Method.WILSON: ct.wilson_interval_t,
    Method.EXACT: ct.exact_interval_t,
    Method.CHERNOFF: ct.chernoff_interval_t,
    Method.BE: ct.be_region_interval_t,
    Method.BE_RELAXED: ct.be_relaxed_interval_t,
}


def _not_applicable(grid, setting, method, level, be_c):
    """Reason a method cannot run at this setting, or None."""
    if method is not Method.BE_RELAXED:
        return None
    if grid.regime == "standard":
        n = n_for_setting(grid.p, setting)
        n0 = cs.BEConfig.default(level.alpha, be_c).n0
        if not n > n0:
            return f"requires n > {n0:.6g}, got n={n}"
    else:
        threshold = ct.BEConfigTargeted(16 * be_c).upper_trivial_threshold(level.alpha)
        if not setting > threshold:
            return f"requires n0 > {threshold:.6g}, got n0={int(setting)}"
    return None


@dataclass
class _SettingRun:
    grid: ExperimentGrid
    setting: float
    methods: tuple
    level: object
    be_c: float
    cache: dict = field(default_factory=dict)

    def summary(self, rep):
        grid = self.grid
        stream = SplitMix64(derive_seed(grid.seed, _REGIME_TAG[grid.regime],
                                        _float_bits(grid.p), _float_bits(self.setting), rep))
        if grid.regime == "standard":
            n = n_for_setting(grid.p, self.setting)
            return cs.TrialSummary(n, sample_binomial(n, grid.p, stream))
        n0 = int(self.setting)
        return ct.StoppedSummary(n0, sample_targeted(n0, grid.p, stream))

    def interval(self, method, summary):
        key = (method, summary)
        hit = self.cache.get(key)
        if hit is None:
            hit = self.cache[key] = self._compute(method, summary)
        return hit

    def _compute(self, method, s):
        alpha = self.level.alpha
        try:
            if self.grid.regime == "standard":
                if method is Method.BE:
                    return cs.be_region_interval(s, self.level, cs.BEConfig.default(alpha, self.be_c))
                if method is Method.BE_RELAXED:
                    return cs.be_relaxed_upper(s, self.level, cs.BEConfig.default(alpha, self.be_c))
                return _STANDARD[method](s, self.level)
            if method in (Method.BE, Method.BE_RELAXED):
                return _TARGETED[method](s, self.level, ct.BEConfigTargeted(16 * self.be_c))
            return _TARGETED[method](s, self.level)
        except AssumptionError:
            # p_hat >= 1/2 lies outside the B-E construction; report the vacuous interval
            return Interval(0.0, 1.0, method, alpha)

    def run_reps(self, reps):
        out = []
        for r in reps:
            s = self.summary(r)
            out.append(tuple(self.interval(m, s) for m in self.methods))
        return out


def _float_bits(x):
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def _chunks(reps, workers):
    size = max(1, -(-reps // (4 * workers)))
    return [range(i, min(i + size, reps)) for i in range(0, reps, size)]


def coverage(grid, methods=ALL_METHODS, workers=1, be_c=cs.BE_C):
    """Coverage and average endpoints for each (setting, method) pair.

    Reports come out setting-major in the order of ``grid.settings`` and
    ``methods``.  A method whose sample-size precondition fails at a
    setting yields a report with ``status == "not-applicable"``.
    """
    level = as_level(grid.alpha)
    methods = tuple(Method.from_name(m) if isinstance(m, str) else m for m in methods)
    reports = []
    for setting in grid.settings:
        skip = {m: _not_applicable(grid, setting, m, level, be_c) for m in methods}
        active = tuple(m for m in methods if skip[m] is None)
        run = _SettingRun(grid, setting, active, level, be_c)
        try:
            if workers > 1 and grid.reps > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    parts = list(pool.map(run.run_reps, _chunks(grid.reps, workers)))
                rows = [row for part in parts for row in part]
            else:
                rows = run.run_reps(range(grid.reps))
        except (ArithmeticError, ValueError) as exc:
            raise type(exc)(f"{grid.regime} setting {setting} at p={grid.p}: {exc}") from exc
        for m in methods:
            if skip[m] is not None:
                reports.append(CoverageReport(m, grid.regime, grid.p, setting, grid.reps,
                                              level.alpha, status="not-applicable",
                                              reason=skip[m]))
                continue
            j = active.index(m)
            ivs = [row[j] for row in rows]
            reports.append(CoverageReport(
                m, grid.regime, grid.p, setting, grid.reps, level.alpha,
                covered=sum(1 for iv in ivs if iv.covers(grid.p)),
                avg_lower=math.fsum(iv.lower for iv in ivs) / grid.reps,
                avg_upper=math.fsum(iv.upper for iv in ivs) / grid.reps,
            ))
    return reports


def average_bounds(grid, methods=ALL_METHODS, workers=1, be_c=cs.BE_C):
    """Tidy rows ``(method, setting, avg_lower, avg_upper)`` for applicable methods."""
    return [
        {"method": r.method.value, "setting": r.setting,
         "avg_lower": r.avg_lower, "avg_upper": r.avg_upper}
        for r in coverage(grid, methods, workers, be_c) if r.applicable
    ]
