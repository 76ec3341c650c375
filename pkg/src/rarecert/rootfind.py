"""Bracketed bisection and level-set scans on an interval."""

import math
from dataclasses import dataclass

from .errors import BracketError, ConvergenceError

__all__ = ["Tolerance", "Bracket", "LevelSet", "bisect", "level_set", "level_set_sup",
           "level_set_inf", "DEFAULT_GRID"]

DEFAULT_GRID = 4096


@dataclass(frozen=True)
class Tolerance:
    abs_x: float = 1e-15
    rel_x: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not (self.abs_x > 0 and self.rel_x > 0 and self.max_iter > 0):
            raise ValueError(f"tolerance fields must be positive: {self}")

    def width(self, x):
        return max(self.abs_x, self.rel_x * abs(x))


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BracketError(f"bracket requires lo < hi, got [{self.lo!r}, {self.hi!r}]")
        if math.isnan(self.f_lo) or math.isnan(self.f_hi):
            raise BracketError("function is NaN at a bracket endpoint")

    @classmethod
    def around(cls, f, lo, hi):
        """Evaluate ``f`` at both ends and build the bracket."""
        return cls(lo, hi, f(lo), f(hi))

    @property
    def has_sign_change(self):
        return (self.f_lo <= 0.0 <= self.f_hi) or (self.f_hi <= 0.0 <= self.f_lo)


def bisect(f, bracket, tol=Tolerance()):
    """Root of ``f`` inside ``bracket`` by plain bisection.

    The returned point is the midpoint of a final bracket no wider than
    ``tol.width(x)``.  ``f`` is evaluated at most ``tol.max_iter`` times
    beyond the two endpoint values already stored in the bracket.
    """
    if not bracket.has_sign_change:
        raise BracketError(
            f"no sign change on [{bracket.lo!r}, {bracket.hi!r}]: "
            f"f(lo)={bracket.f_lo!r}, f(hi)={bracket.f_hi!r}")
    lo, hi, f_lo = bracket.lo, bracket.hi, bracket.f_lo
    if bracket.f_lo == 0.0:
        return lo
    if bracket.f_hi == 0.0:
        return hi
    lo_negative = f_lo < 0.0
    for _ in range(tol.max_iter):
        mid = lo + 0.5 * (hi - lo)
        if hi - lo <= tol.width(mid) or mid <= lo or mid >= hi:
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0.0) == lo_negative:
            lo = mid
        else:
            hi = mid
    mid = lo + 0.5 * (hi - lo)
    if hi - lo <= tol.width(mid):
        return mid
    raise ConvergenceError("bisection exceeded max_iter", lo=lo, hi=hi, max_iter=tol.max_iter)


@dataclass(frozen=True)
class LevelSet:
    """Hull of ``{p in [lo, hi]: g(p) >= threshold}`` as seen by a grid scan.

    ``connected`` is False when the scan found more than one run of
    satisfying grid points, i.e. the set itself looks disconnected.
    """

    inf: float
    sup: float
    empty: bool
    connected: bool


def _refine(g, inside, outside, threshold, tol):
    # bisection keeping g(inside) >= threshold > g(outside); returns the outside end
    for _ in range(tol.max_iter):
        if abs(outside - inside) <= tol.width(outside):
            return outside
        mid = inside + 0.5 * (outside - inside)
        if mid == inside or mid == outside:
            return outside
        if g(mid) >= threshold:
            inside = mid
        else:
            outside = mid
    return outside


def level_set(g, lo, hi, threshold, tol=Tolerance(), n_grid=DEFAULT_GRID):
    """Scan ``g`` on ``n_grid + 1`` equally spaced points, then refine both ends.

    Ties (``g == threshold``) count as inside.  Refinement returns the outer
    end of each final sub-bracket so the reported hull never shrinks the set.
    """
    if not lo < hi:
        raise ValueError(f"level_set requires lo < hi, got [{lo!r}, {hi!r}]")
    if n_grid < 1:
        raise ValueError("n_grid must be positive")
    step = (hi - lo) / n_grid
    points = [lo + i * step for i in range(n_grid)] + [hi]
    inside = [g(p) >= threshold for p in points]
    if not any(inside):
        return LevelSet(lo, lo, empty=True, connected=True)
    first = inside.index(True)
    last = n_grid - inside[::-1].index(True)
    runs = sum(1 for i in range(first, last + 1) if inside[i] and (i == first or not inside[i - 1]))
    sup = hi if last == n_grid else _refine(g, points[last], points[last + 1], threshold, tol)
    inf = lo if first == 0 else _refine(g, points[first], points[first - 1], threshold, tol)
    return LevelSet(inf, sup, empty=False, connected=runs == 1)


def level_set_sup(g, lo, hi, threshold, tol=Tolerance(), n_grid=DEFAULT_GRID):
    """``sup{p in [lo, hi]: g(p) >= threshold}``; ``lo`` when the set is empty."""
    return level_set(g, lo, hi, threshold, tol, n_grid).sup


def level_set_inf(g, lo, hi, threshold, tol=Tolerance(), n_grid=DEFAULT_GRID):
    """``inf{p in [lo, hi]: g(p) >= threshold}``; ``hi`` when the set is empty."""
    result = level_set(g, lo, hi, threshold, tol, n_grid)
    return hi if result.empty else result.inf
