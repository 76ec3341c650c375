"""Value types shared by the standard and targeted-stopping intervals."""

import enum
import math
from dataclasses import dataclass
from functools import cached_property

from .errors import DomainError
from .specfun import normal_quantile

__all__ = ["Method", "Level", "Interval", "as_level"]


class Method(str, enum.Enum):
    CLT = "CLT"
    WILSON = "Wilson"
    EXACT = "Exact"
    CHERNOFF = "Chernoff"
    BE = "BE"
    BE_RELAXED = "BERelaxed"

    @property
    def cli_name(self):
        return _CLI_NAMES[self]

    @classmethod
    def from_name(cls, name):
        """Accept either the display label (``"BERelaxed"``) or the CLI name (``"be-relaxed"``)."""
        key = name.strip().lower()
        for m in cls:
            if key in (m.value.lower(), m.cli_name):
                return m
        raise ValueError(f"unknown method {name!r}; choose from "
                         + ", ".join(m.cli_name for m in cls))


_CLI_NAMES = {
    Method.CLT: "clt",
    Method.WILSON: "wilson",
    Method.EXACT: "exact",
    Method.CHERNOFF: "chernoff",
    Method.BE: "be",
    Method.BE_RELAXED: "be-relaxed",
}


@dataclass(frozen=True)
class Level:
    """Confidence level ``1 - alpha``."""

    alpha: float

    def __post_init__(self):
        if not (isinstance(self.alpha, (int, float)) and 0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")

    @cached_property
    def z(self):
        """Two-sided critical value ``z_{1 - alpha/2}``."""
        return -normal_quantile(0.5 * self.alpha)

    @property
    def log_two_over_alpha(self):
        return math.log(2.0 / self.alpha)


def as_level(a):
    return a if isinstance(a, Level) else Level(float(a))


@dataclass(frozen=True)
class Interval:
    """A confidence interval ``[lower, upper]`` for ``p``.

    ``clamped`` records that an endpoint was pulled back into ``[0, 1]``.
    ``disconnected`` is set when the underlying confidence region was seen
    to have gaps and the interval reported is its convex hull.
    """

    lower: float
    upper: float
    method: Method
    alpha: float
    clamped: bool = False
    disconnected: bool = False

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("interval endpoints must not be NaN")
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower!r} exceeds upper {self.upper!r}")

    def covers(self, p):
        return self.lower <= p <= self.upper

    @property
    def width(self):
        return self.upper - self.lower
