"""Continuous noise distributions used as trade-off curve generators.

A distribution enters the engine only through its CDF and quantile function,
so callers can plug in their own noise families without touching the rest of
the package. The survival function is optional; supplying one avoids the
``1 - cdf(x)`` cancellation in deep-tail probes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from scipy.special import ndtr, ndtri


@dataclass(frozen=True)
class CdfPair:
    """A zero-mean, unit-scale noise distribution given by CDF and quantile.

    cdf and quantile must be exact inverses on (0, 1). ``sf`` is the survival
    function 1 - cdf; when omitted it is derived from the CDF, which is fine
    everywhere except the far upper tail.
    """

    name: str
    cdf: Callable[[float], float]
    quantile: Callable[[float], float]
    sf: Optional[Callable[[float], float]] = None

    def survival(self, x: float) -> float:
        if self.sf is not None:
            return self.sf(x)
        return 1.0 - self.cdf(x)


def _laplace_cdf(x: float) -> float:
    if x < 0.0:
        return 0.5 * math.exp(x)
    return 1.0 - 0.5 * math.exp(-x)


def _laplace_quantile(u: float) -> float:
    if not 0.0 < u < 1.0:
        if u == 0.0:
            return -math.inf
        if u == 1.0:
            return math.inf
        raise ValueError(f"quantile argument must be in [0, 1], got {u}")
    if u < 0.5:
        return math.log(2.0 * u)
    return -math.log(2.0 * (1.0 - u))


def _laplace_sf(x: float) -> float:
    if x < 0.0:
        return 1.0 - 0.5 * math.exp(x)
    return 0.5 * math.exp(-x)


def _normal_quantile(u: float) -> float:
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"quantile argument must be in [0, 1], got {u}")
    return float(ndtri(u))


STD_LAPLACE = CdfPair(
    name="laplace",
    cdf=_laplace_cdf,
    quantile=_laplace_quantile,
    sf=_laplace_sf,
)

STD_NORMAL = CdfPair(
    name="normal",
    cdf=lambda x: float(ndtr(x)),
    quantile=_normal_quantile,
    sf=lambda x: float(ndtr(-x)),
)
