"""Real-valued driving terms of the chordal equation over capacity time."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

from .errors import InvalidMap

__all__ = ["DrivingFunction"]


@dataclass(frozen=True)
class DrivingFunction:
    """Piecewise driving term lambda(t) on [0, horizon].

    ``knots`` are (t, lambda) pairs with strictly increasing t starting at 0;
    ``mode`` selects piecewise-constant or piecewise-linear evaluation.  In
    constant mode each knot value holds on [t_k, t_{k+1}); in linear mode
    values interpolate between knots.  Past the last knot the final value is
    held up to the horizon.
    """

    knots: Tuple[Tuple[float, float], ...]
    mode: str = "const"
    horizon: float = None

    def __post_init__(self):
        if not self.knots:
            raise InvalidMap("driving function needs at least one knot")
        if self.mode not in ("const", "linear"):
            raise InvalidMap("mode must be 'const' or 'linear'")
        ts = [t for t, _ in self.knots]
        if ts[0] != 0.0:
            raise InvalidMap("first knot must be at t = 0")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvalidMap("knot times must be strictly increasing")
        for t, lam in self.knots:
            if not (math.isfinite(t) and math.isfinite(lam)):
                raise InvalidMap("knots must be finite")
        horizon = self.horizon if self.horizon is not None else ts[-1]
        # horizon 0 is the degenerate empty driving (single knot at t = 0),
        # produced by extracting a bare root point
        if horizon < 0.0 or (horizon == 0.0 and len(self.knots) > 1):
            raise InvalidMap("horizon must be positive")
        if horizon < ts[-1]:
            raise InvalidMap("horizon lies before the last knot")
        object.__setattr__(self, "horizon", float(horizon))

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value: float, horizon: float) -> "DrivingFunction":
        return cls(((0.0, float(value)),), "const", float(horizon))

    @classmethod
    def from_samples(cls, ts, lams, mode: str = "linear", horizon: float = None):
        knots = tuple((float(t), float(v)) for t, v in zip(ts, lams))
        return cls(knots, mode, horizon)

    @classmethod
    def from_function(
        cls, fn: Callable[[float], float], horizon: float, n: int = 256,
        mode: str = "linear",
    ) -> "DrivingFunction":
        ts = [horizon * j / (n - 1) for j in range(n)]
        return cls(tuple((t, float(fn(t))) for t in ts), mode, horizon)

    # -- evaluation --------------------------------------------------------

    def value(self, t: float) -> float:
        if t < 0.0 or t > self.horizon + 1e-12:
            raise InvalidMap(f"t = {t} outside [0, {self.horizon}]")
        ts = [k[0] for k in self.knots]
        # rightmost knot with t_k <= t
        i = bisect.bisect_right(ts, t) - 1
        i = max(i, 0)
        if self.mode == "const" or i == len(self.knots) - 1:
            return self.knots[i][1]
        t0, v0 = self.knots[i]
        t1, v1 = self.knots[i + 1]
        if t <= t0:
            return v0
        w = (t - t0) / (t1 - t0)
        return (1.0 - w) * v0 + w * v1

    def segments(self, s: float, t: float, n_sub: int = 64) -> List[Tuple[float, float, float]]:
        """Partition [s, t] into steps (t0, t1, lambda value).

        Constant mode cuts only at knots (the elementary step is exact for
        constant driving, so substeps buy nothing).  Linear mode splits each
        knot overlap into ``n_sub`` pieces sampled at midpoints.
        """
        if not (0.0 <= s <= t <= self.horizon + 1e-12):
            raise InvalidMap(f"need 0 <= s <= t <= horizon, got [{s}, {t}]")
        if t <= s:
            return []
        cuts = [s]
        for tk, _ in self.knots:
            if s < tk < t:
                cuts.append(tk)
        cuts.append(t)
        out: List[Tuple[float, float, float]] = []
        for a, b in zip(cuts, cuts[1:]):
            if self.mode == "const":
                out.append((a, b, self.value(a)))
            else:
                h = (b - a) / n_sub
                for j in range(n_sub):
                    lo = a + j * h
                    hi = a + (j + 1) * h
                    out.append((lo, hi, self.value(0.5 * (lo + hi))))
        return out
