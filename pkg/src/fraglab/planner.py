"""Social planner's choice of relationship strength.

The planner maximizes kappa * rho(x) - c(x) over x in [0, 1].  Because rho
jumps at x_crit, the search is done in reliability space: on [r_crit, 1] the
inverse branch x = chi(r) is smooth, so the objective kappa*r - c(chi(r)) is
easy to maximize there, and the only other candidate is x = 0 (value 0).
Below some productivity kappa_crit the planner stays out entirely; above it
the optimum lands strictly past the precipice.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from fraglab.reliability import Technology, chi, critical_point


@dataclass(frozen=True)
class CostModel:
    """Investment cost family.

    family "power":  c(y) = scale * y**exponent           (exponent >= 2)
    family "inada":  c(y) = scale * y**2 / (1 - y/y_max)  (c' -> inf at y_max)

    Both satisfy c(0) = 0, c increasing and convex, c'(0) = 0.  The power
    family has bounded c' at 1 and therefore violates the upper Inada
    condition; construction warns once so boundary optima get checked.
    """

    family: str = "power"
    scale: float = 1.0
    exponent: float = 2.0
    y_max: float = 1.0

    def __post_init__(self):
        if self.family not in ("power", "inada"):
            raise ValueError(f"unknown cost family {self.family!r}")
        if self.scale <= 0:
            raise ValueError("cost scale must be positive")
        if self.family == "power" and self.exponent < 2:
            raise ValueError("power cost requires exponent >= 2")
        if self.family == "inada" and not 0 < self.y_max <= 1:
            raise ValueError("inada cost requires y_max in (0, 1]")
        if self.family == "power":
            warnings.warn(
                "power cost has bounded marginal cost at y = 1 (upper Inada "
                "condition fails); boundary solutions are checked explicitly",
                stacklevel=2,
            )

    def __call__(self, y: float) -> float:
        if y < 0:
            raise ValueError("investment must be nonnegative")
        if self.family == "power":
            return self.scale * y ** self.exponent
        if y >= self.y_max:
            return math.inf
        return self.scale * y * y / (1.0 - y / self.y_max)

    def derivative(self, y: float) -> float:
        if y < 0:
            raise ValueError("investment must be nonnegative")
        if self.family == "power":
            return self.scale * self.exponent * y ** (self.exponent - 1.0)
        if y >= self.y_max:
            return math.inf
        u = 1.0 - y / self.y_max
        return self.scale * (2.0 * y / u + y * y / (u * u * self.y_max))


@dataclass(frozen=True)
class PlannerSolution:
    x_sp: float
    value: float


def _interior_best(tech: Technology, cost: CostModel, kappa: float,
                   x_bar: float) -> tuple[float, float]:
    """Maximize kappa*r - c(chi(r) - x_bar) over r in [r_crit, 1]; (r*, value)."""
    cp = critical_point(tech)

    def value(r: float) -> float:
        y = chi(tech, r) - x_bar
        if y < 0:
            y = 0.0
        return kappa * r - cost(y)

    # smooth 1-D problem: coarse grid bracket, then golden-section refinement
    npts = 10_000
    best_i, best_v = 0, -math.inf
    for i in range(npts + 1):
        r = cp.r_crit + (1.0 - cp.r_crit) * i / npts
        v = value(r)
        if v > best_v:
            best_i, best_v = i, v
    lo = cp.r_crit + (1.0 - cp.r_crit) * max(best_i - 1, 0) / npts
    hi = cp.r_crit + (1.0 - cp.r_crit) * min(best_i + 1, npts) / npts
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = value(c), value(d)
    while b - a > 1e-13:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = value(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = value(d)
    r_star = 0.5 * (a + b)
    return r_star, value(r_star)


def planner_solve(tech: Technology, cost: CostModel, kappa: float,
                  x_bar: float = 0.0) -> PlannerSolution:
    """Solve max_x kappa*rho(x) - c(x - x_bar) against the opt-out value 0."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if tech.m < 2 or tech.n < 2:
        raise ValueError("planner requires m >= 2 and n >= 2")
    if kappa == 0.0:
        return PlannerSolution(0.0, 0.0)
    r_star, v_star = _interior_best(tech, cost, kappa, x_bar)
    if v_star <= 0.0:
        return PlannerSolution(0.0, 0.0)
    return PlannerSolution(chi(tech, r_star), v_star)


def kappa_crit_planner(tech: Technology, cost: CostModel,
                       x_bar: float = 0.0, tol: float = 1e-8) -> float:
    """Productivity threshold where investing first beats staying out.

    Bisection on kappa for the sign change of the best interior value; below
    the threshold the planner picks x = 0, above it x jumps past x_crit.
    """
    lo, hi = 0.0, 1.0
    while _interior_best(tech, cost, kappa=hi, x_bar=x_bar)[1] <= 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("no finite planner threshold found")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _interior_best(tech, cost, kappa=mid, x_bar=x_bar)[1] > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
