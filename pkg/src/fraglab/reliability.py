"""Reliability of homogeneous supply networks.

Every firm needs m distinct inputs and has n potential suppliers per input;
each supply link works independently with probability x.  The fraction r of
functional firms satisfies the self-consistency equation

    r = (1 - (1 - x*r)**n)**m

and the selected outcome is the largest solution, obtained by iterating the
map downward from r = 1.  For m >= 2 the largest solution jumps from 0 to
r_crit > 0 as x crosses a threshold x_crit (a first-order transition); the
inverse branch x = chi(r) is smooth on [r_crit, 1] and its minimizer locates
the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

# Fixed-point iteration numerics (shared across modules).
FP_TOL = 1e-12
FP_MAX_ITER = 200_000
FP_ZERO_FLOOR = 1e-9


@dataclass(frozen=True)
class Technology:
    """Production technology: m required inputs, n potential suppliers each."""

    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"technology requires m >= 1 and n >= 1, got {self}")


@dataclass(frozen=True)
class CriticalPoint:
    x_crit: float
    r_crit: float


def _one_minus_root(r: float, m: int) -> float:
    """1 - r**(1/m), evaluated in log space so it stays accurate near r = 1."""
    if r <= 0.0:
        return 1.0
    if r >= 1.0:
        return 0.0
    return -math.expm1(math.log(r) / m)


def reliability_map(tech: Technology, x: float, r: float) -> float:
    """One application of r -> (1 - (1 - x*r)**n)**m."""
    return (1.0 - (1.0 - x * r) ** tech.n) ** tech.m


def chi(tech: Technology, r: float) -> float:
    """Relationship strength consistent with reliability r.

    chi(r) = (1 - (1 - r**(1/m))**(1/n)) / r.  May exceed 1, in which case no
    feasible strength supports r.  Rejects r = 0 (the map is degenerate there).
    """
    if r <= 0.0:
        raise ValueError("chi is undefined at r = 0")
    if r > 1.0:
        raise ValueError(f"reliability must lie in (0, 1], got {r}")
    return (1.0 - _one_minus_root(r, tech.m) ** (1.0 / tech.n)) / r


def simple_threshold(n: int) -> float:
    """Continuous-transition threshold 1/n for simple (m = 1) production.

    With a single required input, the supply tree survives iff the branching
    rate n*x exceeds 1; the transition at x = 1/n is second order.
    """
    if n < 1:
        raise ValueError("n >= 1 required")
    return 1.0 / n


@lru_cache(maxsize=None)
def _critical_point_cached(m: int, n: int) -> CriticalPoint:
    tech = Technology(m, n)
    if n == 1:
        # chi is decreasing, minimized at r = 1: the jump sits at x = 1.
        return CriticalPoint(1.0, 1.0)
    # Quasiconvexity makes the minimizer of chi the unique root of its
    # stationarity condition.  Substituting s = r**(1/m) reduces chi'(r) = 0
    # to  s*(1-s)**(1/n-1) = m*n*(1 - (1-s)**(1/n)),  which changes sign
    # exactly once on (0, 1): bisection pins it to machine precision, far
    # beyond what golden-section on the flat quadratic minimum can resolve.
    def stat(s: float) -> float:
        return s * (1.0 - s) ** (1.0 / n - 1.0) - m * n * (1.0 - (1.0 - s) ** (1.0 / n))

    lo, hi = 1e-12, 1.0 - 1e-12
    # stat < 0 near 0 (for m >= 2) and -> +inf near 1
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if stat(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    r_crit = (0.5 * (lo + hi)) ** m
    return CriticalPoint(chi(tech, r_crit), r_crit)


def critical_point(tech: Technology) -> CriticalPoint:
    """Locate the discontinuity (x_crit, r_crit) of the reliability function.

    Requires m >= 2; the m = 1 transition is continuous and handled by
    simple_threshold instead.  For n = 1 the jump sits at x_crit = 1.
    """
    if tech.m < 2:
        raise ValueError("critical_point requires m >= 2; use simple_threshold for m = 1")
    return _critical_point_cached(tech.m, tech.n)


def _largest_fixed_point(step, tol: float = FP_TOL, max_iter: int = FP_MAX_ITER,
                         floor: float = FP_ZERO_FLOOR) -> float:
    """Iterate a monotone map downward from r = 1; 0 once the floor is crossed.

    The step-size stopping rule leaves an O(tol / (1 - rate)) gap to the true
    limit, which blows up near the tangency; a local bisection on
    step(r) - r afterwards tightens the limit to machine precision whenever
    the fixed point is a simple root.
    """
    r = 1.0
    converged = False
    for _ in range(max_iter):
        rn = step(r)
        if rn < floor:
            return 0.0
        if abs(rn - r) < tol:
            r = rn
            converged = True
            break
        r = rn
    if not converged and r < floor:
        return 0.0
    # Descent keeps step(r) - r <= 0; bracket the root from below and bisect.
    hi = r
    delta = max(10.0 * tol, 1e-12 * hi)
    lo = None
    while delta <= 1e-2:
        cand = hi - delta
        if cand <= floor:
            break
        if step(cand) - cand > 0.0:
            lo = cand
            break
        delta *= 4.0
    if lo is None:
        return r  # tangent (or no nearby sign change): keep the iterate
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if step(mid) - mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16 * max(1.0, hi):
            break
    return hi


def rho(tech: Technology, x: float) -> float:
    """Largest fixed point of the reliability map at strength x."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"strength must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    m, n = tech.m, tech.n
    return _largest_fixed_point(lambda r: (1.0 - (1.0 - x * r) ** n) ** m)


def rho_truncated(tech: Technology, x: float, T: int,
                  tiers: Sequence[tuple[int, int]] | None = None) -> float:
    """Success probability at the root of a T-tier supply tree.

    rho_1 = 1 (bottom tier needs no inputs) and
    rho_t = (1 - (1 - rho_{t-1}*x)**n_t)**m_t.  `tiers` optionally overrides
    (m_t, n_t) per tier for t = 2..T (irregular trees); entries beyond the
    list fall back to `tech`.
    """
    if T < 1:
        raise ValueError("T >= 1 required")
    r = 1.0
    for t in range(2, T + 1):
        if tiers is not None and t - 2 < len(tiers):
            m_t, n_t = tiers[t - 2]
        else:
            m_t, n_t = tech.m, tech.n
        r = (1.0 - (1.0 - r * x) ** n_t) ** m_t
    return r


def rho_tau(tech: Technology, x: float, tau: float) -> float:
    """Reliability when each firm needs no inputs with probability tau.

    Largest fixed point of r -> tau + (1 - tau)*(1 - (1 - x*r)**n)**m, the
    randomly truncated variant; tau = 0 recovers rho, tau = 1 gives 1.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    if tau == 0.0:
        return rho(tech, x)
    m, n = tech.m, tech.n
    return _largest_fixed_point(
        lambda r: tau + (1.0 - tau) * (1.0 - (1.0 - x * r) ** n) ** m,
        floor=min(FP_ZERO_FLOOR, tau / 2.0),
    )


def chi_tau(tech: Technology, tau: float, r: float) -> float:
    """Inverse of rho_tau in x for r in (tau, 1]; smooth for tau > 0."""
    if not tau < r <= 1.0:
        raise ValueError("need tau < r <= 1")
    inner = (r - tau) / (1.0 - tau)
    return (1.0 - _one_minus_root(inner, tech.m) ** (1.0 / tech.n)) / r


def market_sourcing_prob(tech: Technology, x: float) -> float:
    """Success probability (1 - (1-x)**n)**m under market-based sourcing.

    Links are extended only to functional suppliers, so there is no fixed
    point to solve: the outcome is smooth in x.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    return (1.0 - (1.0 - x) ** tech.n) ** tech.m
