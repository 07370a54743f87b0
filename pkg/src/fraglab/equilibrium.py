"""Symmetric investment and free-entry equilibria of a homogeneous sector.

Entry mass f and symmetric strength x interact through two conditions: an
optimal-investment equation (marginal gross profit of strengthening links
equals marginal cost) and an entry condition (zero profit for the marginal
entrant, unless the precipice rations entry first).  Solved in reliability
space: with x = chi(r) the investment condition becomes

    kappa * g(r*f) * B(r) = c'(chi(r) - x_bar),   B(r) = m*n*r**(2-1/m)*(1-r**(1/m))**(1-1/n)

whose left side falls and right side rises on [r_crit, 1], so bisection finds
the unique candidate.  Entry is the fixed point of the map H (mass of firms
that break even), which is decreasing wherever investment is positive; when H
jumps over the diagonal at the largest entry mass still supporting x_crit,
the equilibrium is rationed at the precipice: a critical equilibrium with
strictly positive profits.  Productivity kappa orders the regimes:
Unproductive below kappa_lower, Critical up to kappa_upper, Noncritical past
it (the kappa_upper tie itself is classified Critical: strength is critical
AND the marginal firm just breaks even).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from fraglab.planner import CostModel
from fraglab.reliability import Technology, chi, critical_point, rho, _one_minus_root

_RTOL = 1e-10      # bisection tolerance in r and f
_DEV_GRID = 10_000  # deviation grid for the global best-response check


class Regime(Enum):
    UNPRODUCTIVE = "Unproductive"
    CRITICAL = "Critical"
    NONCRITICAL = "Noncritical"


class Fragility(Enum):
    FRAGILE = "Fragile"
    ROBUST = "Robust"


class ShockMode(Enum):
    FIXED_INVESTMENT = "FixedInvestment"
    REOPTIMIZED_INVESTMENT = "ReoptimizedInvestment"


@dataclass(frozen=True)
class GrossProfitModel:
    """Gross profit G(q) = kappa * g(q), q = entry mass times reliability.

    family "linear": g(q) = a * (1 - b*q)
    family "ces":    g(q) = ces_gamma / ((sigma - 1) * products * q), the
                     markup profit of the CES microfoundation with
                     ces_gamma = (1-iota)**2 / (lambda*(2-iota)); unbounded
                     as q -> 0, so kappa_lower degenerates to 0 with it.
    """

    kappa: float
    family: str = "linear"
    a: float = 1.0
    b: float = 1.0
    sigma: float = 2.0
    lam: float = 0.5
    iota: float = 0.5
    products: int = 1

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.family == "linear":
            if self.a <= 0 or self.b <= 0:
                raise ValueError("linear profit requires a > 0 and b > 0")
        elif self.family == "ces":
            if not (self.sigma > 1 and 0 < self.iota < 1 and self.lam > 0):
                raise ValueError("ces profit requires sigma > 1, iota in (0,1), lambda > 0")
        else:
            raise ValueError(f"unknown profit family {self.family!r}")

    def g(self, q: float) -> float:
        if self.family == "linear":
            return self.a * (1.0 - self.b * q)
        if q <= 0.0:
            return math.inf
        ces_gamma = (1.0 - self.iota) ** 2 / (self.lam * (2.0 - self.iota))
        return ces_gamma / ((self.sigma - 1.0) * self.products * q)

    def g_inverse(self, v: float) -> float:
        """Solve g(q) = v for q >= 0; linear in closed form, else bisection."""
        if self.family == "linear":
            return (1.0 - v / self.a) / self.b
        if v <= 0.0:
            raise ValueError("ces profit is positive everywhere")
        ces_gamma = (1.0 - self.iota) ** 2 / (self.lam * (2.0 - self.iota))
        return ces_gamma / ((self.sigma - 1.0) * self.products * v)

    def __call__(self, q: float) -> float:
        return self.kappa * self.g(q)


@dataclass(frozen=True)
class EntryModel:
    """Entry cost Phi(f) = slope * f + offset.

    A nonzero offset violates the maintained assumption Phi(0) = 0; it can be
    constructed so validate_primitives can flag it, but the solvers assume it
    is zero.
    """

    slope: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.slope <= 0:
            raise ValueError("entry slope must be positive")

    def __call__(self, f: float) -> float:
        return self.slope * f + self.offset

    def inverse(self, v: float) -> float:
        return (v - self.offset) / self.slope


@dataclass(frozen=True)
class MarketPrimitives:
    tech: Technology
    cost: CostModel
    profit: GrossProfitModel
    entry: EntryModel
    x_bar: float = 0.0

    def with_kappa(self, kappa: float) -> "MarketPrimitives":
        prof = self.profit
        return MarketPrimitives(
            self.tech, self.cost,
            GrossProfitModel(kappa, prof.family, prof.a, prof.b,
                             prof.sigma, prof.lam, prof.iota, prof.products),
            self.entry, self.x_bar)

    def with_x_bar(self, x_bar: float) -> "MarketPrimitives":
        return MarketPrimitives(self.tech, self.cost, self.profit, self.entry, x_bar)


@dataclass(frozen=True)
class InvestmentEquilibrium:
    f_bar: float
    x_star: float
    r: float


@dataclass(frozen=True)
class EntryEquilibrium:
    f_star: float
    x_star: float
    r: float
    regime: Regime
    gross_profit: float
    marginal_net_profit: float

    @property
    def output(self) -> float:
        return self.f_star * self.r


@dataclass(frozen=True)
class InvestmentDiagnostics:
    x1: float
    x2: float
    unique_interior_max: bool


# --- building blocks ------------------------------------------------------


def functionality_prob(x_if: float, r: float, tech: Technology) -> float:
    """P(x_if; x) = (1 - (1 - x_if*r)**n)**m, own strength against supplier
    reliability r."""
    u = x_if * r
    if not 0.0 <= u <= 1.0:
        raise ValueError("x_if * r must lie in [0, 1]")
    return (1.0 - (1.0 - u) ** tech.n) ** tech.m


def _dP_dxif(x_if: float, r: float, tech: Technology) -> float:
    """d/dx_if of functionality_prob."""
    m, n = tech.m, tech.n
    u = 1.0 - x_if * r
    return r * n * u ** (n - 1) * m * (1.0 - u ** n) ** (m - 1)


def marginal_benefit(x_if: float, x: float, f_bar: float,
                     prim: MarketPrimitives) -> float:
    """Marginal gross profit of raising own strength, others at strength x."""
    r = rho(prim.tech, x)
    if r == 0.0:
        return 0.0
    return prim.profit(r * f_bar) * _dP_dxif(x_if, r, prim.tech)


def _bfactor(r: float, tech: Technology) -> float:
    """B(r) = m*n*r**(2-1/m)*(1-r**(1/m))**(1-1/n); equals dP/dx_if on the
    physical-consistency curve x = chi(r)."""
    m, n = tech.m, tech.n
    return m * n * r ** (2.0 - 1.0 / m) * _one_minus_root(r, m) ** (1.0 - 1.0 / n)


def _critical_or_raise(prim: MarketPrimitives):
    cp = critical_point(prim.tech)
    if prim.x_bar >= cp.x_crit:
        raise ValueError(
            f"baseline strength {prim.x_bar} is at or above x_crit = "
            f"{cp.x_crit:.6f}: the market is productive for free and the "
            f"equilibrium machinery does not apply")
    return cp


def investment_equilibrium(f_bar: float, prim: MarketPrimitives,
                           verify: bool = True) -> InvestmentEquilibrium:
    """Symmetric investment equilibrium at entry mass f_bar.

    Bisection on [r_crit, 1] for kappa*g(r*f_bar)*B(r) = c'(chi(r) - x_bar):
    the left side is decreasing there, the right increasing, so the root is
    unique; no root means the only equilibrium is zero investment.  The
    candidate is then verified as a global best response on a deviation grid
    that includes the zero-investment point.
    """
    if not 0.0 <= f_bar <= 1.0:
        raise ValueError("entry mass must lie in [0, 1]")
    tech = prim.tech
    cp = _critical_or_raise(prim)

    def gap(r: float) -> float:
        return (prim.profit(r * f_bar) * _bfactor(r, tech)
                - prim.cost.derivative(chi(tech, r) - prim.x_bar))

    if gap(cp.r_crit) < 0.0:
        return InvestmentEquilibrium(f_bar, prim.x_bar, 0.0)
    lo, hi = cp.r_crit, 1.0 - 1e-15
    if gap(hi) > 0.0:  # marginal benefit still above cost at r = 1
        r_star = hi
    else:
        while hi - lo > _RTOL * 1e-3:
            mid = 0.5 * (lo + hi)
            if gap(mid) >= 0.0:
                lo = mid
            else:
                hi = mid
        r_star = 0.5 * (lo + hi)
    x_star = chi(tech, r_star)
    eq = InvestmentEquilibrium(f_bar, x_star, r_star)
    if verify and not _is_global_best_response(eq, prim):
        raise RuntimeError(
            f"investment candidate x={x_star:.6f} fails the global "
            f"best-response grid check (Assumption on unique interior maxima "
            f"may not hold for these primitives)")
    return eq


def _profit_of_deviation(x_if: np.ndarray, r: float, f_bar: float,
                         prim: MarketPrimitives) -> np.ndarray:
    m, n = prim.tech.m, prim.tech.n
    G = prim.profit(r * f_bar)
    P = (1.0 - (1.0 - x_if * r) ** n) ** m
    y = np.maximum(x_if - prim.x_bar, 0.0)
    c = np.array([prim.cost(float(v)) for v in y])
    return G * P - c


def _is_global_best_response(eq: InvestmentEquilibrium, prim: MarketPrimitives,
                             npts: int = _DEV_GRID) -> bool:
    if eq.r == 0.0:
        return True
    xs = np.linspace(prim.x_bar, min(1.0, 1.0 / eq.r), npts)
    profits = _profit_of_deviation(xs, eq.r, eq.f_bar, prim)
    own = _profit_of_deviation(np.array([eq.x_star]), eq.r, eq.f_bar, prim)[0]
    return own >= profits.max() - 1e-9 * max(1.0, abs(own))


def investment_diagnostics(x: float, prim: MarketPrimitives) -> InvestmentDiagnostics:
    """Shape check of Q(x_if) = dP/dx_if on [0, 1/rho(x)].

    Finds the maximum x2 (closed form) and the first inflection x1 (bracketed
    sign change of the second difference), and verifies the profit function
    has a unique interior local maximum on the deviation grid.
    """
    tech = prim.tech
    r = rho(tech, x)
    if r == 0.0:
        raise ValueError("x below the critical strength: reliability is zero")
    m, n = tech.m, tech.n
    hi = 1.0 / r
    # maximum of Q: (1 - x2*r)**n = (n-1)/(m*n-1)
    u_star = ((n - 1.0) / (m * n - 1.0)) ** (1.0 / n) if n > 1 else 0.0
    x2 = (1.0 - u_star) / r
    # first inflection: second-difference sign change on a dense grid
    xs = np.linspace(0.0, hi, 100_000)
    q = r * n * (1.0 - xs * r) ** (n - 1) * m * (1.0 - (1.0 - xs * r) ** n) ** (m - 1)
    d2 = np.diff(q, 2)
    sign_flip = np.nonzero((d2[:-1] > 0) & (d2[1:] <= 0))[0]
    x1 = xs[sign_flip[0] + 1] if len(sign_flip) else 0.0
    # Assumption check: unique interior local max of G*P - c on [x_bar, 1],
    # probed at both ends of the crowding range (G only scales Q vertically).
    dev = np.linspace(prim.x_bar, min(1.0, hi), 100_000)
    unique = True
    for f_bar in (1e-9, 1.0):
        prof = _profit_of_deviation(dev, r, f_bar, prim)
        interior = (prof[1:-1] > prof[:-2]) & (prof[1:-1] >= prof[2:])
        unique = unique and int(interior.sum()) <= 1
    return InvestmentDiagnostics(x1=float(x1), x2=float(x2), unique_interior_max=unique)


# --- entry ----------------------------------------------------------------


def f_crit(prim: MarketPrimitives) -> float | None:
    """Largest entry mass at which firms still choose the critical strength.

    Inverts kappa*g(r_crit*f)*B(r_crit) = c'(x_crit - x_bar) for f; None when
    even f = 0 cannot sustain x_crit (kappa below kappa_lower), clamped to 1.
    """
    cp = _critical_or_raise(prim)
    target = prim.cost.derivative(cp.x_crit - prim.x_bar) / (
        prim.profit.kappa * _bfactor(cp.r_crit, prim.tech))
    if target > prim.profit.g(0.0):
        return None
    f = prim.profit.g_inverse(target) / cp.r_crit
    return min(f, 1.0)


def entry_map_H(f_bar: float, prim: MarketPrimitives) -> float:
    """Mass of firms that break even when entry is f_bar and investment is
    the equilibrium response x*(f_bar)."""
    eq = investment_equilibrium(f_bar, prim, verify=False)
    if eq.r == 0.0:
        return 0.0
    surplus = (prim.profit(f_bar * eq.r) * eq.r
               - prim.cost(eq.x_star - prim.x_bar))
    return min(prim.entry.inverse(max(surplus, 0.0)), 1.0)


def entry_equilibrium(prim: MarketPrimitives) -> EntryEquilibrium:
    """Unique positive symmetric equilibrium, or the unproductive outcome.

    Searches for the fixed point of H below f_crit (noncritical, zero
    marginal profit); if H still clears the diagonal at f_crit the precipice
    rations entry there (critical, positive marginal profit); otherwise no
    entry is sustainable.
    """
    fc = f_crit(prim)
    unproductive = EntryEquilibrium(0.0, prim.x_bar, 0.0, Regime.UNPRODUCTIVE, 0.0, 0.0)
    if fc is None or fc <= 0.0:
        return unproductive
    if entry_map_H(0.0, prim) <= 0.0:
        return unproductive
    # Evaluate H just left of f_crit: at f_crit itself the investment
    # equation sits exactly on its boundary and float noise can spuriously
    # report collapse.
    fc_eval = fc * (1.0 - 1e-9)
    if entry_map_H(fc_eval, prim) >= fc_eval:
        cp = critical_point(prim.tech)
        gross = prim.profit(fc * cp.r_crit)
        net = gross * cp.r_crit - prim.cost(cp.x_crit - prim.x_bar) - prim.entry(fc)
        return EntryEquilibrium(fc, cp.x_crit, cp.r_crit, Regime.CRITICAL, gross, net)
    lo, hi = 0.0, fc_eval
    while hi - lo > _RTOL:
        mid = 0.5 * (lo + hi)
        if entry_map_H(mid, prim) > mid:
            lo = mid
        else:
            hi = mid
    f_star = 0.5 * (lo + hi)
    eq = investment_equilibrium(f_star, prim)
    gross = prim.profit(f_star * eq.r)
    net = gross * eq.r - prim.cost(eq.x_star - prim.x_bar) - prim.entry(f_star)
    return EntryEquilibrium(f_star, eq.x_star, eq.r, Regime.NONCRITICAL, gross, net)


def kappa_lower(prim: MarketPrimitives) -> float:
    """Productivity below which no entry is sustainable.

    c'(x_crit - x_bar) / (g(0)*m*n*r_crit*(1-x_crit*r_crit)**(n-1)
                          *(1-(1-x_crit*r_crit)**n)**(m-1)).
    """
    cp = _critical_or_raise(prim)
    m, n = prim.tech.m, prim.tech.n
    u = 1.0 - cp.x_crit * cp.r_crit
    denom = (prim.profit.g(0.0) * m * n * cp.r_crit
             * u ** (n - 1) * (1.0 - u ** n) ** (m - 1))
    if not math.isfinite(denom):
        return 0.0  # unbounded profit at zero crowding (ces family)
    return prim.cost.derivative(cp.x_crit - prim.x_bar) / denom


def kappa_upper(prim: MarketPrimitives) -> float | None:
    """Productivity at which the critical regime hands over to free entry.

    Eliminates the two-equation system at (x_crit, f_crit): the zero-profit
    condition pins f_crit = Phi^{-1}(c'(x_crit-x_bar)*r_crit/D - c(x_crit-x_bar))
    with D the marginal functionality gain, then the investment condition
    yields kappa.  None when the critical gross surplus cannot cover entry.
    """
    cp = _critical_or_raise(prim)
    m, n = prim.tech.m, prim.tech.n
    u = 1.0 - cp.x_crit * cp.r_crit
    D = m * n * cp.r_crit * u ** (n - 1) * (1.0 - u ** n) ** (m - 1)
    cpr = prim.cost.derivative(cp.x_crit - prim.x_bar)
    surplus = cpr * cp.r_crit / D - prim.cost(cp.x_crit - prim.x_bar)
    if surplus <= 0.0:
        return None
    fc = prim.entry.inverse(surplus)
    gval = prim.profit.g(fc * cp.r_crit)
    if gval <= 0.0:
        return None
    return cpr / (gval * D)


# --- shocks and fragility --------------------------------------------------


def shock_response(eq: EntryEquilibrium, prim: MarketPrimitives, eps: float,
                   mode: ShockMode) -> float:
    """Output f*r after the baseline strength drops by eps, entry fixed."""
    if eps < 0:
        raise ValueError("shock size must be nonnegative")
    if eps == 0.0 or eq.regime is Regime.UNPRODUCTIVE:
        return eq.output
    if mode is ShockMode.FIXED_INVESTMENT:
        return eq.f_star * rho(prim.tech, max(eq.x_star - eps, 0.0))
    shocked = prim.with_x_bar(prim.x_bar - eps)
    new = investment_equilibrium(eq.f_star, shocked, verify=False)
    return eq.f_star * new.r


def classify_fragility(eq: EntryEquilibrium, prim: MarketPrimitives,
                       mode: ShockMode, eps: float = 1e-9) -> Fragility:
    """Does an arbitrarily small drop in baseline strength kill all output?"""
    if eq.regime is Regime.UNPRODUCTIVE:
        raise ValueError("fragility is defined for productive equilibria only")
    if mode is ShockMode.FIXED_INVESTMENT:
        cp = critical_point(prim.tech)
        fragile = eq.x_star <= cp.x_crit + 1e-9
        return Fragility.FRAGILE if fragile else Fragility.ROBUST
    out = shock_response(eq, prim, eps, ShockMode.REOPTIMIZED_INVESTMENT)
    return Fragility.FRAGILE if out == 0.0 else Fragility.ROBUST


# --- validation ------------------------------------------------------------


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_primitives(prim: MarketPrimitives) -> ValidationReport:
    """Check the maintained assumptions numerically; list any violations."""
    rep = ValidationReport()
    grid = np.linspace(0.0, 1.0, 201)
    # entry cost: Phi(0)=0, strictly increasing
    if abs(prim.entry(0.0)) > 1e-12:
        rep.violations.append("entry cost at zero mass must be 0 (Phi(0) != 0)")
    phi = [prim.entry(f) for f in grid]
    if not all(b > a for a, b in zip(phi, phi[1:])):
        rep.violations.append("entry cost must be strictly increasing")
    # gross profit decreasing where used
    gv = [prim.profit.g(q) for q in np.linspace(1e-6, 1.0, 200)]
    if not all(b < a for a, b in zip(gv, gv[1:])):
        rep.violations.append("gross profit g must be strictly decreasing")
    # baseline strength below the precipice
    cp = critical_point(prim.tech)
    if not prim.x_bar < cp.x_crit:
        rep.violations.append(
            f"baseline strength {prim.x_bar} must lie below x_crit = {cp.x_crit:.6f}")
        return rep  # downstream checks need a valid baseline
    # cost sanity
    if abs(prim.cost(0.0)) > 1e-12:
        rep.violations.append("investment cost at zero must be 0")
    # no-corner-entry condition: Phi(1) > G(rho(x*(1)))*rho(x*(1)) - c(...)
    eq1 = investment_equilibrium(1.0, prim, verify=False)
    if eq1.r == 0.0:
        rep.notes.append("full entry yields zero investment; corner condition trivial")
        surplus = 0.0
    else:
        rep.notes.append("full entry supports positive investment")
        surplus = prim.profit(eq1.r) * eq1.r - prim.cost(eq1.x_star - prim.x_bar)
    if not prim.entry(1.0) > surplus:
        rep.violations.append("highest-cost firm must lose money under full entry")
    # unique interior maximum of the profit function at x_crit and at 1
    for x_chk in (cp.x_crit, 1.0):
        try:
            diag = investment_diagnostics(x_chk, prim)
        except ValueError:
            continue
        if not diag.unique_interior_max:
            rep.violations.append(
                f"profit function has multiple interior maxima at x = {x_chk:.4f}")
    return rep


# --- vectorized batch path (sector ensembles) -------------------------------


def entry_equilibria_batch(prim: MarketPrimitives, kappas: np.ndarray
                           ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Entry equilibria for many productivity levels at once.

    Same equations as entry_equilibrium, restricted to the linear profit and
    entry families and power costs so the bisections vectorize over sectors.
    Returns (regime codes 0/1/2 for unproductive/critical/noncritical,
    f_star, x_star, r).
    """
    if prim.profit.family != "linear" or prim.cost.family != "power":
        raise ValueError("batch path requires linear profit and power cost families")
    kappas = np.asarray(kappas, dtype=float)
    tech, cost = prim.tech, prim.cost
    m, n = tech.m, tech.n
    cp = critical_point(tech)
    a, b = prim.profit.a, prim.profit.b
    # both thresholds are independent of prim.profit.kappa
    kap_low = kappa_lower(prim)
    kap_up = kappa_upper(prim)
    u = 1.0 - cp.x_crit * cp.r_crit
    D = m * n * cp.r_crit * u ** (n - 1) * (1.0 - u ** n) ** (m - 1)
    cpr = cost.derivative(cp.x_crit - prim.x_bar)

    regime = np.zeros(len(kappas), dtype=np.int8)
    f_star = np.zeros_like(kappas)
    x_star = np.full_like(kappas, prim.x_bar)
    r_star = np.zeros_like(kappas)

    productive = kappas > kap_low + 1e-15
    if kap_up is None:
        crit = productive
    else:
        crit = productive & (kappas <= kap_up)
    noncrit = productive & ~crit

    if crit.any():
        kc = kappas[crit]
        fc = (1.0 - cpr / (kc * a * D)) / (b * cp.r_crit)
        fc = np.clip(fc, 0.0, 1.0)
        regime[crit] = 1
        f_star[crit] = fc
        x_star[crit] = cp.x_crit
        r_star[crit] = cp.r_crit

    if noncrit.any():
        kc = kappas[noncrit]
        fc = np.clip((1.0 - cpr / (kc * a * D)) / (b * cp.r_crit), 0.0, 1.0)

        def x_of_f(f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            """Vector bisection of the investment condition given entry f."""
            lo = np.full_like(f, cp.r_crit)
            hi = np.full_like(f, 1.0 - 1e-15)
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                bf = m * n * mid ** (2.0 - 1.0 / m) * (-np.expm1(np.log(mid) / m)) ** (1.0 - 1.0 / n)
                x_mid = (1.0 - (-np.expm1(np.log(mid) / m)) ** (1.0 / n)) / mid
                lhs = kc * a * (1.0 - b * mid * f) * bf
                rhs = cost.scale * cost.exponent * np.maximum(
                    x_mid - prim.x_bar, 0.0) ** (cost.exponent - 1.0)
                take = lhs >= rhs
                lo = np.where(take, mid, lo)
                hi = np.where(take, hi, mid)
            r = 0.5 * (lo + hi)
            x = (1.0 - (-np.expm1(np.log(r) / m)) ** (1.0 / n)) / r
            return x, r

        def H_minus_f(f: np.ndarray) -> np.ndarray:
            x, r = x_of_f(f)
            surplus = kc * a * (1.0 - b * f * r) * r - cost.scale * np.maximum(
                x - prim.x_bar, 0.0) ** cost.exponent
            return np.minimum(np.maximum(surplus, 0.0) / prim.entry.slope, 1.0) - f

        lo = np.zeros_like(kc)
        hi = fc * (1.0 - 1e-9)
        for _ in range(45):
            mid = 0.5 * (lo + hi)
            take = H_minus_f(mid) > 0.0
            lo = np.where(take, mid, lo)
            hi = np.where(take, hi, mid)
        fs = 0.5 * (lo + hi)
        xs, rs = x_of_f(fs)
        regime[noncrit] = 2
        f_star[noncrit] = fs
        x_star[noncrit] = xs
        r_star[noncrit] = rs

    return regime, f_star, x_star, r_star
