"""Multi-sector economies coupled through aggregate output.

Each sector is a homogeneous market with its own baseline productivity
kappa0; sectors interact only through the linkage kappa_s = kappa0_s *
(Y / Y1)**theta, where Y is mean sector output and Y1 its pre-shock level
(theta = 0 decouples them).  An infinitesimal shock fells every sector whose
current kappa sits in the fragile band (kappa_lower, kappa_upper]; the lost
output drags the linkage down, which can push surviving sectors into the
band, so failures cascade until a step passes with no new casualties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fraglab.equilibrium import (
    MarketPrimitives,
    entry_equilibria_batch,
    entry_equilibrium,
    kappa_lower,
    kappa_upper,
)
from fraglab.reliability import chi


@dataclass(frozen=True)
class Sector:
    index: int
    kappa0: float
    kappa: float
    output: float
    failed: bool


@dataclass(frozen=True)
class SectorEnsemble:
    """Sectors sharing cost/profit/entry shapes, differing in productivity."""

    base: MarketPrimitives
    kappas: np.ndarray
    theta: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kappas", np.asarray(self.kappas, dtype=float))
        if (self.kappas <= 0).any():
            raise ValueError("all sector productivities must be positive")

    @property
    def n_sectors(self) -> int:
        return len(self.kappas)


def draw_ensemble(base: MarketPrimitives, n_sectors: int, lo: float, hi: float,
                  theta: float, seed: int) -> SectorEnsemble:
    """Sectors with kappa ~ Uniform(lo, hi), reproducible via Philox."""
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    rng = np.random.Generator(np.random.Philox(key=seed))
    kappas = lo + (hi - lo) * rng.random(n_sectors)
    return SectorEnsemble(base, kappas, theta, seed)


def _solve_outputs(base: MarketPrimitives, kappas: np.ndarray) -> np.ndarray:
    """Equilibrium output f*r per sector (0 where unproductive)."""
    try:
        _, f_star, _, r = entry_equilibria_batch(base, kappas)
        return f_star * r
    except ValueError:
        out = np.empty(len(kappas))
        for k, kap in enumerate(kappas):
            eq = entry_equilibrium(base.with_kappa(float(kap)))
            out[k] = eq.output
        return out


def aggregate_output(ensemble: "SectorEnsemble | MarketPrimitives",
                     kappas: np.ndarray | None = None,
                     failed: np.ndarray | None = None) -> float:
    """Mean over sectors of equilibrium output, failed sectors contributing 0.

    Accepts a SectorEnsemble directly, or base primitives plus a kappa array.
    """
    if isinstance(ensemble, SectorEnsemble):
        base, kappas = ensemble.base, ensemble.kappas
    else:
        base = ensemble
        if kappas is None:
            raise ValueError("kappas required when passing bare primitives")
    kappas = np.asarray(kappas, dtype=float)
    out = _solve_outputs(base, kappas)
    if failed is not None:
        out = np.where(failed, 0.0, out)
    return float(out.mean())


@dataclass(frozen=True)
class Census:
    fragile: int
    robust: int
    unproductive: int


def _kappa_lower_simple(prim: MarketPrimitives) -> float:
    """Productivity floor for positive investment when m = 1 (no precipice).

    Minimizes c'(chi(r) - x_bar) / (g(0) * n * r * (1-r)**(1-1/n)) over r;
    below it even an empty market cannot sustain investment.
    """
    n = prim.tech.n
    g0 = prim.profit.g(0.0)
    if not math.isfinite(g0):
        return 0.0

    def needed(r: float) -> float:
        b = n * r * (1.0 - r) ** (1.0 - 1.0 / n)
        return prim.cost.derivative(chi(prim.tech, r) - prim.x_bar) / (g0 * b)

    rs = np.linspace(1e-6, 1.0 - 1e-6, 4096)
    return float(min(needed(float(r)) for r in rs))


def fragility_census(ens: SectorEnsemble) -> Census:
    """Counts of fragile / robust / unproductive sectors at baseline kappas.

    Simple sectors (m = 1) have a continuous transition and are never
    fragile: they are productive (robust) above the m = 1 investment floor
    and unproductive below it.
    """
    base = ens.base
    if base.tech.m >= 2:
        kl, ku = kappa_lower(base), kappa_upper(base)
        if ku is None:
            ku = math.inf
        fragile = int(((ens.kappas > kl) & (ens.kappas <= ku)).sum())
        robust = int((ens.kappas > ku).sum())
        unproductive = int((ens.kappas <= kl).sum())
    else:
        kl = _kappa_lower_simple(base)
        fragile = 0
        robust = int((ens.kappas > kl).sum())
        unproductive = int((ens.kappas <= kl).sum())
    return Census(fragile, robust, unproductive)


def mixed_fragility_census(ensembles: list[SectorEnsemble]) -> Census:
    """Census over sectors of several ensembles (e.g. mixed complexities)."""
    parts = [fragility_census(e) for e in ensembles]
    return Census(sum(p.fragile for p in parts), sum(p.robust for p in parts),
                  sum(p.unproductive for p in parts))


@dataclass(frozen=True)
class CascadeStep:
    step: int
    surviving: int
    output: float


@dataclass(frozen=True)
class CascadeTrajectory:
    steps: list[CascadeStep]
    failed: np.ndarray
    kappas_final: np.ndarray

    @property
    def total_failures(self) -> int:
        return int(self.failed.sum())

    @property
    def full_collapse(self) -> bool:
        return bool(self.failed.all())


def run_cascade(ens: SectorEnsemble, shock: float = 1e-9) -> CascadeTrajectory:
    """Iterated sector failures after an infinitesimal economy-wide shock.

    Per step: (a) surviving sectors whose current kappa lies in the fragile
    band collapse under the shock (entry fixed, investment re-adjusted:
    exactly the critical sectors fall to zero output), and sectors pushed
    below the productivity floor fail outright; (b) aggregate output is
    recomputed with the casualties at zero; (c) the linkage rescales every
    survivor's kappa; (d) survivors re-solve entry and investment.  Stops at
    the first step with no new failures.
    """
    if shock <= 0:
        raise ValueError("the shock must be strictly positive (if tiny)")
    base = ens.base
    if base.tech.m < 2:
        raise ValueError("cascades require complex sectors (m >= 2)")
    kl = kappa_lower(base)
    ku = kappa_upper(base)
    if ku is None:
        ku = math.inf
    S = ens.n_sectors
    kappas = ens.kappas.copy()
    outputs = _solve_outputs(base, kappas)
    failed = outputs <= 0.0
    y1 = float(outputs.mean())
    steps = [CascadeStep(0, int((~failed).sum()), y1)]
    if y1 <= 0.0:
        return CascadeTrajectory(steps, failed, kappas)
    for k in range(1, S + 2):
        fragile = ~failed & (kappas > kl) & (kappas <= ku)
        dead = ~failed & (kappas <= kl)
        newly = fragile | dead
        if not newly.any():
            break
        failed |= newly
        outputs[newly] = 0.0
        y_link = float(outputs.mean())
        scale = (y_link / y1) ** ens.theta if ens.theta != 0.0 else 1.0
        kappas = np.where(failed, kappas, ens.kappas * scale)
        alive = ~failed
        if alive.any():
            outputs[alive] = _solve_outputs(base, kappas[alive])
        steps.append(CascadeStep(k, int(alive.sum()), float(outputs.mean())))
    return CascadeTrajectory(steps, failed, kappas)
