"""Asymmetric product networks: vector reliability and equilibrium construction.

Products differ in inputs required, multisourcing per edge, cost weights,
profit slopes, and entry costs.  Reliability is the componentwise-largest
fixed point of

    r_i = prod_{j in I_i} (1 - (1 - x_ij * r_j)**n_ij)

Equilibria are built by the reverse procedure: pin each row's first-input
strength, recover the rest of the row from the marginal-benefit ratio
condition (a monotone 1-D equation per edge), and walk the pins down from 1
while tracking the joint (X, r) branch.  Where the branch folds (a
saddle-node: reliability of some cluster is about to jump to zero), the walk
stops: that cluster is critical.  Profit slopes G_i, entry masses, and entry
cost slopes are then backed out so the tracked point is an equilibrium, with
zero marginal profit for noncritical products and positive for critical ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from numba import njit

_TOL = 1e-12
_FLOOR = 1e-9
_COLLAPSE = 1e-6  # construction-time threshold for "reliability hit zero"


@dataclass(frozen=True)
class HeterogeneousEconomy:
    """Product dependency structure and per-product market parameters.

    inputs[i] lists the products required by producers of product i (ordered;
    the first entry is the row's pin column in constructions).  n gives the
    multisourcing level per edge: either a mapping {(i, j): n_ij} or a
    per-row mapping {i: n_i}.  Edge cost is 0.5*gamma_ij*(x_ij - xbar_ij)**2.
    Gross profit is G_i(q) = alpha_i*(1 - q), entry cost Phi_i(f) = beta_i*f.
    """

    products: tuple[str, ...]
    inputs: Mapping[str, Sequence[str]]
    n: Mapping
    alpha: Mapping[str, float]
    beta: Mapping[str, float]
    gamma: Mapping | None = None
    xbar: Mapping | None = None

    def __post_init__(self):
        idx = {p: k for k, p in enumerate(self.products)}
        P = len(self.products)
        nmat = np.zeros((P, P))
        gmat = np.zeros((P, P))
        xbmat = np.zeros((P, P))
        mask = np.zeros((P, P), dtype=bool)
        for p, deps in self.inputs.items():
            i = idx[p]
            if len(deps) < 1:
                raise ValueError(f"product {p} requires at least one input")
            for q in deps:
                j = idx[q]
                mask[i, j] = True
                if isinstance(self.n, Mapping) and (p, q) in self.n:
                    nmat[i, j] = self.n[(p, q)]
                else:
                    nmat[i, j] = self.n[p]
                gmat[i, j] = 1.0 if self.gamma is None else self.gamma.get((p, q), 1.0)
                xbmat[i, j] = 0.0 if self.xbar is None else self.xbar.get((p, q), 0.0)
        if (nmat[mask] < 1).any():
            raise ValueError("n_ij >= 1 required on every edge")
        if (gmat[mask] <= 0).any():
            raise ValueError("gamma_ij > 0 required on every edge")
        if any(self.alpha[p] <= 0 for p in self.products):
            raise ValueError("profit slopes alpha must be positive")
        if any(self.beta[p] <= 0 for p in self.products):
            raise ValueError("entry slopes beta must be positive")
        object.__setattr__(self, "_idx", idx)
        object.__setattr__(self, "_mask", mask)
        object.__setattr__(self, "_nmat", nmat)
        object.__setattr__(self, "_gmat", gmat)
        object.__setattr__(self, "_xbmat", xbmat)
        object.__setattr__(self, "_alpha", np.array([self.alpha[p] for p in self.products], float))
        object.__setattr__(self, "_beta", np.array([self.beta[p] for p in self.products], float))
        object.__setattr__(self, "_pin_col", np.array(
            [idx[list(self.inputs[p])[0]] for p in self.products], dtype=np.int64))
        object.__setattr__(self, "_flat_cache", None)

    @property
    def size(self) -> int:
        return len(self.products)

    @property
    def complexity(self) -> np.ndarray:
        """m_i = number of required inputs per product."""
        return self._mask.sum(axis=1)

    def index(self, product: str) -> int:
        return self._idx[product]

    def adjacency(self) -> np.ndarray:
        return self._mask.copy()

    def _flat(self):
        """CSR-style flat edge arrays for the numba kernels (cached).

        Returns (indptr, cols, nvals, gvals, pinpos) where pinpos[i] is the
        flat index of row i's pin edge.
        """
        if self._flat_cache is not None:
            return self._flat_cache
        P = self.size
        indptr = np.zeros(P + 1, dtype=np.int64)
        cols, nvals, gvals = [], [], []
        pinpos = np.zeros(P, dtype=np.int64)
        for i in range(P):
            js = np.nonzero(self._mask[i])[0]
            for j in js:
                if j == self._pin_col[i]:
                    pinpos[i] = len(cols)
                cols.append(int(j))
                nvals.append(self._nmat[i, j])
                gvals.append(self._gmat[i, j])
            indptr[i + 1] = len(cols)
        flat = (indptr, np.array(cols, dtype=np.int64), np.array(nvals),
                np.array(gvals), pinpos)
        object.__setattr__(self, "_flat_cache", flat)
        return flat


@njit(cache=True)
def _relax_kernel(indptr, cols, nvals, xdata, r0, tol, cap, stop_floor):
    """Iterate the vector reliability map from r0 at fixed strengths.

    Returns (r, status): status 0 converged, 1 some component fell below
    stop_floor (only when stop_floor > 0), 2 iteration cap reached.
    """
    P = len(indptr) - 1
    r = r0.copy()
    rn = np.empty(P)
    for _ in range(cap):
        delta = 0.0
        for i in range(P):
            prod = 1.0
            for e in range(indptr[i], indptr[i + 1]):
                prod *= 1.0 - (1.0 - r[cols[e]] * xdata[e]) ** nvals[e]
            rn[i] = prod
        for i in range(P):
            d = abs(rn[i] - r[i])
            if d > delta:
                delta = d
            r[i] = rn[i]
        if stop_floor > 0.0:
            for i in range(P):
                if r[i] < stop_floor:
                    return r, 1
        if delta < tol:
            return r, 0
    return r, 2


@njit(cache=True)
def _relax_masked(indptr, cols, nvals, xdata, r0, active, tol, cap):
    """Relaxation that only updates `active` components; others stay frozen.

    Used by shock propagation: products with no dependency path to the
    shocked product are mathematically unaffected, and freezing them keeps
    clusters that sit exactly on a fold from drifting off it numerically.
    """
    P = len(indptr) - 1
    r = r0.copy()
    rn = np.empty(P)
    for _ in range(cap):
        delta = 0.0
        for i in range(P):
            if not active[i]:
                rn[i] = r[i]
                continue
            prod = 1.0
            for e in range(indptr[i], indptr[i + 1]):
                prod *= 1.0 - (1.0 - r[cols[e]] * xdata[e]) ** nvals[e]
            rn[i] = prod
        for i in range(P):
            d = abs(rn[i] - r[i])
            if d > delta:
                delta = d
            r[i] = rn[i]
        if delta < tol:
            return r, 0
    return r, 2


@njit(cache=True)
def _rows_kernel(indptr, cols, nvals, gvals, pinpos, pins, r, xflat):
    """Solve every row's ratio conditions given r; fills xflat.

    Returns 0 on success, 1 + flat edge index when an edge has no root on
    (0, 1/r_j] (only possible for n_ij = 1) or a pin input has r <= 0.
    """
    P = len(indptr) - 1
    for i in range(P):
        pe = pinpos[i]
        pc = cols[pe]
        if r[pc] <= 0.0:
            return 1 + pe
        pin = pins[i]
        xflat[pe] = pin
        npin = nvals[pe]
        u = 1.0 - pin * r[pc]
        base = (u ** (npin - 1.0)) / (1.0 - u ** npin) * (npin / pin) * r[pc]
        for e in range(indptr[i], indptr[i + 1]):
            if e == pe:
                continue
            j = cols[e]
            if r[j] <= 0.0:
                return 1 + e
            nij = nvals[e]
            target = base / r[j] * gvals[e] / gvals[pe]
            lo = 1e-14
            hi = 1.0 / r[j] - 1e-14
            uh = 1.0 - hi * r[j]
            lhs_hi = (uh ** (nij - 1.0)) / (1.0 - uh ** nij) * (nij / hi)
            if lhs_hi > target:
                return 1 + e
            for _ in range(64):
                mid = 0.5 * (lo + hi)
                um = 1.0 - mid * r[j]
                lhs = (um ** (nij - 1.0)) / (1.0 - um ** nij) * (nij / mid)
                if lhs > target:
                    lo = mid
                else:
                    hi = mid
            xflat[e] = 0.5 * (lo + hi)
    return 0


@njit(cache=True)
def _map_from_flat(indptr, cols, nvals, xflat, r, rn):
    P = len(indptr) - 1
    for i in range(P):
        prod = 1.0
        for e in range(indptr[i], indptr[i + 1]):
            prod *= 1.0 - (1.0 - r[cols[e]] * xflat[e]) ** nvals[e]
        rn[i] = prod


@njit(cache=True)
def _track_kernel(indptr, cols, nvals, gvals, pinpos, pins, r0, cap, tol, floor):
    """Interleave row re-solves with single map applications from r0.

    Returns (r, status): 0 settled, 1 collapsed (some component < floor or a
    row became unsolvable), 2 cap reached.
    """
    P = len(indptr) - 1
    r = r0.copy()
    rn = np.empty(P)
    xflat = np.empty(len(cols))
    for _ in range(cap):
        bad = _rows_kernel(indptr, cols, nvals, gvals, pinpos, pins, r, xflat)
        if bad != 0:
            return r, 1
        _map_from_flat(indptr, cols, nvals, xflat, r, rn)
        delta = 0.0
        for i in range(P):
            d = abs(rn[i] - r[i])
            if d > delta:
                delta = d
            r[i] = rn[i]
            if r[i] < floor:
                return r, 1
        if delta < tol:
            return r, 0
    return r, 2


def _xflat(econ: HeterogeneousEconomy, X: np.ndarray) -> np.ndarray:
    indptr, cols, _, _, _ = econ._flat()
    out = np.empty(len(cols))
    for i in range(econ.size):
        out[indptr[i]:indptr[i + 1]] = X[i, cols[indptr[i]:indptr[i + 1]]]
    return out


def het_reliability_map(econ: HeterogeneousEconomy, X: np.ndarray,
                        r: np.ndarray) -> np.ndarray:
    """One application of the vector reliability map."""
    X = np.asarray(X, float)
    r = np.asarray(r, float)
    term = 1.0 - (1.0 - r[None, :] * X) ** econ._nmat
    term = np.where(econ._mask, term, 1.0)
    return term.prod(axis=1)


def het_rho(econ: HeterogeneousEconomy, X: np.ndarray,
            start: np.ndarray | None = None, tol: float = _TOL,
            cap: int = 2_000_000) -> np.ndarray:
    """Componentwise-largest fixed point, iterated from the all-ones vector.

    `start` warm-starts the relaxation from a different point, which tracks
    the solution branch the start lies above instead of the global-largest
    one; the construction and shock paths rely on this.
    """
    indptr, cols, nvals, _, _ = econ._flat()
    r0 = np.ones(econ.size) if start is None else np.asarray(start, float).copy()
    r, _ = _relax_kernel(indptr, cols, nvals, _xflat(econ, X), r0, tol, cap, 0.0)
    r[r < _FLOOR] = 0.0
    return r


def het_critical_xi(econ: HeterogeneousEconomy,
                    strength: Callable[[float], np.ndarray] | None = None,
                    tol: float = 1e-8, require_all: bool = False) -> float:
    """Institutional-quality threshold where production first becomes possible.

    `strength` maps xi to a full strength matrix (default: every edge at xi).
    Bisection on the positivity of het_rho; with require_all the whole vector
    must be positive, otherwise any component counts.
    """
    if strength is None:
        strength = lambda xi: np.where(econ._mask, xi, 0.0)

    def productive(xi: float) -> bool:
        r = het_rho(econ, strength(xi), cap=500_000)
        return bool((r > _FLOOR).all() if require_all else (r > _FLOOR).any())

    if not productive(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if productive(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _ratio_rhs(pin: float, r_pin: float, n_pin: float) -> float:
    u = 1.0 - pin * r_pin
    return (u ** (n_pin - 1.0)) / (1.0 - u ** n_pin) * (n_pin / pin)


def het_ratio_solve(econ: HeterogeneousEconomy, r: np.ndarray, product: str | int,
                    pin: float) -> np.ndarray:
    """Recover one row of X from the marginal-benefit ratio conditions.

    With the row's first-input strength pinned, optimality of the producer's
    investment mix forces, for every other input j,

        (1 - x*r_j)**(n_ij - 1) / (1 - (1 - x*r_j)**n_ij) * n_ij/x  =  rhs,

    whose left side is strictly decreasing in x: bisection finds the unique
    root on (0, 1/r_j].  Raises if the target is unattainable there.
    """
    i = econ.index(product) if isinstance(product, str) else product
    P = econ.size
    r = np.asarray(r, float)
    row = np.zeros(P)
    pc = econ._pin_col[i]
    if r[pc] <= 0.0:
        raise ValueError("pin-input reliability must be positive")
    row[pc] = pin
    base = _ratio_rhs(pin, r[pc], econ._nmat[i, pc]) * r[pc]
    # gamma-aware target: MB_ij/MB_i1 = gamma_ij x_ij / (gamma_i1 x_i1)
    g_pin = econ._gmat[i, pc]
    for j in np.nonzero(econ._mask[i])[0]:
        if j == pc:
            continue
        if r[j] <= 0.0:
            raise ValueError(f"input {econ.products[j]} has zero reliability")
        nij = econ._nmat[i, j]
        target = base / r[j] * econ._gmat[i, j] / g_pin
        lo, hi = 1e-14, 1.0 / r[j] - 1e-14

        def lhs(x):
            u = 1.0 - x * r[j]
            return (u ** (nij - 1.0)) / (1.0 - u ** nij) * (nij / x)

        if lhs(hi) > target:
            raise ValueError(
                f"no root for edge ({econ.products[i]}, {econ.products[j]}): "
                f"ratio target unattainable on (0, 1/r_j]")
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if lhs(mid) > target:
                lo = mid
            else:
                hi = mid
        row[j] = 0.5 * (lo + hi)
    return row


def _rows_at(econ: HeterogeneousEconomy, pins: np.ndarray, r: np.ndarray) -> np.ndarray:
    """All rows from the ratio conditions at reliability r (kernel-backed)."""
    indptr, cols, nvals, gvals, pinpos = econ._flat()
    xflat = np.empty(len(cols))
    bad = _rows_kernel(indptr, cols, nvals, gvals, pinpos,
                       np.asarray(pins, float), np.asarray(r, float), xflat)
    if bad != 0:
        e = bad - 1
        i = int(np.searchsorted(indptr, e, side="right")) - 1
        raise ValueError(
            f"no ratio-condition root for edge "
            f"({econ.products[i]}, {econ.products[cols[e]]})")
    X = np.zeros((econ.size, econ.size))
    for i in range(econ.size):
        X[i, cols[indptr[i]:indptr[i + 1]]] = xflat[indptr[i]:indptr[i + 1]]
    return X


def _joint_map(econ: HeterogeneousEconomy, pins: np.ndarray, r: np.ndarray) -> np.ndarray:
    return het_reliability_map(econ, _rows_at(econ, pins, r), r)


@dataclass(frozen=True)
class HetEquilibrium:
    X: np.ndarray
    r: np.ndarray
    f_bar: np.ndarray
    G: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gross_profit: np.ndarray   # before entry costs
    net_profit: np.ndarray     # of the marginal entrant
    critical: np.ndarray       # bool per product
    pins: np.ndarray
    at_fold: bool


def _marginal_benefit_matrix(econ: HeterogeneousEconomy, X: np.ndarray,
                             r: np.ndarray, G: np.ndarray) -> np.ndarray:
    """MB_ij = G_i * prod_{l != j}(...) * n_ij*(1-x_ij r_j)^(n_ij-1) * r_j."""
    P = econ.size
    term = 1.0 - (1.0 - r[None, :] * X) ** econ._nmat
    term = np.where(econ._mask, term, 1.0)
    full = term.prod(axis=1)
    out = np.zeros((P, P))
    for i in range(P):
        for j in np.nonzero(econ._mask[i])[0]:
            others = full[i] / term[i, j] if term[i, j] > 0 else 0.0
            nij = econ._nmat[i, j]
            out[i, j] = others * nij * (1.0 - X[i, j] * r[j]) ** (nij - 1.0) * r[j]
        out[i] *= G[i]
    return out


def _back_out_G(econ: HeterogeneousEconomy, X: np.ndarray, r: np.ndarray) -> np.ndarray:
    """G_i making the pinned edge's first-order condition hold exactly."""
    P = econ.size
    mb_unit = _marginal_benefit_matrix(econ, X, r, np.ones(P))
    G = np.empty(P)
    for i in range(P):
        pc = econ._pin_col[i]
        mc = econ._gmat[i, pc] * (X[i, pc] - econ._xbmat[i, pc])
        G[i] = mc / mb_unit[i, pc]
    return G


def _classify_rows(econ: HeterogeneousEconomy, X: np.ndarray, r: np.ndarray,
                   delta: float = 1e-3) -> np.ndarray:
    """Critical iff weakly lowering row i's strengths collapses r_i itself."""
    indptr, cols, nvals, _, _ = econ._flat()
    crit = np.zeros(econ.size, dtype=bool)
    for i in range(econ.size):
        Xp = X.copy()
        Xp[i] *= 1.0 - delta
        rp, _ = _relax_kernel(indptr, cols, nvals, _xflat(econ, Xp), r.copy(),
                              _TOL, 2_000_000, 0.0)
        crit[i] = rp[i] < 0.5 * r[i]
    return crit


def _fold_polish(econ, pins_of, t0, r0, tol=1e-11):
    """Newton on the bordered system {T(r)=r, (J-I)v=0, |v|=1} locating the
    saddle-node of the tracked branch along the pin trajectory."""
    P = econ.size

    def T(r, t):
        return _joint_map(econ, pins_of(t), r)

    def jac(r, t, h=1e-7):
        J = np.empty((P, P))
        for j in range(P):
            rp = r.copy(); rp[j] += h
            rm = r.copy(); rm[j] -= h
            J[:, j] = (T(rp, t) - T(rm, t)) / (2 * h)
        return J

    J = jac(r0, t0)
    w, V = np.linalg.eig(J - np.eye(P))
    v = np.real(V[:, np.argmin(np.abs(w))])
    v /= np.linalg.norm(v)
    z = np.concatenate([r0, v, [t0]])

    def F(z):
        r, v, t = z[:P], z[P:2 * P], z[2 * P]
        return np.concatenate([T(r, t) - r, (jac(r, t) - np.eye(P)) @ v,
                               [v @ v - 1.0]])

    Fz = F(z)
    for _ in range(40):
        if np.linalg.norm(Fz) < tol:
            break
        nvar = len(z)
        JF = np.empty((nvar, nvar))
        h = 1e-7
        for j in range(nvar):
            zp = z.copy(); zp[j] += h
            JF[:, j] = (F(zp) - Fz) / h
        dz = np.linalg.solve(JF, -Fz)
        step = 1.0
        for _ in range(10):
            zn = z + step * dz
            if (zn[:P] > 0).all() and (zn[:P] <= 1.0 + 1e-9).all():
                Fn = F(zn)
                if np.linalg.norm(Fn) < np.linalg.norm(Fz):
                    z, Fz = zn, Fn
                    break
            step *= 0.5
        else:
            break
    r, v, t = z[:P], z[P:2 * P], z[2 * P]
    return t, r, np.linalg.norm(Fz)


def _branch_polish(econ, pins, r0, tol=1e-13):
    """Newton on T(r) - r = 0 at fixed pins (regular branch point)."""
    P = econ.size

    def F(r):
        return _joint_map(econ, pins, r) - r

    r = r0.copy()
    Fr = F(r)
    for _ in range(60):
        if np.linalg.norm(Fr) < tol:
            break
        J = np.empty((P, P))
        h = 1e-7
        for j in range(P):
            rp = r.copy(); rp[j] += h
            rm = r.copy(); rm[j] -= h
            J[:, j] = (F(rp) - F(rm)) / (2 * h)
        dr = np.linalg.solve(J, -Fr)
        nrm = np.max(np.abs(dr))
        if nrm > 0.05:
            dr *= 0.05 / nrm
        rn = r + dr
        if (rn <= 0).any() or (rn > 1.0 + 1e-12).any():
            break
        Fn = F(rn)
        if np.linalg.norm(Fn) >= np.linalg.norm(Fr):
            break
        r, Fr = rn, Fn
    return r, np.linalg.norm(Fr)


def het_construct_equilibrium(econ: HeterogeneousEconomy,
                              pins: Sequence[float] | np.ndarray,
                              steps: int = 200,
                              inner_cap: int = 5_000) -> HetEquilibrium:
    """Walk the pins down from 1 toward `pins`, tracking the joint branch.

    At each march step the row strengths are re-solved from the ratio
    conditions and one reliability-map application is interleaved (the
    stable continuation discretization).  If reliability of some product
    collapses en route, the branch has folded: the saddle-node is polished by
    a bordered Newton solve and that point - the critical surface - is
    returned.  Otherwise the endpoint is Newton-polished.  Calibration then
    backs out G_i from the pinned first-order conditions, entry masses from
    the profit slopes alpha_i, and entry-cost slopes beta_i from zero
    marginal profit (noncritical products; critical ones keep the economy's
    beta and earn strictly positive margins).
    """
    pins_end = np.asarray(pins, float)
    if len(pins_end) != econ.size:
        raise ValueError("one pin per product required")

    def pins_of(t: float) -> np.ndarray:
        return 1.0 - t * (1.0 - pins_end)

    indptr, cols, nvals, gvals, pinpos = econ._flat()
    t_good, r_good = 0.0, np.ones(econ.size)
    folded = False
    for s in range(1, steps + 1):
        t = s / steps
        rr, status = _track_kernel(indptr, cols, nvals, gvals, pinpos,
                                   pins_of(t), r_good, inner_cap, 1e-11, _COLLAPSE)
        if status != 0:
            folded = True
            break
        t_good, r_good = t, rr

    if folded:
        t_star, r_star, res = _fold_polish(econ, pins_of, t_good, r_good)
        if res > 1e-7:
            raise RuntimeError(f"fold refinement did not converge (residual {res:.2e})")
        at_fold = True
    else:
        t_star = 1.0
        r_star, res = _branch_polish(econ, pins_of(1.0), r_good)
        if res > 1e-9:
            raise RuntimeError(f"endpoint polish did not converge (residual {res:.2e})")
        at_fold = False

    pins_star = pins_of(t_star)
    X = _rows_at(econ, pins_star, r_star)
    G = _back_out_G(econ, X, r_star)
    alpha = econ._alpha
    if (G >= alpha).any():
        bad = [econ.products[i] for i in np.nonzero(G >= alpha)[0]]
        raise ValueError(f"profit slopes alpha too small to support G for {bad}")
    f_bar = (1.0 - G / alpha) / r_star
    cost = 0.5 * (econ._gmat * np.where(econ._mask, (X - econ._xbmat) ** 2, 0.0)).sum(axis=1)
    gross = G * r_star - cost
    critical = _classify_rows(econ, X, r_star)
    beta = np.where(critical, econ._beta, gross / f_bar)
    net = gross - beta * f_bar
    bad_margin = critical & (net <= 0.0)
    if bad_margin.any():
        names = [econ.products[i] for i in np.nonzero(bad_margin)[0]]
        raise ValueError(
            f"entry slopes beta too steep for critical products {names}: the "
            f"marginal entrant must keep a strictly positive margin there")
    return HetEquilibrium(X=X, r=r_star, f_bar=f_bar, G=G, alpha=alpha.copy(),
                          beta=beta, gross_profit=gross, net_profit=net,
                          critical=critical, pins=pins_star, at_fold=at_fold)


# --- weakest-link structure -------------------------------------------------


def strongly_connected_components(adj: np.ndarray) -> list[list[int]]:
    """Kosaraju's algorithm with explicit stacks (adj[i, j]: i depends on j)."""
    P = adj.shape[0]
    order: list[int] = []
    seen = np.zeros(P, dtype=bool)
    for s in range(P):
        if seen[s]:
            continue
        stack = [(s, 0)]
        seen[s] = True
        while stack:
            node, ptr = stack.pop()
            nbrs = np.nonzero(adj[node])[0]
            if ptr < len(nbrs):
                stack.append((node, ptr + 1))
                nxt = nbrs[ptr]
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, 0))
            else:
                order.append(node)
    comp = -np.ones(P, dtype=int)
    ncomp = 0
    radj = adj.T
    for s in reversed(order):
        if comp[s] >= 0:
            continue
        stack = [s]
        comp[s] = ncomp
        while stack:
            node = stack.pop()
            for nxt in np.nonzero(radj[node])[0]:
                if comp[nxt] < 0:
                    comp[nxt] = ncomp
                    stack.append(nxt)
        ncomp += 1
    groups: list[list[int]] = [[] for _ in range(ncomp)]
    for i in range(P):
        groups[comp[i]].append(i)
    return groups


def _reaches(adj: np.ndarray, target: int) -> np.ndarray:
    """Nodes with a directed path to `target` (inclusive)."""
    P = adj.shape[0]
    hit = np.zeros(P, dtype=bool)
    hit[target] = True
    stack = [target]
    radj = adj.T  # radj[j]: nodes that depend on j
    while stack:
        node = stack.pop()
        for pred in np.nonzero(radj[node])[0]:
            if not hit[pred]:
                hit[pred] = True
                stack.append(pred)
    return hit


@dataclass(frozen=True)
class WeakestLinkReport:
    components: list[list[str]]
    critical: dict[str, bool]
    failure_sets: dict[str, list[str]]


def weakest_link_analysis(econ: HeterogeneousEconomy,
                          eq: HetEquilibrium) -> WeakestLinkReport:
    """Regimes, strongly connected components, and shock propagation sets.

    For each critical product i, a cost shock to any of its edges fells every
    product with a directed dependency path to i.  Strongly connected
    components must be regime-homogeneous; a mixed component indicates an
    inconsistent solution and raises.
    """
    adj = econ.adjacency()
    comps = strongly_connected_components(adj)
    for grp in comps:
        vals = {bool(eq.critical[i]) for i in grp}
        if len(vals) > 1:
            names = [econ.products[i] for i in grp]
            raise RuntimeError(f"component {names} mixes critical and noncritical products")
    failure_sets: dict[str, list[str]] = {}
    for i in range(econ.size):
        if not eq.critical[i]:
            continue
        hit = _reaches(adj, i)
        failure_sets[econ.products[i]] = [econ.products[j] for j in np.nonzero(hit)[0]]
    return WeakestLinkReport(
        components=[[econ.products[i] for i in grp] for grp in comps],
        critical={p: bool(eq.critical[k]) for k, p in enumerate(econ.products)},
        failure_sets=failure_sets,
    )


# --- shocks -----------------------------------------------------------------


def het_shock(econ: HeterogeneousEconomy, eq: HetEquilibrium,
              edge: tuple[str, str], eps: float,
              max_outer: int = 400) -> np.ndarray:
    """Reliability vector after a cost shock gamma_ij -> gamma_ij*(1 + eps).

    Entry stays fixed; producers of the shocked product re-solve their whole
    investment row against the dearer edge (first-order conditions, G_i
    updated through r_i), and reliabilities re-relax from the current
    operating point.  Critical clusters collapse; noncritical ones adjust
    continuously.
    """
    if eps < 0:
        raise ValueError("shock size must be nonnegative")
    i = econ.index(edge[0])
    j_shocked = econ.index(edge[1])
    if not econ._mask[i, j_shocked]:
        raise ValueError(f"{edge[0]} does not source {edge[1]}")
    if eps == 0.0:
        return eq.r.copy()

    gam = econ._gmat.copy()
    gam[i, j_shocked] *= 1.0 + eps
    indptr, cols, nvals, _, _ = econ._flat()
    X = eq.X.copy()
    r = eq.r.copy()
    f_bar = eq.f_bar
    # Only dependents of the shocked product can move; freezing the rest
    # keeps unrelated clusters that sit on a fold from drifting off it.
    active = _reaches(econ.adjacency(), i)

    for _ in range(max_outer):
        if r[i] < _FLOOR:
            break
        G_i = econ._alpha[i] * (1.0 - f_bar[i] * r[i])
        # Gauss-Seidel over the row's edges: each FOC is monotone in x_ij
        term = 1.0 - (1.0 - r[None, :] * X) ** econ._nmat
        term = np.where(econ._mask, term, 1.0)
        row_changed = 0.0
        for j in np.nonzero(econ._mask[i])[0]:
            if r[j] <= 0.0:
                X[i, j] = 0.0
                continue
            others = np.prod([term[i, l] for l in np.nonzero(econ._mask[i])[0] if l != j])
            nij = econ._nmat[i, j]

            def foc(x):
                mb = G_i * others * nij * (1.0 - x * r[j]) ** (nij - 1.0) * r[j]
                return mb - gam[i, j] * (x - econ._xbmat[i, j])

            lo, hi = 0.0, min(1.0, 1.0 / r[j] - 1e-15)
            if foc(hi) > 0.0:
                x_new = hi
            else:
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    if foc(mid) > 0.0:
                        lo = mid
                    else:
                        hi = mid
                x_new = 0.5 * (lo + hi)
            # under-relax: the raw (row FOC, full relax) alternation has loop
            # gain just above 1 near criticality and oscillates divergently
            x_new = 0.5 * (X[i, j] + x_new)
            row_changed = max(row_changed, abs(x_new - X[i, j]))
            X[i, j] = x_new
            term[i, j] = 1.0 - (1.0 - x_new * r[j]) ** nij
        rn, _ = _relax_masked(indptr, cols, nvals, _xflat(econ, X), r.copy(),
                              active, _TOL, 2_000_000)
        moved = np.max(np.abs(rn - r))
        r = rn
        if moved < 1e-11 and row_changed < 1e-11:
            break
    r = r.copy()
    r[(r < _FLOOR) & active] = 0.0
    return r
