"""Stochastic oracle for the analytic reliability machinery.

Samples finite supply networks and recursive supply trees, determines which
firms can function by the iterative-removal algorithm, and estimates
reliabilities as empirical frequencies.  Everything is reproducible: trial
RNG streams are counter-based (SplitMix64 applied to a per-trial key derived
by SeedSequence spawning), so runs are bit-identical regardless of scheduling
and each trial can be replayed in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit, uint64

from fraglab.reliability import Technology

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_INV_2_64 = 1.0 / 18446744073709551616.0


def derive_trial_keys(seed: int, trials: int) -> np.ndarray:
    """Independent uint64 stream keys for each trial (SeedSequence-derived)."""
    return np.random.SeedSequence(seed).generate_state(trials, dtype=np.uint64)


@njit(uint64(uint64), cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)
    return z ^ (z >> uint64(31))


@njit(cache=True, inline="always")
def _draw(state):
    """Next uniform in [0,1) of the counter stream; state = [key, counter]."""
    state[1] += uint64(1)
    return _mix64(state[0] + state[1] * uint64(0x9E3779B97F4A7C15)) * _INV_2_64


@njit(cache=True)
def _tree_node_ok(state, t, m, n, x, p2):
    """Root functionality of a lazily sampled tier-t subtree.

    DFS with short-circuiting: an input stops probing children at the first
    functional supplier, a node fails at the first unsatisfiable input.  At
    tier 2 all children are tier-1 leaves (always functional), so an input
    reduces to a single draw against p2 = 1 - (1-x)**n.
    """
    if t <= 1:
        return True
    if t == 2:
        for _ in range(m):
            if _draw(state) >= p2:
                return False
        return True
    for _ in range(m):
        ok = False
        for _ in range(n):
            if _draw(state) < x:
                if _tree_node_ok(state, t - 1, m, n, x, p2):
                    ok = True
                    break
        if not ok:
            return False
    return True


@njit(cache=True)
def _tree_success_count(keys, m, n, T, x):
    p2 = 1.0 - (1.0 - x) ** n
    count = 0
    state = np.zeros(2, dtype=np.uint64)
    for k in range(len(keys)):
        state[0] = keys[k]
        state[1] = uint64(0)
        if _tree_node_ok(state, T, m, n, x, p2):
            count += 1
    return count


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    trials: int
    seed: int


def sample_tree_reliability(tech: Technology, x: float, T: int, trials: int,
                            seed: int) -> Estimate:
    """Monte Carlo estimate of the depth-T tree success probability.

    Each trial samples a fresh random tree (m inputs x n children per node,
    edges operational w.p. x, tier-1 leaves functional) and reports whether
    the root can produce.  Deterministic given the seed.
    """
    if trials < 1:
        raise ValueError("at least one trial required")
    if T < 1:
        raise ValueError("T >= 1 required")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    keys = derive_trial_keys(seed, trials)
    count = _tree_success_count(keys, tech.m, tech.n, T, x)
    p = count / trials
    return Estimate(p, math.sqrt(max(p * (1.0 - p), 0.0) / trials), trials, seed)


# --- finite supply networks -------------------------------------------------


@dataclass
class FiniteSupplyNetwork:
    """A sampled supply network over finitely many firms.

    Firms are indexed 0..F-1 with product_of[f] giving each firm's product.
    Input slots are stored CSR-style: firm f owns slots
    slot_ptr[f]:slot_ptr[f+1]; slot s draws on supplier edges
    edge_ptr[s]:edge_ptr[s+1] into (edge_supplier, edge_operational).  Firms
    with no slots need no inputs and are always functional.
    """

    product_of: np.ndarray
    slot_ptr: np.ndarray
    edge_ptr: np.ndarray
    edge_supplier: np.ndarray
    edge_operational: np.ndarray

    @property
    def n_firms(self) -> int:
        return len(self.product_of)

    def __post_init__(self):
        self.product_of = np.asarray(self.product_of, dtype=np.int64)
        self.slot_ptr = np.asarray(self.slot_ptr, dtype=np.int64)
        self.edge_ptr = np.asarray(self.edge_ptr, dtype=np.int64)
        self.edge_supplier = np.asarray(self.edge_supplier, dtype=np.int64)
        self.edge_operational = np.asarray(self.edge_operational, dtype=bool)
        if len(self.slot_ptr) != self.n_firms + 1:
            raise ValueError("slot_ptr must have one entry per firm plus one")
        if len(self.edge_ptr) != self.slot_ptr[-1] + 1:
            raise ValueError("edge_ptr must have one entry per slot plus one")

    @classmethod
    def from_lists(cls, product_of: Sequence[int],
                   slots: Sequence[Sequence[tuple[Sequence[int], Sequence[bool]]]]):
        """Build from nested lists: slots[f] = [(suppliers, operational), ...]."""
        slot_ptr = [0]
        edge_ptr = [0]
        suppliers: list[int] = []
        operational: list[bool] = []
        for f_slots in slots:
            for sup, ops in f_slots:
                if len(sup) != len(ops):
                    raise ValueError("suppliers and flags must align")
                suppliers.extend(sup)
                operational.extend(ops)
                edge_ptr.append(len(suppliers))
            slot_ptr.append(slot_ptr[-1] + len(f_slots))
        return cls(np.array(product_of), np.array(slot_ptr), np.array(edge_ptr),
                   np.array(suppliers, dtype=np.int64),
                   np.array(operational, dtype=bool))


@dataclass(frozen=True)
class FunctionalSet:
    """Outcome of the removal algorithm.

    functional[f] marks survivors; removal_stage[f] is the stage (1, 2, ...)
    at which firm f was dropped, 0 for survivors.
    """

    functional: np.ndarray
    removal_stage: np.ndarray

    @property
    def stages(self) -> int:
        return int(self.removal_stage.max(initial=0))

    def members(self) -> np.ndarray:
        return np.nonzero(self.functional)[0]


def maximal_functional_set(net: FiniteSupplyNetwork,
                           max_rounds: int | None = None) -> FunctionalSet:
    """Largest set of firms that can consistently produce.

    Starts from everyone functional and synchronously removes, each stage,
    firms lacking an operational link to a surviving supplier for some
    input.  The limit is the maximal consistent set (Tarski); the stage
    bookkeeping records the removal order.
    """
    F = net.n_firms
    S = int(net.slot_ptr[-1])
    alive = np.ones(F, dtype=bool)
    stage_of = np.zeros(F, dtype=np.int64)
    if S == 0:
        return FunctionalSet(alive, stage_of)
    edge_slot = np.repeat(np.arange(S), np.diff(net.edge_ptr))
    slot_firm = np.repeat(np.arange(F), np.diff(net.slot_ptr))
    stage = 0
    while True:
        stage += 1
        if max_rounds is not None and stage > max_rounds:
            break
        ok_edge = net.edge_operational & alive[net.edge_supplier]
        slot_ok = np.bincount(edge_slot[ok_edge], minlength=S) > 0
        firm_bad_slots = np.bincount(slot_firm[~slot_ok], minlength=F) > 0
        removed = alive & firm_bad_slots
        if not removed.any():
            break
        alive &= ~removed
        stage_of[removed] = stage
    return FunctionalSet(alive, stage_of)


def sample_supply_network(n_products: int, n_per_product: int, tech: Technology,
                          x: float, rng: np.random.Generator) -> FiniteSupplyNetwork:
    """Random finite analogue of the homogeneous model.

    Product i requires the m cyclically-next products; each firm draws n
    distinct suppliers per input uniformly without replacement (a firm never
    draws itself).  Edges are operational independently w.p. x.
    """
    m, n = tech.m, tech.n
    if n_per_product < n:
        raise ValueError("need at least n firms per product to multisource")
    if n_products < m + 1:
        raise ValueError("need at least m+1 products for distinct cyclic inputs")
    P, N = n_products, n_per_product
    F = P * N
    S = F * m
    E = S * n
    # supplier draws: iid then resample slots containing duplicates
    firm_product = np.repeat(np.arange(P), N)
    slot_firm = np.repeat(np.arange(F), m)
    slot_input = (firm_product[slot_firm] + 1 + np.tile(np.arange(m), F)) % P
    draws = rng.integers(0, N, size=(S, n))
    for _ in range(64):
        bad = np.zeros(S, dtype=bool)
        if n > 1:
            srt = np.sort(draws, axis=1)
            bad = (np.diff(srt, axis=1) == 0).any(axis=1)
        if not bad.any():
            break
        draws[bad] = rng.integers(0, N, size=(int(bad.sum()), n))
    else:
        raise RuntimeError("could not draw distinct suppliers")
    suppliers = (slot_input[:, None] * N + draws).reshape(-1)
    operational = rng.random(E) < x
    slot_ptr = np.arange(F + 1) * m
    edge_ptr = np.arange(S + 1) * n
    return FiniteSupplyNetwork(firm_product[np.arange(F)], slot_ptr, edge_ptr,
                               suppliers, operational)


def sample_population_reliability(n_products: int, n_per_product: int,
                                  tech: Technology, x: float,
                                  T_rounds: int | None, trials: int,
                                  seed: int) -> np.ndarray:
    """Per-product functional fractions on sampled finite populations.

    Builds `trials` independent random networks, runs the removal algorithm
    (optionally capped at T_rounds stages, the finite-tier analogue), and
    averages the per-product functional fractions.
    """
    if trials < 1:
        raise ValueError("at least one trial required")
    keys = derive_trial_keys(seed, trials)
    acc = np.zeros(n_products)
    for k in range(trials):
        rng = np.random.Generator(np.random.Philox(key=int(keys[k])))
        net = sample_supply_network(n_products, n_per_product, tech, x, rng)
        result = maximal_functional_set(net, max_rounds=T_rounds)
        acc += np.bincount(net.product_of[result.functional],
                           minlength=n_products) / n_per_product
    return acc / trials
