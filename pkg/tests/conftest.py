"""Shared test setup: compile the numba kernels before anything is timed."""

import numpy as np
import pytest


@pytest.fixture(scope="session", autouse=True)
def warm_numba_kernels():
    # First call of each jitted kernel triggers compilation (cached on disk
    # afterwards); do it here so acceptance runtime budgets measure solver
    # work, not JIT time.
    from fraglab.heterogeneous import HeterogeneousEconomy, het_rho
    from fraglab.montecarlo import sample_tree_reliability
    from fraglab.reliability import Technology

    econ = HeterogeneousEconomy(
        products=("u", "v"),
        inputs={"u": ["v", "u"], "v": ["u", "v"]},
        n={"u": 2, "v": 2},
        alpha={"u": 1.0, "v": 1.0},
        beta={"u": 1.0, "v": 1.0},
    )
    X = np.where(econ.adjacency(), 0.95, 0.0)
    het_rho(econ, X)
    from fraglab.heterogeneous import _track_kernel, _relax_masked, _xflat
    indptr, cols, nvals, gvals, pinpos = econ._flat()
    _track_kernel(indptr, cols, nvals, gvals, pinpos,
                  np.array([0.95, 0.95]), np.ones(2), 50, 1e-9, 1e-6)
    _relax_masked(indptr, cols, nvals, _xflat(econ, X), np.ones(2),
                  np.array([True, True]), 1e-9, 50)
    sample_tree_reliability(Technology(2, 2), 0.9, 3, 10, 0)
