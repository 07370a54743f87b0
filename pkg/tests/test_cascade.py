import warnings

import numpy as np
import pytest

from fraglab.cascade import (
    Census,
    SectorEnsemble,
    aggregate_output,
    draw_ensemble,
    fragility_census,
    mixed_fragility_census,
    run_cascade,
)
from fraglab.equilibrium import (
    EntryModel,
    GrossProfitModel,
    MarketPrimitives,
    entry_equilibrium,
    kappa_lower,
    kappa_upper,
)
from fraglab.planner import CostModel
from fraglab.reliability import Technology


def base_config(m=2, n=5):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cost = CostModel("power", scale=2.0)
    return MarketPrimitives(
        tech=Technology(m, n),
        cost=cost,
        profit=GrossProfitModel(1.0, "linear", a=1.0, b=1.0),
        entry=EntryModel(slope=2.0),
    )


BASE = base_config()
KL = kappa_lower(BASE)
KU = kappa_upper(BASE)


class TestAggregateOutput:
    def test_all_failed(self):
        assert aggregate_output(BASE, [1.5, 2.0], failed=np.array([True, True])) == 0.0

    def test_single_sector_matches_scalar_solver(self):
        eq = entry_equilibrium(BASE.with_kappa(1.7))
        assert aggregate_output(BASE, [1.7]) == pytest.approx(eq.output, abs=1e-7)

    def test_mean_of_sector_outputs(self):
        kappas = [1.5, 1.9, 2.4]
        per = [entry_equilibrium(BASE.with_kappa(k)).output for k in kappas]
        assert aggregate_output(BASE, kappas) == pytest.approx(np.mean(per), abs=1e-7)

    def test_accepts_ensemble_directly(self):
        ens = SectorEnsemble(BASE, np.array([1.5, 1.9, 2.4]))
        assert aggregate_output(ens) == pytest.approx(
            aggregate_output(BASE, ens.kappas), abs=1e-12)


class TestCensus:
    def test_all_unproductive(self):
        ens = SectorEnsemble(BASE, np.full(10, 0.8))
        assert fragility_census(ens) == Census(0, 0, 10)

    def test_uniform_draw_fragile_fraction(self):
        ens = draw_ensemble(BASE, 100, 1.22, 4.0, theta=0.0, seed=5)
        census = fragility_census(ens)
        expect = int(((ens.kappas > KL) & (ens.kappas <= KU)).sum())
        assert census.fragile == expect
        assert census.fragile + census.robust + census.unproductive == 100

    def test_simple_sectors_never_fragile(self):
        complex_ens = draw_ensemble(base_config(m=2), 50, 1.22, 4.0, 0.0, seed=9)
        simple_ens = draw_ensemble(base_config(m=1), 50, 1.22, 4.0, 0.0, seed=9)
        census = mixed_fragility_census([complex_ens, simple_ens])
        assert census.fragile == fragility_census(complex_ens).fragile
        assert fragility_census(simple_ens).fragile == 0
        assert fragility_census(simple_ens).robust > 0


class TestCascade:
    def test_all_robust_no_failures(self):
        ens = SectorEnsemble(BASE, np.full(20, 3.0), theta=1.0)
        traj = run_cascade(ens)
        assert len(traj.steps) == 1
        assert traj.total_failures == 0

    def test_initial_failures_match_census(self):
        ens = draw_ensemble(BASE, 100, 1.22, 4.0, theta=1.0, seed=3)
        census = fragility_census(ens)
        traj = run_cascade(ens)
        assert traj.steps[1].surviving == 100 - census.fragile

    def test_monotone_trajectory_and_termination(self):
        ens = draw_ensemble(BASE, 100, 1.22, 2.3, theta=1.5, seed=11)
        traj = run_cascade(ens)
        survived = [s.surviving for s in traj.steps]
        outputs = [s.output for s in traj.steps]
        assert all(b <= a for a, b in zip(survived, survived[1:]))
        assert all(b <= a + 1e-12 for a, b in zip(outputs, outputs[1:]))
        assert len(traj.steps) <= ens.n_sectors + 2

    def test_failures_decrease_in_upper_bound(self):
        for seed in range(5):
            totals = []
            rng = np.random.Generator(np.random.Philox(key=seed))
            u = rng.random(100)
            for hi in (2.0, 2.3, 4.0):
                kappas = 1.22 + (hi - 1.22) * u  # common random numbers
                ens = SectorEnsemble(BASE, kappas, theta=1.0)
                totals.append(run_cascade(ens).total_failures)
            assert totals[0] >= totals[1] >= totals[2]

    def test_stronger_linkage_weakly_worse(self):
        for seed in range(5):
            ens_lo = draw_ensemble(BASE, 80, 1.22, 2.3, theta=0.5, seed=seed)
            ens_hi = draw_ensemble(BASE, 80, 1.22, 2.3, theta=2.0, seed=seed)
            assert run_cascade(ens_hi).total_failures >= run_cascade(ens_lo).total_failures

    def test_full_collapse_possible_with_tight_support(self):
        collapses = 0
        for seed in range(10):
            ens = draw_ensemble(BASE, 100, 1.22, 2.0, theta=1.0, seed=seed)
            if run_cascade(ens).full_collapse:
                collapses += 1
        assert collapses >= 1

    def test_simple_sectors_rejected(self):
        ens = SectorEnsemble(base_config(m=1), np.full(5, 2.0))
        with pytest.raises(ValueError):
            run_cascade(ens)

    def test_deterministic_given_seed(self):
        a = draw_ensemble(BASE, 50, 1.22, 2.5, theta=1.0, seed=77)
        b = draw_ensemble(BASE, 50, 1.22, 2.5, theta=1.0, seed=77)
        assert (a.kappas == b.kappas).all()
        ta, tb = run_cascade(a), run_cascade(b)
        assert [s.output for s in ta.steps] == [s.output for s in tb.steps]
