import numpy as np
import pytest

from fraglab.heterogeneous import (
    HeterogeneousEconomy,
    het_construct_equilibrium,
    het_critical_xi,
    het_ratio_solve,
    het_reliability_map,
    het_rho,
    het_shock,
    strongly_connected_components,
    weakest_link_analysis,
)
from fraglab.reliability import Technology, critical_point

# Seven products a..g: a-d form a fully reciprocal cluster (a also sources
# itself), e-g form a reciprocal cluster that additionally sources a.
INPUTS = {
    "a": ["a", "b", "c", "d"],
    "b": ["a", "c", "d"],
    "c": ["a", "b", "d"],
    "d": ["a", "b", "c"],
    "e": ["a", "f", "g"],
    "f": ["a", "e", "g"],
    "g": ["a", "e", "f"],
}
N_BY_ROW = {"a": 3, "b": 3, "c": 2, "d": 2, "e": 2, "f": 2, "g": 2}


def economy_one():
    return HeterogeneousEconomy(
        products=tuple("abcdefg"),
        inputs=INPUTS,
        n=N_BY_ROW,
        alpha={"a": 40, "b": 30, "c": 15, "d": 10, "e": 3.5, "f": 3, "g": 2.8},
        beta={"a": 40.44, "b": 39.85, "c": 2.30, "d": 2.28, "e": 0.30, "f": 0.40, "g": 0.50},
    )


def economy_two():
    return HeterogeneousEconomy(
        products=tuple("abcdefg"),
        inputs=INPUTS,
        n=N_BY_ROW,
        alpha={"a": 4, "b": 5, "c": 6, "d": 7, "e": 10, "f": 15, "g": 20},
        beta={"a": 10.0, "b": 4.0, "c": 0.2, "d": 0.2, "e": 1.36, "f": 1.36, "g": 1.43},
    )


PINS_ONE = np.array([0.8873, 0.8773, 0.8673, 0.8573, 0.7573, 0.7473, 0.7373])
PINS_TWO = np.array([0.7965, 0.8065, 0.8165, 0.8265, 0.8965, 0.9065, 0.9165])

X_ONE = np.array([
    [0.8873, 0.8872, 0.9315, 0.9385, 0, 0, 0],
    [0.8773, 0, 0.9204, 0.9272, 0, 0, 0],
    [0.8673, 0.8672, 0, 0.9084, 0, 0, 0],
    [0.8573, 0.8572, 0.8915, 0, 0, 0, 0],
    [0.7573, 0, 0, 0, 0, 0.9726, 0.9783],
    [0.7473, 0, 0, 0, 0.9464, 0, 0.9572],
    [0.7373, 0, 0, 0, 0.9265, 0.9317, 0],
])
R_ONE = np.array([0.9926, 0.9928, 0.9387, 0.9307, 0.5384, 0.5262, 0.5145])

X_TWO = np.array([
    [0.7965, 0.7792, 0.8735, 0.8663, 0, 0, 0],
    [0.8065, 0, 0.8859, 0.8785, 0, 0, 0],
    [0.8165, 0.8029, 0, 0.8681, 0, 0, 0],
    [0.8265, 0.8124, 0.8855, 0, 0, 0, 0],
    [0.8965, 0, 0, 0, 0, 0.8947, 0.8894],
    [0.9065, 0, 0, 0, 0.9103, 0, 0.8992],
    [0.9165, 0, 0, 0, 0.9204, 0.9146, 0],
])
R_TWO = np.array([0.8837, 0.9132, 0.7653, 0.7756, 0.8778, 0.8865, 0.8951])


class TestReliabilityMap:
    def test_all_ones_is_fixed(self):
        econ = economy_one()
        ones = np.ones(7)
        X = np.where(econ.adjacency(), 1.0, 0.0)
        assert het_reliability_map(econ, X, ones) == pytest.approx(ones)

    def test_zero_edge_forces_zero_component(self):
        econ = economy_one()
        X = np.where(econ.adjacency(), 1.0, 0.0)
        X[0, 1] = 0.0  # a loses its b input entirely
        out = het_reliability_map(econ, X, np.ones(7))
        assert out[0] == 0.0
        assert (out[1:] == 1.0).all()

    def test_reference_state_is_a_fixed_point(self):
        # the reference matrix and reliabilities reproduce each other to
        # their quoted precision
        econ = economy_one()
        out = het_reliability_map(econ, X_ONE, R_ONE)
        assert np.max(np.abs(out - R_ONE)) < 1e-4


class TestHetRho:
    def test_scaled_down_matrix_collapses(self):
        econ = economy_one()
        assert (het_rho(econ, 0.5 * X_ONE) == 0.0).all()

    def test_largest_fixed_point_dominates_reference_branch(self):
        # from all-ones the iteration lands on the componentwise-largest
        # fixed point, which for the near-critical e-g cluster sits above the
        # equilibrium branch the construction tracks
        econ = economy_one()
        r = het_rho(econ, X_ONE)
        assert (r >= R_ONE - 5e-4).all()
        assert np.max(np.abs(r[:4] - R_ONE[:4])) < 5e-4

    def test_example_two_largest_fp_matches_reference(self):
        # example 2's reference state is a regular stable point and iteration
        # from ones lands on it; the 4-decimal rounding of the reference X is
        # amplified by 1/(1 - lambda) ~ 26 near criticality, hence the band
        econ = economy_two()
        r = het_rho(econ, X_TWO)
        assert np.max(np.abs(r - R_TWO)) < 7e-3
        assert (r >= R_TWO - 5e-4).all()

    def test_fixed_point_residual(self):
        econ = economy_two()
        r = het_rho(econ, X_TWO)
        assert np.max(np.abs(het_reliability_map(econ, X_TWO, r) - r)) < 1e-11

    def test_monotone_in_single_strength(self):
        econ = economy_two()
        X = X_TWO.copy()
        base = het_rho(econ, X)
        X[2, 3] = min(1.0, X[2, 3] + 0.03)
        bumped = het_rho(econ, X)
        assert (bumped >= base - 1e-12).all()

    def test_no_small_fixed_points(self):
        econ = economy_one()
        rng = np.random.default_rng(3)
        for _ in range(20):
            r = rng.uniform(0.0, 0.01, size=7)
            out = het_reliability_map(econ, X_ONE, r)
            assert (out < r).all() or (r == 0).any()


class TestCriticalXi:
    def test_homogeneous_reduction(self):
        # identical products: every row needs the same two inputs with the
        # same multisourcing; xi_crit must equal the homogeneous x_crit
        econ = HeterogeneousEconomy(
            products=("u", "v", "w"),
            inputs={"u": ["v", "w"], "v": ["w", "u"], "w": ["u", "v"]},
            n={"u": 2, "v": 2, "w": 2},
            alpha={"u": 1, "v": 1, "w": 1},
            beta={"u": 1, "v": 1, "w": 1},
        )
        cp = critical_point(Technology(2, 2))
        assert het_critical_xi(econ) == pytest.approx(cp.x_crit, abs=1e-6)

    def test_single_sourcing_means_no_threshold_below_one(self):
        econ = HeterogeneousEconomy(
            products=("u", "v"),
            inputs={"u": ["v", "u"], "v": ["u", "v"]},
            n={"u": 1, "v": 1},
            alpha={"u": 1, "v": 1},
            beta={"u": 1, "v": 1},
        )
        assert het_critical_xi(econ) == pytest.approx(1.0, abs=1e-6)

    def test_example_graph_against_grid(self):
        econ = economy_one()
        xi = het_critical_xi(econ)
        # dense-grid oracle on the same positivity predicate
        xis = np.linspace(max(0.0, xi - 0.02), min(1.0, xi + 0.02), 81)
        strength = lambda v: np.where(econ.adjacency(), v, 0.0)
        alive = [bool((het_rho(econ, strength(v)) > 1e-9).any()) for v in xis]
        flip = next(k for k in range(1, len(alive)) if alive[k] and not alive[k - 1])
        assert xis[flip - 1] <= xi <= xis[flip] + 1e-9


class TestRatioSolve:
    def test_symmetric_inputs_reproduce_pin(self):
        econ = HeterogeneousEconomy(
            products=("u", "v", "w"),
            inputs={"u": ["v", "w"], "v": ["w", "u"], "w": ["u", "v"]},
            n={"u": 2, "v": 2, "w": 2},
            alpha={"u": 1, "v": 1, "w": 1},
            beta={"u": 1, "v": 1, "w": 1},
        )
        r = np.full(3, 0.9)
        row = het_ratio_solve(econ, r, "u", 0.77)
        assert row[econ.index("w")] == pytest.approx(0.77, abs=1e-10)

    def test_example_one_row_a(self):
        econ = economy_one()
        row = het_ratio_solve(econ, R_ONE, "a", 0.8873)
        expect = [0.8873, 0.8872, 0.9315, 0.9385]
        assert np.max(np.abs(row[:4] - expect)) < 5e-4

    def test_example_two_row_e(self):
        econ = economy_two()
        row = het_ratio_solve(econ, R_TWO, "e", 0.8965)
        assert row[econ.index("f")] == pytest.approx(0.8947, abs=5e-4)
        assert row[econ.index("g")] == pytest.approx(0.8894, abs=5e-4)

    def test_unattainable_target_reported(self):
        # single-sourced edge with a tiny cost weight: the ratio target falls
        # below the left side's infimum r_j, so no root exists on (0, 1/r_j]
        econ = HeterogeneousEconomy(
            products=("u", "v"),
            inputs={"u": ["v", "u"], "v": ["u", "v"]},
            n={"u": 1, "v": 1},
            alpha={"u": 1, "v": 1},
            beta={"u": 1, "v": 1},
            gamma={("u", "u"): 0.01},
        )
        with pytest.raises(ValueError):
            het_ratio_solve(econ, np.array([0.99, 0.99]), "u", 0.99)


@pytest.fixture(scope="module")
def eq_one():
    return het_construct_equilibrium(economy_one(), PINS_ONE)


@pytest.fixture(scope="module")
def eq_two():
    return het_construct_equilibrium(economy_two(), PINS_TWO)


class TestConstructionExampleOne:
    @pytest.fixture
    def eq(self, eq_one):
        return eq_one

    def test_stops_on_critical_surface(self, eq):
        assert eq.at_fold

    def test_reliabilities(self, eq):
        # a-d reproduce the reference values; the e-g cluster sits on the fold,
        # about 1.5e-3 below the (unconverged) reference figures
        assert np.max(np.abs(eq.r[:4] - R_ONE[:4])) < 5e-4
        assert np.max(np.abs(eq.r[4:] - R_ONE[4:])) < 2e-3

    def test_strength_matrix(self, eq):
        assert np.max(np.abs(eq.X[:4] - X_ONE[:4])) < 5e-4
        assert np.max(np.abs(eq.X[4:] - X_ONE[4:])) < 3e-3

    def test_regimes(self, eq):
        assert eq.critical.tolist() == [False, False, False, False, True, True, True]

    def test_calibration(self, eq):
        G_ref = [21.0836, 17.7538, 3.2818, 3.0451, 2.6780, 2.5859, 2.4990]
        fbar_ref = [0.4764, 0.4112, 0.8322, 0.7473, 0.4362, 0.2623, 0.2089]
        beta_ref = [40.4397, 39.8544, 2.3021, 2.2770, 0.30, 0.40, 0.50]
        pi_ref = [0, 0, 0, 0, 0.0728, 0.0707, 0.0461]
        assert np.max(np.abs(eq.G - G_ref)) < 1.5e-2
        assert np.max(np.abs(eq.f_bar - fbar_ref)) < 5e-3
        assert np.max(np.abs(eq.beta - beta_ref)) < 5e-2
        assert np.max(np.abs(eq.net_profit - pi_ref)) < 2e-3
        # noncritical products: zero marginal profit by construction
        assert np.max(np.abs(eq.net_profit[:4])) < 1e-10
        # critical products earn strictly positive margins
        assert (eq.net_profit[4:] > 0).all()

    def test_marginal_conditions_hold(self, eq):
        from fraglab.heterogeneous import _marginal_benefit_matrix
        econ = economy_one()
        mb = _marginal_benefit_matrix(econ, eq.X, eq.r, eq.G)
        mc = np.where(econ.adjacency(), eq.X, 0.0)
        assert np.max(np.abs(mb - mc)[econ.adjacency()]) < 1e-6


class TestConstructionExampleTwo:
    @pytest.fixture
    def eq(self, eq_two):
        return eq_two

    def test_reaches_trajectory_end(self, eq):
        assert not eq.at_fold
        assert np.max(np.abs(eq.pins - PINS_TWO)) < 1e-12

    def test_reliabilities(self, eq):
        assert np.max(np.abs(eq.r - R_TWO)) < 5e-4

    def test_strength_matrix(self, eq):
        assert np.max(np.abs(eq.X - X_TWO)) < 5e-4

    def test_regimes(self, eq):
        assert eq.critical.tolist() == [True, True, True, True, False, False, False]

    def test_calibration(self, eq):
        G_ref = [3.7758, 3.9399, 1.9995, 2.0736, 2.6608, 2.7929, 2.9372]
        fbar_ref = [0.0634, 0.2322, 0.8712, 0.9074, 0.8361, 0.9180, 0.9531]
        beta_ref = [10.0, 4.0, 0.2, 0.2, 1.3613, 1.3580, 1.4345]
        pi_ref = [1.3246, 1.5655, 0.3236, 0.3632, 0, 0, 0]
        assert np.max(np.abs(eq.G - G_ref)) < 1e-3
        assert np.max(np.abs(eq.f_bar - fbar_ref)) < 1e-3
        assert np.max(np.abs(eq.beta - beta_ref)) < 1e-3
        assert np.max(np.abs(eq.net_profit - pi_ref)) < 2e-3
        assert np.max(np.abs(eq.net_profit[4:])) < 1e-10
        assert (eq.net_profit[:4] > 0).all()

    def test_marginal_conditions_hold(self, eq):
        from fraglab.heterogeneous import _marginal_benefit_matrix
        econ = economy_two()
        mb = _marginal_benefit_matrix(econ, eq.X, eq.r, eq.G)
        mc = np.where(econ.adjacency(), eq.X, 0.0)
        assert np.max(np.abs(mb - mc)[econ.adjacency()]) < 1e-6


def test_excessive_critical_entry_slope_rejected():
    # beta on a critical product must leave the marginal entrant a strictly
    # positive margin; a huge slope cannot be part of the construction
    econ = HeterogeneousEconomy(
        products=tuple("abcdefg"),
        inputs=INPUTS,
        n=N_BY_ROW,
        alpha={"a": 40, "b": 30, "c": 15, "d": 10, "e": 3.5, "f": 3, "g": 2.8},
        beta={"a": 40.44, "b": 39.85, "c": 2.30, "d": 2.28,
              "e": 50.0, "f": 0.40, "g": 0.50},
    )
    with pytest.raises(ValueError, match="beta too steep"):
        het_construct_equilibrium(econ, PINS_ONE)


class TestWeakestLink:
    def test_scc_structure(self):
        econ = economy_one()
        comps = strongly_connected_components(econ.adjacency())
        groups = {frozenset(econ.products[i] for i in grp) for grp in comps}
        assert groups == {frozenset("abcd"), frozenset("efg")}

    def test_example_one_failure_sets(self, eq_one):
        econ = economy_one()
        rep = weakest_link_analysis(econ, eq_one)
        assert rep.critical == {"a": False, "b": False, "c": False, "d": False,
                                "e": True, "f": True, "g": True}
        # shocks to any critical product fell exactly the e-g cluster
        for p in "efg":
            assert sorted(rep.failure_sets[p]) == ["e", "f", "g"]

    def test_example_two_failure_sets(self, eq_two):
        econ = economy_two()
        rep = weakest_link_analysis(econ, eq_two)
        # a shock to any of the critical a-d products cascades to all seven
        for p in "abcd":
            assert sorted(rep.failure_sets[p]) == list("abcdefg")

    def test_mixed_component_rejected(self, eq_one):
        econ = economy_one()
        broken = type(eq_one)(**{**eq_one.__dict__, "critical": np.array(
            [True, False, False, False, True, True, True])})
        with pytest.raises(RuntimeError):
            weakest_link_analysis(econ, broken)


class TestShocks:
    def test_zero_shock_is_identity(self, eq_one):
        econ = economy_one()
        assert het_shock(econ, eq_one, ("a", "b"), 0.0) == pytest.approx(eq_one.r)

    def test_example_one_shock_to_a(self, eq_one):
        econ = economy_one()
        r = het_shock(econ, eq_one, ("a", "b"), 0.01)
        # a adjusts continuously; the critical e-g cluster collapses
        assert 0.0 < r[0] < eq_one.r[0]
        assert eq_one.r[0] - r[0] < 0.05
        assert (r[4:] == 0.0).all()

    def test_example_two_shock_to_e(self, eq_two):
        econ = economy_two()
        r = het_shock(econ, eq_two, ("e", "f"), 0.01)
        i_e = econ.index("e")
        assert 0.0 < r[i_e] < eq_two.r[i_e]
        assert eq_two.r[i_e] - r[i_e] < 0.05  # small shock, small continuous drop
        # a-d do not source e,f,g: unchanged
        assert np.max(np.abs(r[:4] - eq_two.r[:4])) < 1e-9

    def test_example_two_shock_to_a_fells_everything(self, eq_two):
        econ = economy_two()
        r = het_shock(econ, eq_two, ("a", "b"), 0.01)
        assert (r == 0.0).all()
