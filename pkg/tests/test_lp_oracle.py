import numpy as np
import pytest

from sdot import domain, solver

from lp_oracle import DiscreteProblem, grid_discretization, solve_discrete_lp

ANALYTIC_W2_SQ = 13 / 96  # two-site instance, split at x = 0.75


def two_site_problem():
    mesh = domain.square_mesh(1, "const:1")
    sites = domain.make_sites(
        np.array([[0.25, 0.5], [0.75, 0.5]]), np.array([0.75, 0.25]), 1.0
    )
    return mesh, sites


class TestLp:
    def test_single_pair(self):
        problem = DiscreteProblem(
            np.array([[0.0, 0.0]]), np.array([1.0]),
            np.array([[1.0, 0.0]]), np.array([1.0]),
        )
        cost, plan = solve_discrete_lp(problem)
        assert cost == pytest.approx(1.0, abs=1e-12)
        assert plan == [(0, 0, pytest.approx(1.0))]

    def test_identity_instance_costs_nothing(self):
        pos = np.array([[0.0, 0.0], [1.0, 0.0]])
        problem = DiscreteProblem(pos, np.array([0.5, 0.5]), pos.copy(), np.array([0.5, 0.5]))
        cost, plan = solve_discrete_lp(problem)
        assert cost == pytest.approx(0.0, abs=1e-12)
        assert sorted(plan) == [(0, 0, pytest.approx(0.5)), (1, 1, pytest.approx(0.5))]

    def test_mass_mismatch_is_infeasible(self):
        with pytest.raises(ValueError, match="infeasible"):
            DiscreteProblem(
                np.array([[0.0, 0.0]]), np.array([1.0]),
                np.array([[1.0, 0.0]]), np.array([0.5]),
            )

    def test_coarse_grid_against_semi_discrete(self):
        mesh, sites = two_site_problem()
        src_pos, src_mass = grid_discretization(mesh, 4)
        assert len(src_mass) == 16
        assert src_mass == pytest.approx(np.full(16, 1 / 16))
        problem = DiscreteProblem(src_pos, src_mass, sites.positions, sites.masses)
        cost, _ = solve_discrete_lp(problem)
        # cell boundaries align with the optimal split at x = 0.75, so the
        # parallel-axis identity pins the collapse error at exactly h^2/6
        gap = (1 / 4) ** 2 / 6
        assert cost == pytest.approx(ANALYTIC_W2_SQ - gap, abs=1e-10)

    def test_refinement_reduces_error(self):
        mesh, sites = two_site_problem()
        report = solver.newton(mesh, sites)
        w2_sq = report.w2**2
        assert w2_sq == pytest.approx(ANALYTIC_W2_SQ, rel=1e-12)

        errors = {}
        for k in (8, 16, 32):
            src_pos, src_mass = grid_discretization(mesh, k)
            cost, _ = solve_discrete_lp(
                DiscreteProblem(src_pos, src_mass, sites.positions, sites.masses)
            )
            errors[k] = abs(cost - w2_sq)
        assert errors[32] < errors[16] < errors[8]
        assert errors[32] <= 0.05 * w2_sq


class TestGridDiscretization:
    def test_exact_total_mass(self):
        mesh = domain.square_mesh(2, "linear-x")
        for k in (3, 8):
            _, masses = grid_discretization(mesh, k)
            assert masses.sum() == pytest.approx(mesh.total_mass, rel=1e-12)
