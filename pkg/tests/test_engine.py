import dataclasses
import math

import numpy as np
import pytest

from scenariopac.engine import (
    beta_moment_quadrature,
    error_vs_true,
    golden_section,
    infnorm_expected_error,
    nested_run,
    sampled_marginal_on_grid,
    solve_scenario,
)
from scenariopac.errors import InputError, UnavailableError
from scenariopac.models import (
    DecisionBox,
    MinimizerConfig,
    MinmaxProblem,
    SampleBatch,
    UncertaintyDescriptor,
)
from scenariopac.problems import infnorm_cube, infnorm_gaussian, ramp_gaussian, sampled_marginal, trig_toy
from scenariopac.sampling import sample, spawn_substream


def _batch(problem, scenarios, seed=0):
    return SampleBatch(np.asarray(scenarios, dtype=float), seed, problem.uncertainty)


def _squared_distance_problem():
    return MinmaxProblem(
        name="squared_distance",
        decision=DecisionBox((0.0,), (1.0,)),
        uncertainty=UncertaintyDescriptor("torus", 1),
        cost=lambda x, xi: (x[:, :1] - xi[:, 0][None, :]) ** 2,
    )


class TestGoldenSection:
    def test_interior_minimum(self):
        x, fx = golden_section(lambda t: (t - 0.3) ** 2, 0.0, 1.0, tol=1e-10)
        assert x == pytest.approx(0.3, abs=1e-6)
        assert fx == pytest.approx(0.0, abs=1e-10)

    def test_boundary_minimum(self):
        x, fx = golden_section(lambda t: t, -1.0, 1.0)
        assert x == -1.0
        assert fx == -1.0


class TestSolveScenario:
    @pytest.mark.parametrize("n", [1, 10, 1000])
    def test_ramp_is_minus_one(self, n):
        problem = ramp_gaussian()
        for r in range(10):
            batch = sample(problem.uncertainty, n, spawn_substream(123, r))
            assert solve_scenario(problem, batch).value == -1.0

    def test_ramp_ties_go_to_lowest_point(self):
        problem = ramp_gaussian()
        solution = solve_scenario(problem, sample(problem.uncertainty, 50, 1))
        assert solution.minimizer == (-10.0,)
        assert solution.refined is False

    def test_infnorm_two_scenarios(self):
        problem = infnorm_cube(2)
        solution = solve_scenario(problem, _batch(problem, [[0.5, 0.1], [-0.8, 0.3]]))
        assert solution.value == pytest.approx(-0.25)
        assert solution.minimizer == (0.0,)

    def test_trig_single_scenario(self):
        problem = trig_toy()
        solution = solve_scenario(problem, _batch(problem, [[0.25]]))
        assert solution.value == pytest.approx(-1.0)
        assert solution.minimizer == (-1.0,)

    def test_refinement_beats_grid(self):
        problem = _squared_distance_problem()
        batch = _batch(problem, [[0.123456789]])
        solution = solve_scenario(problem, batch, MinimizerConfig(grid_points_per_dim=11))
        assert solution.refined is True
        assert solution.value < solution.grid_value
        assert solution.minimizer[0] == pytest.approx(0.123456789, abs=1e-6)

    def test_no_refinement(self):
        problem = _squared_distance_problem()
        batch = _batch(problem, [[0.123456789]])
        solution = solve_scenario(problem, batch, MinimizerConfig(grid_points_per_dim=11, refinement="none"))
        assert solution.refined is False
        assert solution.minimizer == pytest.approx((0.1,))

    def test_value_matches_sampled_marginal(self):
        problem = infnorm_gaussian(3)
        batch = sample(problem.uncertainty, 200, 4)
        solution = solve_scenario(problem, batch)
        assert solution.value == pytest.approx(sampled_marginal(problem, solution.minimizer, batch), abs=1e-9)

    def test_lower_bound(self):
        problem = infnorm_cube(4)
        for r in range(5):
            solution = solve_scenario(problem, sample(problem.uncertainty, 100, r))
            assert solution.value <= problem.optimum

    def test_empty_batch(self):
        problem = infnorm_cube(1)
        with pytest.raises(InputError, match="nonempty"):
            solve_scenario(problem, _batch(problem, np.zeros((0, 1))))

    def test_dimension_mismatch(self):
        problem = infnorm_cube(2)
        with pytest.raises(InputError, match="does not match"):
            solve_scenario(problem, sample(infnorm_cube(3).uncertainty, 10, 0))

    def test_echoes_batch(self):
        problem = infnorm_cube(1)
        cfg = MinimizerConfig(grid_points_per_dim=101)
        solution = solve_scenario(problem, sample(problem.uncertainty, 7, 99), cfg)
        assert solution.sample_size == 7
        assert solution.seed == 99
        assert solution.config == cfg


class TestParallelScan:
    def test_workers_match_serial(self):
        problem = infnorm_gaussian(3)
        batch = sample(problem.uncertainty, 500, 17)
        _, serial = sampled_marginal_on_grid(problem, batch, workers=1)
        _, threaded = sampled_marginal_on_grid(problem, batch, workers=4)
        assert np.array_equal(serial, threaded)

    def test_solution_independent_of_workers(self):
        problem = ramp_gaussian()
        batch = sample(problem.uncertainty, 300, 5)
        assert solve_scenario(problem, batch, workers=1) == solve_scenario(problem, batch, workers=3)


class TestErrorVsTrue:
    def test_ramp_error_is_one(self):
        problem = ramp_gaussian()
        solution = solve_scenario(problem, sample(problem.uncertainty, 100, 0))
        assert error_vs_true(solution, problem) == 1.0

    def test_degenerate_scenario(self):
        problem = infnorm_cube(1)
        solution = solve_scenario(problem, _batch(problem, [[0.0]]))
        assert solution.value == 0.0
        assert error_vs_true(solution, problem) == 0.0

    def test_unknown_optimum(self):
        problem = dataclasses.replace(infnorm_cube(1), optimum=None)
        solution = solve_scenario(problem, sample(problem.uncertainty, 5, 0))
        with pytest.raises(UnavailableError):
            error_vs_true(solution, problem)


class TestNestedRun:
    def test_monotone_and_below_optimum(self):
        solutions = nested_run(infnorm_cube(5), 3, (10, 100, 1000))
        values = [s.value for s in solutions]
        assert values[0] <= values[1] + 1e-9
        assert values[1] <= values[2] + 1e-9
        assert values[2] <= 0.0

    def test_ramp_all_minus_one(self):
        assert [s.value for s in nested_run(ramp_gaussian(), 8, (1, 10, 100))] == [-1.0, -1.0, -1.0]

    def test_uses_prefixes_of_one_stream(self):
        problem = infnorm_cube(2)
        solutions = nested_run(problem, 21, (5, 50))
        direct = solve_scenario(problem, sample(problem.uncertainty, 50, 21).head(5))
        assert solutions[0].value == direct.value

    @pytest.mark.parametrize("sizes", [(100, 10), (10, 10), ()])
    def test_rejects_bad_sizes(self, sizes):
        with pytest.raises(InputError):
            nested_run(infnorm_cube(1), 0, sizes)


class TestOrderStatisticOracle:
    def test_d1_n1(self):
        assert infnorm_expected_error(1, 1) == pytest.approx(1.0 / 3.0)

    def test_d1_closed_form(self):
        for n in (1, 5, 100):
            assert infnorm_expected_error(1, n) == pytest.approx(2.0 / ((n + 1) * (n + 2)))

    def test_d20_n10000(self):
        assert infnorm_expected_error(20, 10_000) == pytest.approx(math.gamma(1.1) * 10 ** -0.4, rel=1e-3)

    @pytest.mark.parametrize("d,n", [(1, 1), (1, 100), (5, 1000), (20, 10_000), (3, 7)])
    def test_matches_quadrature(self, d, n):
        assert infnorm_expected_error(d, n) == pytest.approx(beta_moment_quadrature(d, n), rel=1e-6)

    def test_rejects_bad_arguments(self):
        with pytest.raises(InputError):
            infnorm_expected_error(0, 10)
