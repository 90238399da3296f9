import numpy as np
import pytest

from aimdalloc import (
    CostCoefficients,
    CostEnsemble,
    CostFunction,
    UnsupportedFamilyError,
    estimate_gamma,
    evaluate_cost,
    partial_derivative,
    sample_cost_function,
    sample_cost_functions,
    verify_assumption1,
)

from _stand_ins import Constant, Negation, WeightedSquare


def central_difference(f, x, j, h=1e-5):
    """Independent derivative estimate: (f(x + h e_j) - f(x - h e_j)) / 2h."""
    up = np.array(x, dtype=float)
    down = np.array(x, dtype=float)
    up[j] += h
    down[j] -= h
    return (evaluate_cost(f, up) - evaluate_cost(f, down)) / (2.0 * h)


class TestSampling:
    def test_same_seed_same_function(self):
        assert sample_cost_function(12345) == sample_cost_function(12345)

    def test_case_frequencies_uniform(self):
        rng = np.random.default_rng(7)
        draws = [sample_cost_function(rng).case_id for _ in range(10_000)]
        counts = np.bincount(draws, minlength=4)[1:]
        freqs = counts / len(draws)
        assert np.all(np.abs(freqs - 1.0 / 3.0) <= 0.02)

    def test_coefficient_ranges(self):
        rng = np.random.default_rng(11)
        for _ in range(2000):
            c = sample_cost_function(rng).coeffs
            assert 1 <= c.a <= 25
            assert 1 <= c.b <= 20
            assert 1 <= c.c <= 15
            assert 1 <= c.d <= 10

    def test_every_coefficient_value_reachable(self):
        rng = np.random.default_rng(3)
        seen_a = {sample_cost_function(rng).coeffs.a for _ in range(5000)}
        assert seen_a == set(range(1, 26))

    def test_resource_count_restriction(self):
        with pytest.raises(UnsupportedFamilyError):
            sample_cost_function(0, m=2)

    def test_batch_order_is_stream_order(self):
        fns = sample_cost_functions(99, 5)
        rng = np.random.default_rng(99)
        fns_again = tuple(sample_cost_function(rng) for _ in range(5))
        assert fns == fns_again


class TestEvaluation:
    def test_case2_unit_coefficients(self):
        f = CostFunction(2, CostCoefficients(1, 1, 1, 1))
        assert evaluate_cost(f, (1.0, 1.0, 1.0)) == pytest.approx(4.0, abs=1e-12)

    def test_case1_hand_value(self):
        # a(1 + 1/2) + b(2 + 1/2) + c(1 + 1/4) + d/8 at the all-ones point
        f = CostFunction(1, CostCoefficients(a=2, b=1, c=1, d=8))
        assert evaluate_cost(f, (1.0, 1.0, 1.0)) == pytest.approx(7.75, abs=1e-12)

    def test_zero_allocation_costs_nothing(self):
        for case in (1, 2, 3):
            f = CostFunction(case, CostCoefficients(5, 5, 5, 5))
            assert evaluate_cost(f, np.zeros(3)) == 0.0

    def test_negative_component_rejected(self):
        f = CostFunction(2, CostCoefficients(1, 1, 1, 1))
        with pytest.raises(ValueError):
            evaluate_cost(f, (1.0, -0.1, 0.0))

    def test_nonnegative_everywhere_sampled(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            f = sample_cost_function(rng)
            x = rng.random(3) * 3.0
            assert evaluate_cost(f, x) >= 0.0


class TestPartialDerivatives:
    def test_case2_quadratic_slope(self):
        f = CostFunction(2, CostCoefficients(1, 1, 1, 1))
        assert partial_derivative(f, (1.0, 0.3, 0.7), 0) == pytest.approx(2.0, abs=1e-12)

    def test_case3_hand_partial(self):
        # 2 b x1 + d x1^5 at x1 = 1 with b=1, d=6
        f = CostFunction(3, CostCoefficients(a=1, b=1, c=1, d=6))
        assert partial_derivative(f, (0.5, 1.0, 0.5), 1) == pytest.approx(8.0, abs=1e-12)

    def test_index_out_of_range(self):
        f = CostFunction(1, CostCoefficients(1, 1, 1, 1))
        with pytest.raises(IndexError):
            partial_derivative(f, (1.0, 1.0, 1.0), 3)

    def test_matches_central_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            f = sample_cost_function(rng)
            x = 0.1 + rng.random(3) * 1.9
            for j in range(3):
                exact = partial_derivative(f, x, j)
                approx = central_difference(f, x, j)
                assert exact == pytest.approx(approx, rel=1e-6)

    def test_positive_for_positive_coordinates(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            f = sample_cost_function(rng)
            x = 0.01 + rng.random(3) * 2.0
            grad = f.gradient(x)
            assert np.all(grad > 0.0)


class TestEnsembleConsistency:
    def test_values_and_gradients_match_scalar_api(self):
        rng = np.random.default_rng(21)
        fns = sample_cost_functions(rng, 40)
        ens = CostEnsemble(fns)
        x = rng.random((40, 3)) * 2.5
        vals = ens.values(x)
        grads = ens.gradients(x)
        for i, f in enumerate(fns):
            assert vals[i] == pytest.approx(f.value(x[i]), rel=1e-13)
            np.testing.assert_allclose(grads[i], f.gradient(x[i]), rtol=1e-13)

    def test_rejects_foreign_functions(self):
        with pytest.raises(TypeError):
            CostEnsemble([WeightedSquare(1.0)])


class TestAssumptionCheck:
    def test_family_members_pass(self):
        rng = np.random.default_rng(17)
        box = [(0.01, 3.0)] * 3
        for _ in range(10):
            f = sample_cost_function(rng)
            report = verify_assumption1(f, box, samples=1000, rng=rng)
            assert report.passed, report.first_violation

    def test_decreasing_function_fails_positivity(self):
        report = verify_assumption1(Negation(), [(0.01, 3.0)], samples=10)
        assert not report.passed
        assert report.first_violation.kind == "positivity"

    def test_constant_function_fails(self):
        report = verify_assumption1(Constant(), [(0.01, 3.0)], samples=10)
        assert not report.passed
        assert report.first_violation.kind == "positivity"


class TestGammaEstimate:
    def test_pure_square_gives_half(self):
        # ratio x / (2x) is identically 1/2 on any positive box
        got = estimate_gamma([WeightedSquare(1.0)], [(0.1, 2.0)], grid=16)
        np.testing.assert_allclose(got, [0.5], rtol=1e-12)

    def test_min_over_union(self):
        fns = [WeightedSquare(1.0), WeightedSquare(4.0)]
        lone = estimate_gamma([fns[1]], [(0.1, 2.0)], grid=8)
        both = estimate_gamma(fns, [(0.1, 2.0)], grid=8)
        np.testing.assert_allclose(both, np.minimum(lone, 0.5), rtol=1e-12)

    def test_sampled_population_is_below_configured_value(self, bundled_config):
        fns = sample_cost_functions(bundled_config.seed, 60)
        box = [(0.1, p.capacity) for p in bundled_config.resources]
        got = estimate_gamma(fns, box, grid=5)
        assert np.all(got <= 1.0 / 90.0 + 1e-12)

    def test_scaling_factor_bounded_by_safety(self):
        rng = np.random.default_rng(31)
        fns = sample_cost_functions(rng, 8)
        box = [(0.2, 2.0)] * 3
        grid = 4
        safety = 0.5
        gam = estimate_gamma(fns, box, grid=grid, safety=safety)
        axes = [np.linspace(lo, hi, grid) for lo, hi in box]
        pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
        for f in fns:
            for p in pts:
                for j in range(3):
                    lam = gam[j] * f.partial(p, j) / p[j]
                    assert lam <= safety + 1e-12

    def test_empty_function_list_rejected(self):
        with pytest.raises(ValueError):
            estimate_gamma([], [(0.1, 1.0)], grid=4)


class TestSerialization:
    def test_round_trip(self):
        f = CostFunction(3, CostCoefficients(7, 2, 15, 10))
        assert CostFunction.from_dict(f.to_dict()) == f

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            CostFunction.from_dict({"case_id": 1, "a": 1, "b": 1, "c": 1, "d": 1, "e": 9})

    def test_out_of_range_coefficient_rejected(self):
        with pytest.raises(ValueError):
            CostFunction.from_dict({"case_id": 1, "a": 26, "b": 1, "c": 1, "d": 1})
