import math
import unittest
import warnings
from collections import abc

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from relheat import ab_kernel, datastructures, errors, quad


def heat_kernel_at(distance: float) -> abc.Callable[[float], float]:
    def kernel(s: float) -> float:
        gaussian = math.exp(-distance * distance / (4.0 * s))
        return gaussian / (4.0 * math.pi * s)

    return kernel


class SemiInfiniteTests(unittest.TestCase):
    def test_exponential(self) -> None:
        result = quad.integrate_semi_infinite(lambda x: math.exp(-x))
        self.assertAlmostEqual(result.value, 1.0, places=10)
        self.assertGreater(result.evaluations, 0)

    def test_singular_at_origin(self) -> None:
        result = quad.integrate_semi_infinite(
            lambda x: math.exp(-x) / math.sqrt(x)
        )
        self.assertAlmostEqual(result.value, math.sqrt(math.pi), places=9)

    def test_algebraic_decay(self) -> None:
        result = quad.integrate_semi_infinite(lambda x: 1.0 / (1.0 + x) ** 2)
        self.assertAlmostEqual(result.value, 1.0, places=9)

    def test_lower_limit(self) -> None:
        result = quad.integrate_semi_infinite(
            lambda x: math.exp(-x), lower=2.0
        )
        self.assertAlmostEqual(result.value, math.exp(-2.0), places=10)

    def test_vectorized_integrand(self) -> None:
        spec = datastructures.QuadratureSpec(vectorized=True)
        result = quad.integrate_semi_infinite(
            lambda x: x * x * np.exp(-x), spec
        )
        self.assertAlmostEqual(result.value, 2.0, places=9)

    def test_alternative_transforms(self) -> None:
        for transform in (
            datastructures.Transform.EXP_SUBSTITUTION,
            datastructures.Transform.NONE,
        ):
            spec = datastructures.QuadratureSpec(transform=transform)
            with self.subTest(transform=transform):
                result = quad.integrate_semi_infinite(
                    lambda x: math.exp(-x), spec
                )
                self.assertAlmostEqual(result.value, 1.0, places=9)

    def test_error_estimate_covers_the_true_error(self) -> None:
        spec = datastructures.QuadratureSpec(abs_tol=1e-6, rel_tol=1e-6)
        result = quad.integrate_semi_infinite(
            lambda x: math.exp(-x) / math.sqrt(x), spec
        )
        self.assertLessEqual(
            abs(result.value - math.sqrt(math.pi)), result.error + 1e-12
        )

    def test_non_finite_integrand(self) -> None:
        with self.assertRaises(errors.IntegrandError):
            quad.integrate_semi_infinite(lambda x: math.nan)

    def test_node_budget(self) -> None:
        spec = datastructures.QuadratureSpec(max_nodes=16)
        with self.assertRaises(errors.ConvergenceFailure) as context:
            quad.integrate_semi_infinite(lambda x: math.exp(-x), spec)
        self.assertTrue(math.isinf(context.exception.achieved))

    def test_integrand_of_order_one_at_the_lower_limit(self) -> None:
        with warnings.catch_warnings():
            warnings.simplefilter('error', errors.ToleranceNotReached)
            result = quad.integrate_semi_infinite(
                lambda x: math.exp(-50.0 * (x - 1.0)), lower=1.0
            )
        self.assertLess(abs(result.value - 0.02), 1e-11)

    def test_near_miss_returns_the_best_estimate(self) -> None:
        spec = datastructures.QuadratureSpec(
            abs_tol=1e-6, rel_tol=1e-6, max_nodes=200
        )
        with self.assertWarns(errors.ToleranceNotReached):
            result = quad.integrate_semi_infinite(
                lambda x: math.exp(-abs(x - 1.0)), spec
            )
        self.assertLess(abs(result.value - (2.0 - math.exp(-1.0))), 1e-2)
        self.assertGreater(result.error, 1e-6)

    def test_divergent_integral_fails(self) -> None:
        with self.assertRaises(errors.ConvergenceFailure) as context:
            quad.integrate_semi_infinite(lambda x: 1.0 / x)
        self.assertGreater(context.exception.achieved, 1.0)


class IntervalTests(unittest.TestCase):
    def test_logarithmic_endpoint(self) -> None:
        result = quad.integrate_interval(math.log, 0.0, 1.0)
        self.assertAlmostEqual(result.value, -1.0, places=10)

    def test_reversed_limits_change_sign(self) -> None:
        forward = quad.integrate_interval(math.cos, 0.0, 2.0)
        backward = quad.integrate_interval(math.cos, 2.0, 0.0)
        self.assertAlmostEqual(forward.value, math.sin(2.0), places=10)
        self.assertEqual(backward.value, -forward.value)

    def test_empty_interval(self) -> None:
        self.assertEqual(
            quad.integrate_interval(math.exp, 1.5, 1.5),
            datastructures.QuadResult(0.0, 0.0, 0),
        )


class SubordinationTests(unittest.TestCase):
    def test_input_validation(self) -> None:
        for t, mass in ((0.0, 0.0), (-1.0, 0.0), (1.0, -0.5), (math.inf, 0)):
            with self.subTest(t=t, mass=mass):
                self.assertRaises(
                    errors.DomainError,
                    quad.SubordinationInput,
                    heat_kernel_at(0.0),
                    t,
                    mass,
                )

    def test_weight_is_a_probability_density(self) -> None:
        result = quad.integrate_semi_infinite(
            lambda s: quad.subordination_weight(s, 2.0)
        )
        self.assertAlmostEqual(result.value, 1.0, places=7)
        self.assertEqual(quad.subordination_weight(0.0, 1.0), 0.0)

    def test_free_massless_kernel(self) -> None:
        for distance in (0.0, 0.5, 3.0):
            for t in (0.25, 1.0, 7.0):
                inp = quad.SubordinationInput(heat_kernel_at(distance), t)
                expected = ab_kernel.free_relativistic_kernel(
                    t, (0.0, 0.0), (distance, 0.0)
                )
                with self.subTest(distance=distance, t=t):
                    value = quad.subordinate_massless(inp).value
                    self.assertLessEqual(
                        abs(value - expected), 1e-8 * expected
                    )

    def test_free_massive_kernel(self) -> None:
        for mass in (0.5, 2.0):
            for t in (0.3, 4.0):
                inp = quad.SubordinationInput(heat_kernel_at(1.0), t, mass)
                expected = ab_kernel.free_relativistic_kernel(
                    t, (0.0, 0.0), (1.0, 0.0), mass
                )
                with self.subTest(mass=mass, t=t):
                    value = quad.subordinate_massive(inp).value
                    self.assertLessEqual(
                        abs(value - expected), 1e-8 * expected
                    )

    def test_zero_mass_delegates(self) -> None:
        inp = quad.SubordinationInput(heat_kernel_at(0.0), 2.0, 0.0)
        self.assertEqual(
            quad.subordinate_massive(inp), quad.subordinate_massless(inp)
        )

    def test_massless_diagonal_scaling(self) -> None:
        inp = quad.SubordinationInput(heat_kernel_at(0.0), 3.0)
        self.assertAlmostEqual(
            9.0 * quad.subordinate_massless(inp).value,
            1.0 / (2.0 * math.pi),
            places=10,
        )


class MomentTests(unittest.TestCase):
    def test_massless_moment_is_a_gamma_value(self) -> None:
        for a in (0.5, 2.0, 3.5):
            for t in (0.1, 1.0, 10.0):
                expected = math.gamma((a + 1) / 2) / (2 * t ** ((a + 1) / 2))
                with self.subTest(a=a, t=t):
                    value = quad.substituted_moment(a, 0.0, t).value
                    self.assertLessEqual(
                        abs(value - expected), 1e-9 * expected
                    )

    def test_gaussian_moment_matches_direct_moment(self) -> None:
        for a, mass, t in ((2.0, 0.0, 1.0), (2.0, 1.0, 0.5), (1.5, 3.0, 8)):
            with self.subTest(a=a, mass=mass, t=t):
                direct = quad.substituted_moment(a, mass, t).value
                oracle = quad.free_moment_oracle(a, mass, t)
                self.assertLessEqual(abs(direct - oracle), 1e-8 * oracle)

    def test_tiny_mass_moment_is_the_massless_moment(self) -> None:
        value = quad.substituted_moment(1.0, 1e-300, 1.0).value
        self.assertAlmostEqual(value, 0.5, places=9)

    def test_invalid_moment_parameters(self) -> None:
        for a, mass, t in ((0.0, 0.0, 1.0), (1.0, -1.0, 1.0), (1, 0, 0)):
            with self.subTest(a=a, mass=mass, t=t):
                self.assertRaises(
                    errors.DomainError, quad.substituted_moment, a, mass, t
                )

    @given(
        st.floats(min_value=0.5, max_value=4.0),
        st.floats(min_value=0.0, max_value=4.0),
        st.floats(min_value=0.2, max_value=20.0),
    )
    @settings(max_examples=25, deadline=None)
    def test_moment_decreases_with_time(
        self, a: float, mass: float, t: float
    ) -> None:
        early = quad.substituted_moment(a, mass, t).value
        late = quad.substituted_moment(a, mass, 2.0 * t).value
        self.assertLess(late, early)
