import json
import math
import typing
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from relheat import ab_kernel, bounds_fit, datastructures, errors, field

TIMES = tuple(float(t) for t in np.geomspace(1.0, 100.0, 9))
STEP_PAIRS = (((1.0, 0.0), (1.0, 0.0)), ((1.0, 0.0), (0.0, 1.0)))
KIND = bounds_fit.BoundKind
INVALID_SPECS: tuple[dict[str, typing.Any], ...] = (
    {'kind': KIND.UNIFORM_REL, 'kappa': 0.6},
    {'kind': KIND.MAGNETIC_POLY, 'kappa': 0.25, 'beta': 0.3},
    {'kind': KIND.MASSIVE_POLY, 'kappa': 0.25, 'beta': -0.1},
    {'kind': KIND.MAGNETIC_LOG, 'theta': 1.5},
    {'kind': KIND.AB_MODE, 'kappa': 0.5, 'eps': 1.0},
    {'kind': KIND.AB_WEIGHTED, 'kappa': 0.5, 'eps': 0.0},
    {'kind': KIND.MOMENT, 'a': 0.0},
    {'kind': KIND.DIAMAG, 'constant': -1.0},
    {'kind': KIND.AB_MODE, 'kappa': 0.5, 'eps': 0.5, 'nu': -1.0},
)


def free_samples(
    distances: tuple[float, ...] = (0.0, 1.0, 3.0),
) -> list[datastructures.KernelSample]:
    samples = []
    for t in TIMES:
        for distance in distances:
            x, y = (distance, 0.0), (0.0, 0.0)
            samples.append(
                datastructures.KernelSample(
                    t,
                    x,
                    y,
                    ab_kernel.free_relativistic_kernel(t, x, y),
                    method=datastructures.Method.FREE_CLOSED,
                )
            )
    return samples


def power_law_samples(
    x: datastructures.Point, y: datastructures.Point, scale: float
) -> list[datastructures.KernelSample]:
    return [
        datastructures.KernelSample(t, x, y, complex(0.0, scale / t**2))
        for t in TIMES
    ]


class BoundSpecTests(unittest.TestCase):
    def test_parameter_ranges(self) -> None:
        for changes in INVALID_SPECS:
            with self.subTest(**changes):
                self.assertRaises(
                    errors.DomainError, bounds_fit.BoundSpec, **changes
                )

    def test_kind_is_coerced(self) -> None:
        spec = bounds_fit.BoundSpec('diamag')  # type: ignore[arg-type]
        self.assertIs(spec.kind, bounds_fit.BoundKind.DIAMAG)
        self.assertEqual(spec.as_dict()['kind'], 'diamag')

    def test_with_constant(self) -> None:
        spec = bounds_fit.BoundSpec(
            bounds_fit.BoundKind.MOMENT, a=2.0, secondary=3.0
        )
        self.assertEqual(spec.with_constant(2.0).secondary, 3.0)
        self.assertEqual(spec.with_constant(2.0, 5.0).secondary, 5.0)


class BoundRHSTests(unittest.TestCase):
    def rhs(
        self,
        x: datastructures.Point,
        y: datastructures.Point,
        t: float,
        **kwargs: typing.Any,  # noqa: ANN401
    ) -> float:
        spec = bounds_fit.BoundSpec(**kwargs)
        return bounds_fit.bound_rhs(spec, x, y, t)

    def test_polynomial_bounds(self) -> None:
        origin = (0.0, 0.0)
        self.assertAlmostEqual(
            self.rhs(
                origin,
                origin,
                2.0,
                kind='magnetic_poly',
                constant=1.0 / (2.0 * math.pi),
            ),
            1.0 / (8.0 * math.pi),
        )
        self.assertAlmostEqual(
            self.rhs(
                (1.0, 0.0),
                (0.0, 1.0),
                4.0,
                kind='magnetic_poly',
                kappa=0.5,
                beta=0.5,
                constant=3.0,
            ),
            3.0 / 32.0,
        )
        self.assertAlmostEqual(
            self.rhs(origin, origin, 4.0, kind='massive_poly', kappa=0.5),
            4.0**-1.0,
        )

    def test_logarithmic_bounds(self) -> None:
        origin = (0.0, 0.0)
        self.assertAlmostEqual(
            self.rhs(origin, origin, 3.0, kind='magnetic_log'), 1.0 / 9.0
        )
        expected = math.log(2.0) ** 2 / (5.0 * math.log(7.0) ** 2)
        self.assertAlmostEqual(
            self.rhs(origin, origin, 5.0, kind='massive_log', theta=1.0),
            expected,
        )

    def test_exact_prefactors(self) -> None:
        x = (0.3, -0.2)
        self.assertAlmostEqual(
            self.rhs(x, x, 1.0, kind='diamag'), 1.0 / (4.0 * math.pi)
        )
        self.assertAlmostEqual(
            self.rhs(x, (2.3, -0.2), 1.0, kind='diamag'),
            math.exp(-1.0) / (4.0 * math.pi),
        )
        self.assertAlmostEqual(
            self.rhs(x, x, 0.5, kind='uniform_rel'), 2.0 / math.pi
        )
        self.assertAlmostEqual(
            self.rhs(x, x, 0.5, kind='massive_small_t', constant=2.0), 8.0
        )

    def test_moment_bound_has_two_terms(self) -> None:
        value = self.rhs(
            (0, 0),
            (0, 0),
            4.0,
            kind='moment',
            a=2.0,
            mass=4.0,
            constant=1.0,
            secondary=2.0,
        )
        self.assertAlmostEqual(value, 2.0 + 0.25)

    def test_weighted_bounds(self) -> None:
        x = (1.0, 0.0)
        common = {'kappa': 0.5, 'eps': 0.5}
        ab_weighted = self.rhs(x, x, 2.0, kind='ab_weighted', **common)
        self.assertAlmostEqual(ab_weighted, 4.0**2.0 * 2.0**-3.0)
        ab_mode = self.rhs(x, x, 2.0, kind='ab_mode', nu=3.0, **common)
        self.assertAlmostEqual(ab_mode, ab_weighted / 8.0)

    def test_time_ranges(self) -> None:
        origin = (0.0, 0.0)
        for kind, t in (
            ('massive_poly', 0.5),
            ('massive_log', 0.99),
            ('massive_small_t', 2.0),
            ('uniform_rel', 0.0),
            ('diamag', math.inf),
        ):
            with self.subTest(kind=kind, t=t):
                self.assertRaises(
                    errors.BoundRangeError,
                    self.rhs,
                    origin,
                    origin,
                    t,
                    kind=kind,
                )


class VerifyBoundTests(unittest.TestCase):
    def test_exact_bound_passes_with_unit_constant(self) -> None:
        spec = bounds_fit.BoundSpec(bounds_fit.BoundKind.UNIFORM_REL)
        report = bounds_fit.verify_bound(spec, free_samples())
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.fitted_constant, 1.0, places=12)
        self.assertLessEqual(report.max_ratio, 1.0 + 1e-12)
        self.assertEqual((report.training, report.held_out), (15, 12))
        self.assertAlmostEqual(float(report.slope or 0.0), -2.0, places=9)

    def test_too_fast_decay_is_rejected(self) -> None:
        spec = bounds_fit.BoundSpec(
            bounds_fit.BoundKind.MAGNETIC_POLY, kappa=0.5, beta=0.5
        )
        report = bounds_fit.verify_bound(spec, free_samples())
        self.assertFalse(report.passed)
        self.assertGreater(report.max_ratio, 2.0)

    def test_given_constant(self) -> None:
        spec = bounds_fit.BoundSpec(bounds_fit.BoundKind.UNIFORM_REL)
        report = bounds_fit.verify_bound(spec, free_samples(), fit=False)
        self.assertTrue(report.passed)
        self.assertEqual(report.training, 0)
        zero = spec.with_constant(0.0)
        report = bounds_fit.verify_bound(zero, free_samples(), fit=False)
        self.assertFalse(report.passed)
        self.assertTrue(math.isinf(report.max_ratio))

    def test_report_serialisation(self) -> None:
        spec = bounds_fit.BoundSpec(bounds_fit.BoundKind.DIAMAG)
        report = bounds_fit.verify_bound(spec, free_samples())
        data = json.loads(report.to_json())
        self.assertEqual(data['spec']['kind'], 'diamag')
        self.assertIn('pass', data)
        self.assertEqual(data['held_out'], report.held_out)

    def test_errors(self) -> None:
        spec = bounds_fit.BoundSpec(bounds_fit.BoundKind.UNIFORM_REL)
        with self.assertRaises(errors.EmptySampleSet):
            bounds_fit.verify_bound(spec, [])
        moment = bounds_fit.BoundSpec(bounds_fit.BoundKind.MOMENT, a=1.0)
        with self.assertRaises(errors.DomainError):
            bounds_fit.verify_bound(moment, free_samples())
        small_t = bounds_fit.BoundSpec(bounds_fit.BoundKind.MASSIVE_SMALL_T)
        with self.assertRaises(errors.BoundRangeError):
            bounds_fit.verify_bound(small_t, free_samples())

    def test_several_bounds_keep_their_order(self) -> None:
        kinds = (
            bounds_fit.BoundKind.DIAMAG,
            bounds_fit.BoundKind.UNIFORM_REL,
            bounds_fit.BoundKind.MAGNETIC_LOG,
        )
        specs = [bounds_fit.BoundSpec(kind) for kind in kinds]
        reports = bounds_fit.verify_bounds(specs, free_samples(), threads=3)
        self.assertEqual([report.spec.kind for report in reports], [*kinds])


class FitExponentTests(unittest.TestCase):
    def test_exact_power_law(self) -> None:
        fit = bounds_fit.fit_exponent(TIMES, [3.0 / t**2 for t in TIMES])
        self.assertAlmostEqual(fit.slope, -2.0, places=10)
        self.assertAlmostEqual(fit.intercept, math.log(3.0), places=10)
        self.assertLess(fit.residual, 1e-10)
        low, high = fit.band()
        self.assertLessEqual(low, fit.slope)
        self.assertGreaterEqual(high, fit.slope)

    def test_invalid_series(self) -> None:
        for times, values in (
            ((1.0, 10.0, 100.0), (1.0, 1.0, 1.0)),
            ((1.0, 3.0, 2.0, 20.0), (1.0, 1.0, 1.0, 1.0)),
            ((1.0, 2.0, 3.0, 4.0), (1.0, 1.0, 1.0, 1.0)),
            ((0.0, 1.0, 10.0, 100.0), (1.0, 1.0, 1.0, 1.0)),
            ((1.0, 2.0, 5.0, 10.0), (1.0, 0.0, 1.0, 1.0)),
            ((1.0, 2.0, 5.0, 10.0), (1.0, math.inf, 1.0, 1.0)),
            ((1.0, 2.0, 5.0, 10.0), (1.0, 1.0, 1.0)),
        ):
            with self.subTest(times=times, values=values):
                self.assertRaises(
                    errors.DomainError, bounds_fit.fit_exponent, times, values
                )

    @given(
        st.floats(min_value=-4.0, max_value=1.0),
        st.floats(min_value=1e-3, max_value=1e3),
    )
    @settings(max_examples=50)
    def test_recovers_any_power(self, slope: float, scale: float) -> None:
        values = [scale * t**slope for t in TIMES]
        fit = bounds_fit.fit_exponent(TIMES, values)
        self.assertAlmostEqual(fit.slope, slope, places=8)


class SampleFitTests(unittest.TestCase):
    def test_groups_are_fitted_separately(self) -> None:
        near = power_law_samples((1.0, 0.0), (0.0, 0.0), 3.0)
        far = power_law_samples((0.0, 4.0), (3.0, 0.0), 0.5)
        fits = bounds_fit.fit_samples(near + far)
        self.assertEqual(
            list(fits), [((1.0, 0.0), (0.0, 0.0)), ((0.0, 4.0), (3.0, 0.0))]
        )
        for fit in fits.values():
            self.assertAlmostEqual(fit.slope, -2.0, places=10)

    def test_weights(self) -> None:
        samples = power_law_samples((1.0, 0.0), (0.0, 0.0), 3.0)
        fits = bounds_fit.fit_samples(samples, weight_exponent=1.0)
        fit = fits[(1.0, 0.0), (0.0, 0.0)]
        self.assertAlmostEqual(fit.intercept, math.log(1.5), places=10)

    def test_envelope_takes_the_largest_value(self) -> None:
        near = power_law_samples((1.0, 0.0), (0.0, 0.0), 3.0)
        far = power_law_samples((0.0, 4.0), (3.0, 0.0), 0.5)
        fit = bounds_fit.fit_envelope(far + near)
        self.assertAlmostEqual(fit.intercept, math.log(3.0), places=10)
        weighted = bounds_fit.fit_envelope(far + near, weight_exponent=1.0)
        self.assertAlmostEqual(weighted.intercept, math.log(1.5), places=10)

    def test_errors(self) -> None:
        with self.assertRaises(errors.EmptySampleSet):
            bounds_fit.fit_samples([])
        with self.assertRaises(errors.EmptySampleSet):
            bounds_fit.fit_envelope([])
        short = power_law_samples((1.0, 0.0), (0.0, 0.0), 1.0)[:3]
        with self.assertRaises(errors.DomainError):
            bounds_fit.fit_samples(short)


class MomentBoundTests(unittest.TestCase):
    def test_massless_moment_is_a_single_power(self) -> None:
        report = bounds_fit.verify_moment_bound(
            2.0, 0.0, np.geomspace(0.1, 100, 8)
        )
        self.assertTrue(report.passed)
        self.assertEqual(report.c1, 0.0)
        self.assertLess(abs(report.c2 - math.sqrt(math.pi) / 4.0), 1e-6)
        self.assertAlmostEqual(
            float(report.small_t_slope or 0), -1.5, places=6
        )
        self.assertAlmostEqual(
            float(report.large_t_slope or 0), -1.5, places=6
        )

    def test_massive_moment_is_dominated(self) -> None:
        for a, mass in ((2.0, 1.0), (3.0, 1.0), (0.5, 4.0)):
            report = bounds_fit.verify_moment_bound(
                a, mass, np.geomspace(0.01, 1e4, 25)
            )
            with self.subTest(a=a, mass=mass):
                self.assertTrue(report.passed, report.to_json())
                self.assertGreater(report.c1, 0.0)
                self.assertIn('pass', json.loads(report.to_json()))

    def test_invalid_arguments(self) -> None:
        with self.assertRaises(errors.DomainError):
            bounds_fit.verify_moment_bound(0.0, 1.0, (1.0, 2.0))
        with self.assertRaises(errors.DomainError):
            bounds_fit.verify_moment_bound(1.0, -1.0, (1.0, 2.0))
        with self.assertRaises(errors.DomainError):
            bounds_fit.verify_moment_bound(1.0, 1.0, (2.0, 2.0))


class AsymptoticTests(unittest.TestCase):
    def test_leading_mode_limit(self) -> None:
        self.assertAlmostEqual(
            bounds_fit.leading_mode_limit(0.5, 1.0), 4.0 / math.pi
        )
        self.assertAlmostEqual(bounds_fit.leading_mode_limit(0.0, 3.0), 1.0)

    def test_half_flux_approaches_the_limit(self) -> None:
        report = bounds_fit.asymptotic_limit_check(0.5, 1.0, (1e4, 1e2))
        self.assertEqual(report.times, (1e2, 1e4))
        self.assertEqual(report.kappa, 0.5)
        self.assertLess(report.deviation, 1e-6)
        self.assertLess(report.scaled[0], report.scaled[1])

    def test_invalid_arguments(self) -> None:
        with self.assertRaises(errors.DomainError):
            bounds_fit.asymptotic_limit_check(0.5, 0.0, (1.0,))
        with self.assertRaises(errors.DomainError):
            bounds_fit.asymptotic_limit_check(0.5, 1.0, ())

    def test_interpolated_constant(self) -> None:
        self.assertAlmostEqual(
            bounds_fit.interpolated_constant(4.0, 16.0, 0.25, 0.5), 8.0
        )
        self.assertEqual(
            bounds_fit.interpolated_constant(4.0, 16.0, 0.0, 0.0), 4.0
        )
        with self.assertRaises(errors.DomainError):
            bounds_fit.interpolated_constant(4.0, 16.0, 0.6, 0.5)


class ModeBoundTests(unittest.TestCase):
    def test_half_flux_odd_modes_repeat_even_orders(self) -> None:
        report = bounds_fit.ab_mode_check(
            0.5, 0.25, range(-4, 5), (1.0, 10.0), (0.5, 1.0, 2.0)
        )
        self.assertTrue(report.passed)
        self.assertLessEqual(report.max_ratio, 1.0)
        self.assertEqual((report.training, report.held_out), (30, 24))

    def test_errors(self) -> None:
        with self.assertRaises(errors.EmptySampleSet):
            bounds_fit.ab_mode_check(0.5, 0.25, [0], (1.0,), (1.0,))
        with self.assertRaises(errors.BoundRangeError):
            bounds_fit.ab_mode_check(0.5, 0.25, [0, 1], (0.5,), (1.0,))
        with self.assertRaises(errors.DomainError):
            bounds_fit.ab_mode_check(0.5, 2.0, [0, 1], (1.0,), (1.0,))


class FreeDecayTests(unittest.TestCase):
    def test_massive_crossover(self) -> None:
        small, large = bounds_fit.crossover_slopes(
            1.0, np.geomspace(1e-3, 2e-2, 5), np.geomspace(1e3, 2e4, 5)
        )
        self.assertAlmostEqual(small.slope, -2.0, delta=0.02)
        self.assertAlmostEqual(large.slope, -1.0, delta=0.02)
        with self.assertRaises(errors.DomainError):
            bounds_fit.crossover_slopes(0.0, (1.0,), (1.0,))

    def test_log_integral_stays_bounded(self) -> None:
        values = [bounds_fit.free_log_integral(t) for t in (10, 1e2, 1e3)]
        self.assertGreater(min(values), 0.0)
        self.assertLess(max(values) / min(values), 10.0)
        with self.assertRaises(errors.DomainError):
            bounds_fit.free_log_integral(0.0)


class InterpolatedBoundTests(unittest.TestCase):
    def test_midpoint_is_dominated(self) -> None:
        report = bounds_fit.interpolated_bound_check(free_samples(), 0.5)
        self.assertEqual(report.spec.beta, 0.25)
        self.assertEqual(report.held_out, len(free_samples()))
        self.assertLessEqual(report.max_ratio, 1.0 + 1e-12)
        self.assertTrue(report.passed)

    def test_integer_flux_has_no_midpoint(self) -> None:
        with self.assertRaises(errors.DomainError):
            bounds_fit.interpolated_bound_check(free_samples(), 0.0)


class StepFieldTests(unittest.TestCase):
    def test_half_flux_decay(self) -> None:
        report = bounds_fit.magnetic_decay_check(
            field.FieldProfile.step(1.0, 1.0),
            np.geomspace(10.0, 200.0, 7),
            STEP_PAIRS,
        )
        self.assertAlmostEqual(report.alpha, 0.5)
        self.assertAlmostEqual(report.kappa, 0.5)
        self.assertEqual(report.expected_slope, -3.0)
        self.assertEqual(len(report.slopes), 2)
        self.assertLessEqual(report.worst_deviation, 0.1)
        self.assertLessEqual(report.diamagnetic_ratio, 1.0)
        self.assertTrue(report.passed)
        self.assertEqual(len(report.samples), 14)
        self.assertNotIn('samples', json.loads(report.to_json()))
        midpoint = bounds_fit.interpolated_bound_check(
            report.samples, report.kappa
        )
        self.assertTrue(midpoint.passed)

    def test_integer_flux_log_bound(self) -> None:
        report = bounds_fit.log_bound_check(
            field.FieldProfile.step(2.0, 1.0),
            (10.0, 20.0, 50.0, 100.0, 200.0, 500.0),
            STEP_PAIRS[:1],
        )
        self.assertAlmostEqual(report.alpha, 1.0)
        self.assertEqual(len(report.scaled), 6)
        self.assertGreater(min(report.scaled), 0.0)
        self.assertLess(report.growth, report.log_growth)
        self.assertTrue(json.loads(report.to_json())['pass'])

    def test_errors(self) -> None:
        step = field.FieldProfile.step(2.0, 1.0)
        with self.assertRaises(errors.EmptySampleSet):
            bounds_fit.magnetic_decay_check(step, (), STEP_PAIRS)
        with self.assertRaises(errors.EmptySampleSet):
            bounds_fit.log_bound_check(step, (10.0, 100.0), ())
        with self.assertRaises(errors.DomainError):
            bounds_fit.log_bound_check(step, (10.0, 50.0), STEP_PAIRS)
