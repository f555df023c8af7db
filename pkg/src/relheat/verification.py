"""Self checks behind ``relheat verify``.

- [relheat.verification.run_suite][]: run one suite or every suite
- [relheat.verification.SUITES][]: names of the available suites

Each check measures a single number and compares it with a threshold.
A check that raises a [relheat.errors.RootException][] is reported as
failed with the error message, so a suite always produces a complete
report.

"""

from __future__ import annotations

import dataclasses
import functools
import io
import json
import logging
import math
import time
import typing

import numpy as np

from relheat import (
    _helpers,
    ab_kernel,
    bounds_fit,
    constants,
    datastructures,
    errors,
    field,
    quad,
    radial_solver,
    specfun,
)

if typing.TYPE_CHECKING:
    from collections import abc

LOGGER = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class CheckResult:
    """Outcome of one check.

    :param suite: suite the check belongs to
    :param name: short identifier
    :param measured: the measured quantity
    :param threshold: the bound `measured` is compared with
    :param passed: whether the check passed
    :param detail: free text, the error message of a crashed check
    :param seconds: wall clock time spent

    """

    suite: str
    name: str
    measured: float
    threshold: float
    passed: bool
    detail: str = ''
    seconds: float = 0.0

    def as_dict(self) -> dict[str, typing.Any]:
        """JSON friendly representation."""
        data = dataclasses.asdict(self)
        data['pass'] = data.pop('passed')
        if not math.isfinite(self.measured):
            data['measured'] = repr(self.measured)
        return data


@dataclasses.dataclass(frozen=True)
class SuiteReport:
    """Every check that ran for a ``verify`` invocation."""

    suite: str
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        """All checks passed."""
        return all(check.passed for check in self.checks)

    def as_dict(self) -> dict[str, typing.Any]:
        """JSON friendly representation."""
        return {
            'suite': self.suite,
            'pass': self.passed,
            'checks': [check.as_dict() for check in self.checks],
        }

    def to_json(self) -> str:
        """Serialise the report."""
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


class _Measurement(typing.NamedTuple):
    measured: float
    threshold: float
    passed: bool
    detail: str = ''


_Check = typing.Callable[[], _Measurement]
_REGISTRY: dict[str, list[tuple[str, _Check]]] = {}


def _check(suite: str, name: str) -> abc.Callable[[_Check], _Check]:
    def register(func: _Check) -> _Check:
        _REGISTRY.setdefault(suite, []).append((name, func))
        return func

    return register


def _below(
    measured: float, threshold: float, detail: str = ''
) -> _Measurement:
    return _Measurement(measured, threshold, measured <= threshold, detail)


def _relative(value: float, expected: float) -> float:
    return abs(value - expected) / abs(expected)


# -- specfun -------------------------------------------------------------


@_check('specfun', 'gamma-recurrence')
def _gamma_recurrence() -> _Measurement:
    xs = np.linspace(0.1, 20.0, 60)
    worst = max(
        _relative(specfun.gamma_fn(x + 1.0), x * specfun.gamma_fn(x))
        for x in xs
    )
    return _below(worst, 1e-13)


@_check('specfun', 'beta-symmetry')
def _beta_symmetry() -> _Measurement:
    pairs = [(0.5, 0.5), (0.75, 2.5), (3.0, 7.25), (10.0, 0.1)]
    worst = max(
        _relative(specfun.beta_fn(p, q), specfun.beta_fn(q, p))
        for p, q in pairs
    )
    worst = max(worst, _relative(specfun.beta_fn(1.0, 1.0), 1.0))
    return _below(worst, 1e-14)


@_check('specfun', 'bessel-recurrence')
def _bessel_recurrence() -> _Measurement:
    xs = np.concatenate((
        np.linspace(0.5, 7.5, 8),
        np.linspace(9.0, 29.0, 6),
        np.linspace(35.0, 120.0, 5),
    ))
    worst = 0.0
    for nu in (1.0, 2.5, 6.0, 10.25):
        lower = specfun.bessel_j_array(nu - 1.0, xs)
        middle = specfun.bessel_j_array(nu, xs)
        upper = specfun.bessel_j_array(nu + 1.0, xs)
        residual = lower + upper - 2.0 * nu / xs * middle
        scale = np.maximum(np.abs(middle), np.abs(lower))
        worst = max(worst, float(np.max(np.abs(residual) / scale.max())))
    return _below(worst, 1e-10)


@_check('specfun', 'pfaff-transformation')
def _pfaff_transformation() -> _Measurement:
    worst = 0.0
    for a, b, c in ((0.5, 1.5, 2.0), (1.25, 0.75, 3.5), (2.0, 0.5, 2.25)):
        for w in (-0.3, -2.0, -9.0, -40.0):
            direct = specfun.hyp2f1(a, b, c, w)
            transformed = (1.0 - w) ** -a * specfun.hyp2f1(
                a, c - b, c, w / (w - 1.0)
            )
            worst = max(worst, _relative(direct, transformed))
    return _below(worst, 1e-10)


@_check('specfun', 'euler-integral')
def _euler_integral() -> _Measurement:
    worst = 0.0
    for a, b, c, w in (
        (1.5, 0.5, 2.0, -4.0),
        (0.5, 1.25, 2.5, 0.4),
        (2.0, 1.0, 3.5, 0.9),
        (0.75, 0.25, 1.5, -0.8),
    ):
        series = specfun.hyp2f1(a, b, c, w)
        integral = specfun.gauss_2f1_integral(
            specfun.HypergeometricArgs(a, b, c, w)
        )
        worst = max(worst, _relative(integral, series))
    return _below(worst, 1e-8)


# -- quad ----------------------------------------------------------------


@_check('quad', 'in-text-integral')
def _in_text_integral() -> _Measurement:
    worst = 0.0
    for t in (0.5, 1.0, 3.0):
        scale = t * t / 4.0

        def integrand(s: float, scale: float = scale) -> float:
            return s**-2.5 * math.exp(-scale / s)

        value = quad.integrate_semi_infinite(integrand).value
        worst = max(worst, _relative(value, 4.0 * math.sqrt(math.pi) / t**3))
    return _below(worst, 1e-10)


@_check('quad', 'free-subordination')
def _free_subordination() -> _Measurement:
    worst = 0.0
    origin = (0.0, 0.0)
    for distance in range(6):
        x = (float(distance), 0.0)
        for t in (0.5, 1.0, 4.0, 10.0):

            def base(s: float, x: datastructures.Point = x) -> float:
                return ab_kernel.free_heat_kernel(s, x, origin)

            inp = quad.SubordinationInput(base, t)
            value = quad.subordinate_massless(inp).value
            exact = ab_kernel.free_relativistic_kernel(t, x, origin)
            worst = max(worst, _relative(value, exact))
    return _below(worst, 1e-8)


@_check('quad', 'error-honesty')
def _error_honesty() -> _Measurement:
    cases: list[tuple[abc.Callable[[float], float], float]] = [
        (lambda x: math.exp(-x), 1.0),
        (lambda x: 1.0 / (1.0 + x * x), math.pi / 2.0),
        (lambda x: x * math.exp(-x * x), 0.5),
        (lambda x: math.exp(-x) / math.sqrt(x), math.sqrt(math.pi)),
    ]
    worst = 0.0
    for integrand, exact in cases:
        result = quad.integrate_semi_infinite(integrand)
        claimed = max(result.error, 1e-10 * abs(exact))
        worst = max(worst, abs(result.value - exact) / claimed)
    return _below(worst, 1.0)


@_check('quad', 'moment-oracle')
def _moment_oracle() -> _Measurement:
    worst = 0.0
    for a, mass in ((2.0, 0.0), (2.0, 1.0), (3.0, 1.0), (0.5, 4.0)):
        for t in (0.01, 1.0, 100.0):
            direct = quad.substituted_moment(a, mass, t).value
            oracle = quad.free_moment_oracle(a, mass, t)
            worst = max(worst, _relative(direct, oracle))
    return _below(worst, 1e-8)


# -- ab ------------------------------------------------------------------


@_check('ab', 'diagonal-routes')
def _diagonal_routes() -> _Measurement:
    worst = 0.0
    for nu in (0.0, 0.25, 0.5, 1.0, 2.5):
        for z in (0.0, 0.1, 1.0, 10.0, 100.0):
            args = ab_kernel.ABModeArgs(nu, math.sqrt(z), math.sqrt(z), 1.0)
            euler = ab_kernel.pm_diag(args, route='euler')
            closed = ab_kernel.pm_diag(args, route='hypergeometric')
            bessel = ab_kernel.pm_diag(args, route='bessel')
            # p_m(0, 0, t) vanishes unless nu = 0
            scale = abs(euler) or 1.0
            worst = max(
                worst,
                abs(closed - euler) / scale,
                abs(bessel - euler) / scale,
            )
            if z == 0 and nu > 0:
                worst = max(worst, abs(euler))
    return _below(worst, 1e-6)


@_check('ab', 'half-order-oracle')
def _half_order_oracle() -> _Measurement:
    value = ab_kernel.pm_offdiag(ab_kernel.ABModeArgs(0.5, 1.0, 2.0, 1.0))
    return _below(_relative(value, 0.4 / (math.pi * math.sqrt(2.0))), 1e-7)


@_check('ab', 'semigroup-composition')
def _ab_semigroup() -> _Measurement:
    worst = max(
        ab_kernel.mode_semigroup_residual(nu, 1.0, 1.5, 0.75, 1.25)
        for nu in (0.25, 0.5, 1.5)
    )
    return _below(worst, 1e-6)


@_check('ab', 'gauge-periodicity')
def _gauge_periodicity() -> _Measurement:
    x, y = (1.0, 0.5), (-0.5, 1.5)
    worst = 0.0
    for alpha in (0.25, 0.5):
        base = ab_kernel.ab_full_kernel(alpha, 1.0, x, y).modulus
        shifted = ab_kernel.ab_full_kernel(alpha + 1.0, 1.0, x, y).modulus
        worst = max(worst, _relative(shifted, base))
    return _below(worst, 1e-9)


@_check('ab', 'cauchy-schwarz')
def _cauchy_schwarz() -> _Measurement:
    failures = [
        (nu, r, r_prime, t)
        for nu in (0.0, 0.5, 1.5)
        for r, r_prime in ((0.5, 1.0), (1.0, 3.0), (2.0, 8.0))
        for t in (0.5, 2.0)
        if not ab_kernel.cauchy_schwarz_offdiag_bound(
            ab_kernel.ABModeArgs(nu, r, r_prime, t), slack=1e-8
        )
    ]
    return _below(float(len(failures)), 0.0, repr(failures[:3]))


@_check('ab', 'ab-mode-held-out')
def _ab_mode() -> _Measurement:
    report = bounds_fit.ab_mode_check(
        0.5,
        0.25,
        range(-12, 13),
        np.geomspace(1.0, 1e3, 5),
        (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0),
    )
    return _below(
        report.max_ratio, 1.05, f'C_eps={report.fitted_constant:.6g}'
    )


# -- radial --------------------------------------------------------------


def _zero_field_solver() -> radial_solver.RadialSolver:
    grid = radial_solver.RadialGrid.uniform(20.0, 800)
    return radial_solver.RadialSolver(
        field.FieldProfile.zero(), grid, estimate_error=False
    )


@_check('radial', 'free-diagonal')
def _free_diagonal() -> _Measurement:
    solver = _zero_field_solver()
    worst = 0.0
    for t in (0.5, 1.0, 2.0):
        value = solver.heat_kernel(t, (1.0, 0.0), (1.0, 0.0)).value
        worst = max(worst, _relative(value.real, 1.0 / (4.0 * math.pi * t)))
    return _below(worst, 0.01)


@_check('radial', 'mode-semigroup')
def _mode_semigroup() -> _Measurement:
    solver = _zero_field_solver()
    worst = 0.0
    for mode in (0, 1, 3):
        composed = solver.mode_kernel(mode, 0.5).compose(
            solver.mode_kernel(mode, 0.75)
        )
        direct = solver.mode_kernel(mode, 1.25)
        worst = max(worst, composed.relative_difference(direct))
    return _below(worst, 1e-5)


@_check('radial', 'free-mode-oracle')
def _free_mode_oracle() -> _Measurement:
    solver = _zero_field_solver()
    worst = 0.0
    for mode in (0, 1, 2):
        spectrum = solver.spectrum(mode)
        for r, r_prime in ((1.0, 1.0), (1.0, 2.0)):
            value = spectrum.value(1.0, r, r_prime)
            exact = ab_kernel.heat_mode_kernel(float(mode), r, r_prime, 1.0)
            worst = max(worst, _relative(value, exact))
    return _below(worst, 0.01)


_STEP_PAIRS = (((1.0, 0.0), (1.0, 0.0)), ((1.0, 0.0), (0.0, 1.0)))


@functools.cache
def _half_flux_step() -> bounds_fit.MagneticDecayReport:
    return bounds_fit.magnetic_decay_check(
        field.FieldProfile.step(1.0, 1.0),
        np.geomspace(10.0, 200.0, 8),
        _STEP_PAIRS,
    )


@_check('radial', 'step-field-decay')
def _step_field_decay() -> _Measurement:
    report = _half_flux_step()
    slopes = ', '.join(f'{slope:.4f}' for slope in report.slopes)
    return _below(
        report.worst_deviation, constants.SLOPE_TOLERANCE, f'slopes {slopes}'
    )


@_check('radial', 'step-field-diamagnetic')
def _step_field_diamagnetic() -> _Measurement:
    return _below(_half_flux_step().diamagnetic_ratio, 1.0)


# -- bounds --------------------------------------------------------------


def _free_samples() -> list[datastructures.KernelSample]:
    samples = []
    for t in np.geomspace(1.0, 100.0, 9):
        for distance in (0.0, 1.0, 3.0):
            x, y = (distance, 0.0), (0.0, 0.0)
            value = ab_kernel.free_relativistic_kernel(float(t), x, y)
            samples.append(
                datastructures.KernelSample(
                    float(t),
                    x,
                    y,
                    value,
                    method=datastructures.Method.FREE_CLOSED,
                )
            )
    return samples


@_check('bounds', 'uniform-bound-constant')
def _uniform_bound_constant() -> _Measurement:
    spec = bounds_fit.BoundSpec(bounds_fit.BoundKind.MAGNETIC_POLY)
    report = bounds_fit.verify_bound(spec, _free_samples())
    deviation = _relative(report.fitted_constant, 1.0 / (2.0 * math.pi))
    measured = deviation if report.passed else math.inf
    return _below(measured, 1e-12)


@_check('bounds', 'wrong-exponent-rejected')
def _wrong_exponent_rejected() -> _Measurement:
    spec = bounds_fit.BoundSpec(
        bounds_fit.BoundKind.MAGNETIC_POLY, beta=0.5, kappa=0.5
    )
    report = bounds_fit.verify_bound(spec, _free_samples())
    return _Measurement(
        report.max_ratio, 1.05, not report.passed, 'must fail'
    )


@_check('bounds', 'moment-gaussian-constant')
def _moment_constant() -> _Measurement:
    report = bounds_fit.verify_moment_bound(
        2.0, 0.0, np.geomspace(1e-2, 1e4, 13)
    )
    deviation = _relative(report.c2, math.sqrt(math.pi) / 4.0)
    return _Measurement(
        deviation, 0.02, report.passed and deviation <= 0.02
    )


@_check('bounds', 'moment-uniform-domination')
def _moment_domination() -> _Measurement:
    reports = [
        bounds_fit.verify_moment_bound(a, mass, np.geomspace(1e-2, 1e4, 25))
        for a, mass in ((2.0, 0.0), (2.0, 1.0), (3.0, 1.0), (0.5, 4.0))
    ]
    worst = max(report.max_ratio for report in reports)
    failed = [
        (report.a, report.mass) for report in reports if not report.passed
    ]
    return _Measurement(
        worst,
        1.0 + constants.HELD_OUT_SLACK,
        not failed,
        f'failed for {failed}' if failed else '',
    )


@_check('bounds', 'sharp-ab-decay')
def _sharp_ab_decay() -> _Measurement:
    times = np.geomspace(10.0, 1e3, 8)
    values = [
        ab_kernel.pm_diag(ab_kernel.ABModeArgs(0.5, 1.0, 1.0, float(t)))
        for t in times
    ]
    fit = bounds_fit.fit_exponent(times, values)
    return _below(abs(fit.slope + 3.0), 0.05, f'slope={fit.slope:.4f}')


@_check('bounds', 'asymptotic-limit')
def _asymptotic_limit() -> _Measurement:
    report = bounds_fit.asymptotic_limit_check(0.5, 1.0, (10.0, 100.0, 1e3))
    return _below(report.deviation, 0.01)


@_check('bounds', 'massive-crossover')
def _massive_crossover() -> _Measurement:
    small, large = bounds_fit.crossover_slopes(
        1.0, np.geomspace(1e-3, 1e-2, 6), np.geomspace(1e2, 1e3, 6)
    )
    worst = max(abs(small.slope + 2.0), abs(large.slope + 1.0))
    return _below(
        worst, 0.1, f'slopes {small.slope:.4f} and {large.slope:.4f}'
    )


@_check('bounds', 'log-integral-bounded')
def _log_integral_bounded() -> _Measurement:
    values = [
        bounds_fit.free_log_integral(float(t))
        for t in np.geomspace(1.0, 1e4, 9)
    ]
    return _below(max(values) / min(values), 10.0)


@_check('bounds', 'step-field-poly-bound')
def _step_field_poly_bound() -> _Measurement:
    report = _half_flux_step()
    spec = bounds_fit.BoundSpec(
        bounds_fit.BoundKind.MAGNETIC_POLY,
        beta=report.kappa,
        kappa=report.kappa,
    )
    bound = bounds_fit.verify_bound(spec, report.samples)
    return _below(
        bound.max_ratio,
        1.0 + constants.HELD_OUT_SLACK,
        f'C={bound.fitted_constant:.6g}',
    )


@_check('bounds', 'step-field-midpoint')
def _step_field_midpoint() -> _Measurement:
    report = _half_flux_step()
    midpoint = bounds_fit.interpolated_bound_check(
        report.samples, report.kappa
    )
    return _below(midpoint.max_ratio, 1.0 + constants.HELD_OUT_SLACK)


@_check('bounds', 'integer-flux-log-bound')
def _integer_flux_log_bound() -> _Measurement:
    report = bounds_fit.log_bound_check(
        field.FieldProfile.step(2.0, 1.0),
        (10.0, 20.0, 50.0, 100.0, 200.0, 500.0),
        _STEP_PAIRS,
    )
    return _below(report.growth, report.log_growth)


@_check('bounds', 'csv-round-trip')
def _csv_round_trip() -> _Measurement:
    samples = _free_samples()
    first, second = io.StringIO(), io.StringIO()
    _helpers.write_samples(first, samples)
    first.seek(0)
    restored = _helpers.read_samples(first)
    _helpers.write_samples(second, restored)
    in_process = bounds_fit.fit_samples(samples)
    reread = bounds_fit.fit_samples(restored)
    identical = (
        first.getvalue() == second.getvalue()
        and restored == samples
        and in_process == reread
    )
    return _Measurement(0.0 if identical else 1.0, 0.0, identical)


SUITES = ('specfun', 'quad', 'ab', 'radial', 'bounds', 'all')
"""Names accepted by [relheat.verification.run_suite][]."""


def _run_one(suite: str, name: str, func: _Check) -> CheckResult:
    started = time.perf_counter()
    try:
        measurement = func()
    except errors.RootException as error:
        LOGGER.warning('check %s/%s raised %s', suite, name, error)
        measurement = _Measurement(math.nan, math.nan, False, str(error))
    elapsed = time.perf_counter() - started
    LOGGER.info(
        '%s/%s: measured %.3g, threshold %.3g, %s (%.2fs)',
        suite,
        name,
        measurement.measured,
        measurement.threshold,
        'pass' if measurement.passed else 'FAIL',
        elapsed,
    )
    return CheckResult(
        suite,
        name,
        float(measurement.measured),
        float(measurement.threshold),
        bool(measurement.passed),
        measurement.detail,
        elapsed,
    )


def run_suite(suite: str) -> SuiteReport:
    """Run the checks of `suite`.

    :param suite: one of [relheat.verification.SUITES][]
    :raises relheat.errors.DomainError: for an unknown suite

    """
    if suite not in SUITES:
        raise errors.DomainError(
            f'unknown suite {suite!r}, expected one of {", ".join(SUITES)}'
        )
    names = SUITES[:-1] if suite == 'all' else (suite,)
    checks = tuple(
        _run_one(name, check_name, func)
        for name in names
        for check_name, func in _REGISTRY.get(name, [])
    )
    return SuiteReport(suite, checks)
