"""Decay bounds, their verification and power-law fits.

- [relheat.bounds_fit.BoundSpec][]: one right-hand side with its
  parameters and constant
- [relheat.bounds_fit.bound_rhs][]: evaluate a right-hand side
- [relheat.bounds_fit.verify_bound][]: fit a constant on early samples
  and check it on later ones
- [relheat.bounds_fit.verify_moment_bound][]: two-term bound of the
  substituted moment
- [relheat.bounds_fit.fit_exponent][]: log-log least squares slope
- [relheat.bounds_fit.asymptotic_limit_check][]: large time limit of
  the leading Aharonov-Bohm mode
- [relheat.bounds_fit.magnetic_decay_check][]: decay of the solver
  kernel of a radial field
- [relheat.bounds_fit.log_bound_check][]: the integer flux log bound

Constants in ``<~`` statements are never known in advance.  They are
fitted as the smallest value that dominates a training set and then
validated against samples that took no part in the fit.

"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import enum
import json
import logging
import math
import statistics
import typing

import numpy as np
from scipy import optimize, stats

from relheat import (
    ab_kernel,
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

    import numpy.typing as npt

LOGGER = logging.getLogger(__name__)

_DECADE_SLACK = 1e-9


class BoundKind(str, enum.Enum):
    """Right-hand sides that can be evaluated and verified."""

    MAGNETIC_POLY = 'magnetic_poly'
    MAGNETIC_LOG = 'magnetic_log'
    MASSIVE_POLY = 'massive_poly'
    MASSIVE_LOG = 'massive_log'
    MASSIVE_SMALL_T = 'massive_small_t'
    DIAMAG = 'diamag'
    UNIFORM_REL = 'uniform_rel'
    MOMENT = 'moment'
    AB_MODE = 'ab_mode'
    AB_WEIGHTED = 'ab_weighted'


_POLY_KINDS = frozenset({BoundKind.MAGNETIC_POLY, BoundKind.MASSIVE_POLY})
_LOG_KINDS = frozenset({BoundKind.MAGNETIC_LOG, BoundKind.MASSIVE_LOG})
_WEIGHTED_KINDS = frozenset({BoundKind.AB_MODE, BoundKind.AB_WEIGHTED})
_LARGE_TIME_KINDS = frozenset({
    BoundKind.MASSIVE_POLY,
    BoundKind.MASSIVE_LOG,
    BoundKind.AB_MODE,
})


@dataclasses.dataclass(frozen=True)
class BoundSpec:
    """A bound ``|K(x, y, t)| <= constant * rhs(x, y, t)``.

    :param kind: which right-hand side
    :param beta: spatial weight exponent of the polynomial bounds,
        ``0 <= beta <= kappa``
    :param theta: logarithm exponent of the log bounds,
        ``0 <= theta <= 1``
    :param kappa: distance of the flux from the integers
    :param mass: particle mass of the `moment` bound
    :param eps: weight margin of the Aharonov-Bohm bounds,
        ``0 < eps < eps0``
    :param a: exponent of the `moment` bound
    :param nu: mode order of the single mode bound
    :param constant: leading constant
    :param secondary: second constant of the two-term `moment` bound
    :raises relheat.errors.DomainError: when a parameter is out of the
        range its kind allows

    The ``diamag`` and ``uniform_rel`` bounds carry their exact
    prefactors, so their constant is one when they hold.  The weighted
    Aharonov-Bohm bounds are stated for the unweighted kernel, with the
    inverse weights ``(1 + |x|)**(3/2 + eps)`` moved to the right.

    """

    kind: BoundKind
    beta: float = 0.0
    theta: float = 0.0
    kappa: float = 0.0
    mass: float = 0.0
    eps: float = 0.0
    a: float = 0.0
    nu: float = 0.0
    constant: float = 1.0
    secondary: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, 'kind', BoundKind(self.kind))
        if not 0 <= self.kappa <= 0.5:
            raise errors.DomainError(
                f'kappa must lie in [0, 1/2], got {self.kappa}'
            )
        if self.kind in _POLY_KINDS and not 0 <= self.beta <= self.kappa:
            raise errors.DomainError(
                f'beta must lie in [0, kappa={self.kappa}], got {self.beta}'
            )
        if self.kind in _LOG_KINDS and not 0 <= self.theta <= 1:
            raise errors.DomainError(
                f'theta must lie in [0, 1], got {self.theta}'
            )
        if self.kind in _WEIGHTED_KINDS:
            eps0 = field.eps0_of(self.kappa)
            if not 0 < self.eps < eps0:
                raise errors.DomainError(
                    f'eps must lie in (0, {eps0:g}), got {self.eps}'
                )
        if self.kind is BoundKind.MOMENT and not self.a > 0:
            raise errors.DomainError(f'a must be positive, got {self.a}')
        if not (self.constant >= 0 and self.secondary >= 0):
            raise errors.DomainError('bound constants must be >= 0')
        if self.mass < 0 or self.nu < 0:
            raise errors.DomainError('mass and nu must be >= 0')

    def with_constant(
        self, constant: float, secondary: float | None = None
    ) -> BoundSpec:
        """Copy with new constants."""
        return dataclasses.replace(
            self,
            constant=constant,
            secondary=self.secondary if secondary is None else secondary,
        )

    def as_dict(self) -> dict[str, typing.Any]:
        """JSON friendly representation."""
        data = dataclasses.asdict(self)
        data['kind'] = self.kind.value
        return data


def _check_range(spec: BoundSpec, t: float) -> None:
    if not (t > 0 and math.isfinite(t)):
        raise errors.BoundRangeError(f'time must be positive, got {t}')
    if spec.kind in _LARGE_TIME_KINDS and t < 1:
        raise errors.BoundRangeError(
            f'{spec.kind.value} holds for t >= 1, got t={t}'
        )
    if spec.kind is BoundKind.MASSIVE_SMALL_T and t > 1:
        raise errors.BoundRangeError(
            f'{spec.kind.value} holds for t <= 1, got t={t}'
        )


def bound_rhs(
    spec: BoundSpec,
    x: datastructures.Point,
    y: datastructures.Point,
    t: float,
) -> float:
    """Right-hand side of `spec` at ``(x, y, t)`` including its constant.

    :raises relheat.errors.BoundRangeError: when `t` lies outside of
        the range the bound is stated for

    """
    _check_range(spec, t)
    r, r_prime = math.hypot(*x), math.hypot(*y)
    kind = spec.kind
    if kind in _POLY_KINDS:
        power = -2.0 - 2.0 * spec.beta
        if kind is BoundKind.MASSIVE_POLY:
            power = -1.0 - spec.beta
        weights = ((1.0 + r) * (1.0 + r_prime)) ** spec.beta
        return spec.constant * weights * t**power
    if kind in _LOG_KINDS:
        power = -2.0 if kind is BoundKind.MAGNETIC_LOG else -1.0
        weights = (math.log(2.0 + r) * math.log(2.0 + r_prime)) ** spec.theta
        decay = math.log(2.0 + t) ** (-2.0 * spec.theta)
        return spec.constant * weights * t**power * decay
    if kind is BoundKind.MASSIVE_SMALL_T:
        return spec.constant * t**-2
    if kind is BoundKind.DIAMAG:
        distance_sq = (x[0] - y[0]) ** 2 + (x[1] - y[1]) ** 2
        gaussian = math.exp(-distance_sq / (4.0 * t)) / (4.0 * math.pi * t)
        return spec.constant * gaussian
    if kind is BoundKind.UNIFORM_REL:
        return spec.constant / (2.0 * math.pi * t * t)
    if kind is BoundKind.MOMENT:
        return (
            spec.constant * spec.mass ** (0.5 * spec.a) * t**-0.5
            + spec.secondary * t ** (-0.5 * (1.0 + spec.a))
        )
    exponent = 1.5 + spec.eps
    weights = ((1.0 + r) * (1.0 + r_prime)) ** exponent
    value = spec.constant * weights * t ** (-2.0 - 2.0 * spec.kappa)
    if kind is BoundKind.AB_MODE:
        value /= (spec.nu + 1.0) ** (1.0 + spec.eps)
    return value


@dataclasses.dataclass(frozen=True)
class BoundReport:
    """Outcome of [relheat.bounds_fit.verify_bound][].

    :param spec: the bound with its fitted constant
    :param fitted_constant: smallest constant dominating the training
        samples
    :param max_ratio: largest ``|K| / rhs`` over the held-out samples
    :param passed: ``max_ratio <= 1 + slack``
    :param training: number of samples used for the fit
    :param held_out: number of samples used for the check
    :param slope: decay exponent of the largest sample per time when
        the times span a decade
    :param residual: log-space residual of `slope`

    """

    spec: BoundSpec
    fitted_constant: float
    max_ratio: float
    passed: bool
    training: int = 0
    held_out: int = 0
    slope: float | None = None
    residual: float | None = None

    def as_dict(self) -> dict[str, typing.Any]:
        """JSON friendly representation."""
        return {
            'spec': self.spec.as_dict(),
            'fitted_constant': self.fitted_constant,
            'max_ratio': self.max_ratio,
            'slope': self.slope,
            'residual': self.residual,
            'pass': self.passed,
            'training': self.training,
            'held_out': self.held_out,
        }

    def to_json(self) -> str:
        """Serialise the report."""
        return json.dumps(self.as_dict(), sort_keys=True)


def _ratios(
    spec: BoundSpec, samples: abc.Sequence[datastructures.KernelSample]
) -> list[float]:
    unit = spec.with_constant(1.0)
    return [
        sample.modulus / bound_rhs(unit, sample.x, sample.y, sample.t)
        for sample in samples
    ]


def _sample_slope(
    samples: abc.Sequence[datastructures.KernelSample],
) -> tuple[float | None, float | None]:
    peaks: dict[float, float] = {}
    for sample in samples:
        peaks[sample.t] = max(peaks.get(sample.t, 0.0), sample.modulus)
    times = sorted(peaks)
    try:
        fit = fit_exponent(times, [peaks[t] for t in times])
    except errors.DomainError:
        return None, None
    return fit.slope, fit.residual


def verify_bound(
    spec: BoundSpec,
    kernel_values: abc.Iterable[datastructures.KernelSample],
    *,
    fit: bool = True,
    slack: float = constants.HELD_OUT_SLACK,
) -> BoundReport:
    """Check that `spec` dominates the kernel samples.

    :param spec: the bound; its constant is ignored when `fit` is set
    :param kernel_values: kernel samples inside of the bound's range
    :param fit: fit the constant on the samples at or below the median
        time and check the later ones, otherwise check every sample
        against the constant of `spec`
    :param slack: relative excess tolerated on the checked samples
    :raises relheat.errors.EmptySampleSet: without samples
    :raises relheat.errors.BoundRangeError: for samples outside of the
        time range of the bound
    :raises relheat.errors.DomainError: for ``moment`` which has a
        harness of its own

    """
    samples = sorted(kernel_values, key=lambda sample: sample.t)
    if not samples:
        raise errors.EmptySampleSet('no kernel samples to verify')
    if spec.kind is BoundKind.MOMENT:
        raise errors.DomainError('use verify_moment_bound for this bound')
    if fit:
        median = statistics.median(sample.t for sample in samples)
        training = [s for s in samples if s.t <= median]
        checked = [s for s in samples if s.t > median] or training
        constant = max(_ratios(spec, training))
        spec = spec.with_constant(constant)
    else:
        training, checked = [], samples
        constant = spec.constant
    peak = max(_ratios(spec, checked))
    max_ratio = peak / constant if constant > 0 else math.inf
    slope, residual = _sample_slope(samples)
    passed = max_ratio <= 1.0 + slack
    LOGGER.info(
        '%s: constant %.6g, held-out ratio %.6g, %s',
        spec.kind.value,
        constant,
        max_ratio,
        'pass' if passed else 'FAIL',
    )
    return BoundReport(
        spec,
        constant,
        max_ratio,
        passed,
        len(training),
        len(checked),
        slope,
        residual,
    )


def verify_bounds(
    specs: abc.Iterable[BoundSpec],
    kernel_values: abc.Sequence[datastructures.KernelSample],
    *,
    threads: int = 1,
) -> list[BoundReport]:
    """[relheat.bounds_fit.verify_bound][] for several bounds.

    Reports are returned in the order of `specs`.

    """
    specs = list(specs)
    if threads <= 1:
        return [verify_bound(spec, kernel_values) for spec in specs]
    with concurrent.futures.ThreadPoolExecutor(threads) as pool:
        return list(
            pool.map(lambda spec: verify_bound(spec, kernel_values), specs)
        )


def fit_exponent(
    times: npt.ArrayLike, values: npt.ArrayLike
) -> datastructures.DecayFit:
    """Least squares fit of ``log(value)`` against ``log(t)``.

    :raises relheat.errors.DomainError: unless there are at least four
        strictly increasing positive times spanning a decade and every
        value is positive

    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape or t.size < 4:
        raise errors.DomainError('need at least four (time, value) pairs')
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise errors.DomainError('times must be positive and increasing')
    if t[-1] < 10.0 * t[0] * (1.0 - _DECADE_SLACK):
        raise errors.DomainError('times must span at least one decade')
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise errors.DomainError('values must be positive and finite')
    log_t, log_v = np.log(t), np.log(v)
    result = stats.linregress(log_t, log_v)
    predicted = result.intercept + result.slope * log_t
    residual = float(np.sqrt(np.mean((log_v - predicted) ** 2)))
    return datastructures.DecayFit(
        tuple(float(value) for value in t),
        tuple(float(value) for value in v),
        float(result.slope),
        float(result.intercept),
        residual,
        float(result.stderr),
    )


@dataclasses.dataclass(frozen=True)
class MomentBoundReport:
    """Outcome of [relheat.bounds_fit.verify_moment_bound][].

    :param a: moment exponent
    :param mass: particle mass
    :param c1: constant of ``m**(a/2) t**(-1/2)``
    :param c2: constant of ``t**(-(1+a)/2)``
    :param max_ratio: largest moment over bound on the fine grid
    :param passed: ``max_ratio <= 1 + slack``
    :param small_t_slope: decay exponent over the first decade
    :param large_t_slope: decay exponent over the last decade

    """

    a: float
    mass: float
    c1: float
    c2: float
    max_ratio: float
    passed: bool
    small_t_slope: float | None = None
    large_t_slope: float | None = None

    def as_dict(self) -> dict[str, typing.Any]:
        """JSON friendly representation."""
        data = dataclasses.asdict(self)
        data['pass'] = data.pop('passed')
        return data

    def to_json(self) -> str:
        """Serialise the report."""
        return json.dumps(self.as_dict(), sort_keys=True)


def _decade_slope(
    times: npt.NDArray[np.float64],
    values: npt.NDArray[np.float64],
    *,
    last: bool,
) -> float | None:
    # widen to the first sample at or beyond a decade
    if last:
        start = np.searchsorted(times, times[-1] / 10.0, side='right')
        keep = slice(max(int(start) - 1, 0), None)
    else:
        stop = np.searchsorted(times, 10.0 * times[0])
        keep = slice(0, int(stop) + 1)
    try:
        return fit_exponent(times[keep], values[keep]).slope
    except errors.DomainError:
        return None


def verify_moment_bound(
    a: float,
    mass: float,
    t_grid: npt.ArrayLike,
    *,
    spec: datastructures.QuadratureSpec | None = None,
    slack: float = constants.HELD_OUT_SLACK,
) -> MomentBoundReport:
    """Fit and verify the two-term bound of the substituted moment.

    The moment ``int_0^inf r**a exp(-t (r - m / 2r)**2) dr`` is computed
    with [relheat.quad.substituted_moment][] on `t_grid`.  Non-negative
    least squares on the ratios gives ``C1`` and ``C2`` which are then
    scaled to dominate the grid, and the bound is checked on a log grid
    ten times finer over the same range.

    :raises relheat.errors.DomainError: for ``a <= 0``, negative mass
        or fewer than two distinct positive times

    """
    if not a > 0 or mass < 0:
        raise errors.DomainError(f'need a > 0 and mass >= 0, got {a}, {mass}')
    times = np.unique(np.asarray(t_grid, dtype=float))
    if times.size < 2 or times[0] <= 0:
        raise errors.DomainError('need two distinct positive times')

    def moment(t: float) -> float:
        return quad.substituted_moment(a, mass, float(t), spec).value

    def basis(t: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return np.column_stack((
            mass ** (0.5 * a) * t**-0.5,
            t ** (-0.5 * (1.0 + a)),
        ))

    lhs = np.array([moment(t) for t in times])
    design = basis(times) / lhs[:, np.newaxis]
    coefficients, _ = optimize.nnls(design, np.ones(times.size))
    coefficients *= max(1.0 / float(np.min(design @ coefficients)), 1.0)
    c1, c2 = float(coefficients[0]), float(coefficients[1])

    fine = np.geomspace(times[0], times[-1], 10 * times.size)
    fine_lhs = np.array([moment(t) for t in fine])
    ratios = fine_lhs / (basis(fine) @ coefficients)
    max_ratio = float(np.max(ratios))
    LOGGER.info(
        'moment a=%g m=%g: C1=%.6g C2=%.6g max ratio %.6g',
        a,
        mass,
        c1,
        c2,
        max_ratio,
    )
    return MomentBoundReport(
        a,
        mass,
        c1,
        c2,
        max_ratio,
        max_ratio <= 1.0 + slack,
        _decade_slope(fine, fine_lhs, last=False),
        _decade_slope(fine, fine_lhs, last=True),
    )


@dataclasses.dataclass(frozen=True)
class LimitReport:
    """Outcome of [relheat.bounds_fit.asymptotic_limit_check][].

    :param alpha: flux
    :param r: radius
    :param kappa: order of the leading mode
    :param limit: predicted limit of ``t**(2+2 kappa) p(r, r, t)``
    :param times: sampled times
    :param scaled: ``t**(2+2 kappa) p(r, r, t)`` at each time
    :param deviation: relative deviation at the largest time

    """

    alpha: float
    r: float
    kappa: float
    limit: float
    times: tuple[float, ...]
    scaled: tuple[float, ...]
    deviation: float

    def as_dict(self) -> dict[str, typing.Any]:
        """JSON friendly representation."""
        data = dataclasses.asdict(self)
        data['times'] = list(self.times)
        data['scaled'] = list(self.scaled)
        return data

    def to_json(self) -> str:
        """Serialise the report."""
        return json.dumps(self.as_dict(), sort_keys=True)


def leading_mode_limit(kappa: float, r: float) -> float:
    """``(2 kappa + 1) / pi (2 r)**(2 kappa) B(kappa+1/2, kappa+1/2)``"""
    beta = specfun.beta_fn(kappa + 0.5, kappa + 0.5)
    return (2.0 * kappa + 1.0) / math.pi * (2.0 * r) ** (2 * kappa) * beta


def asymptotic_limit_check(
    alpha: float, r: float, t_grid: abc.Iterable[float]
) -> LimitReport:
    """Compare ``t**(2+2 kappa) p_k(r, r, t)`` with its large time limit.

    ``k`` is the mode with ``|k + alpha| = kappa``.

    :raises relheat.errors.DomainError: for ``r <= 0`` or an empty grid

    """
    if not r > 0:
        raise errors.DomainError(f'radius must be positive, got {r}')
    times = tuple(sorted(float(t) for t in t_grid))
    if not times:
        raise errors.DomainError('empty time grid')
    kappa = field.kappa_of(alpha)
    limit = leading_mode_limit(kappa, r)
    scaled = tuple(
        t ** (2.0 + 2.0 * kappa)
        * ab_kernel.pm_diag(ab_kernel.ABModeArgs(kappa, r, r, t))
        for t in times
    )
    deviation = abs(scaled[-1] - limit) / limit
    LOGGER.info(
        'alpha=%g r=%g: limit %.8g, deviation %.3g at t=%g',
        alpha,
        r,
        limit,
        deviation,
        times[-1],
    )
    return LimitReport(alpha, r, kappa, limit, times, scaled, deviation)


def interpolated_constant(
    c_low: float, c_high: float, beta: float, kappa: float
) -> float:
    """Constant of an intermediate weight exponent ``0 < beta < kappa``.

    ``c_low**(1 - beta/kappa) * c_high**(beta/kappa)`` interpolates the
    constants fitted at ``beta = 0`` and ``beta = kappa``.

    """
    if not 0 <= beta <= kappa:
        raise errors.DomainError(
            f'beta must lie in [0, kappa={kappa}], got {beta}'
        )
    if kappa == 0:
        return c_low
    weight = beta / kappa
    return c_low ** (1.0 - weight) * c_high**weight


def ab_mode_check(
    alpha: float,
    eps: float,
    modes: abc.Iterable[int],
    times: abc.Iterable[float],
    radii: abc.Iterable[float],
    *,
    slack: float = constants.HELD_OUT_SLACK,
) -> BoundReport:
    """Fit the single mode bound on even modes and check the odd ones.

    The weighted mode kernel ``(1+r)**(-3/2-eps) (1+r')**(-3/2-eps)
    p_m(r, r', t)`` is bounded by its diagonal values, so only
    ``r = r'`` is sampled.  Each sample is normalised by
    ``t**(-2-2 kappa) (|m + alpha| + 1)**(-1-eps)``.

    :raises relheat.errors.DomainError: for `eps` out of range
    :raises relheat.errors.EmptySampleSet: if either parity has no
        modes
    :raises relheat.errors.BoundRangeError: for times below one

    """
    kappa = field.kappa_of(alpha)
    times = sorted(times)
    radii = sorted(radii)
    template = BoundSpec(BoundKind.AB_MODE, kappa=kappa, eps=eps)
    ratios: dict[int, list[float]] = {0: [], 1: []}
    for mode in modes:
        nu = abs(mode + alpha)
        spec = dataclasses.replace(template, nu=nu)
        for t in times:
            for r in radii:
                value = ab_kernel.pm_diag(ab_kernel.ABModeArgs(nu, r, r, t))
                rhs = bound_rhs(spec, (r, 0.0), (r, 0.0), t)
                ratios[mode % 2].append(value / rhs)
    if not ratios[0] or not ratios[1]:
        raise errors.EmptySampleSet('need even and odd modes')
    constant = max(ratios[0])
    max_ratio = max(ratios[1]) / constant
    LOGGER.info(
        'ab_mode alpha=%g eps=%g: constant %.6g, odd modes %.6g',
        alpha,
        eps,
        constant,
        max_ratio,
    )
    return BoundReport(
        template.with_constant(constant),
        constant,
        max_ratio,
        max_ratio <= 1.0 + slack,
        len(ratios[0]),
        len(ratios[1]),
    )


def crossover_slopes(
    mass: float,
    small_times: npt.ArrayLike,
    large_times: npt.ArrayLike,
    *,
    spec: datastructures.QuadratureSpec | None = None,
) -> tuple[datastructures.DecayFit, datastructures.DecayFit]:
    """Decay of the free massive kernel on the diagonal.

    The kernel is obtained by subordinating ``1 / (4 pi s)`` with
    [relheat.quad.subordinate_massive][].  It falls like ``t**-2`` for
    small times and like ``t**-1`` for large ones.

    """
    if not mass > 0:
        raise errors.DomainError(f'mass must be positive, got {mass}')

    def base_kernel(s: float) -> float:
        return 1.0 / (4.0 * math.pi * s)

    def diagonal(t: float) -> float:
        inp = quad.SubordinationInput(base_kernel, t, mass)
        return quad.subordinate_massive(inp, spec).value

    fits = []
    for grid in (small_times, large_times):
        times = np.asarray(grid, dtype=float)
        values = [diagonal(float(t)) for t in times]
        fits.append(fit_exponent(times, values))
    return fits[0], fits[1]


def free_log_integral(
    t: float, spec: datastructures.QuadratureSpec | None = None
) -> float:
    """``log(2+t)**2 int_0^inf r**(-3/2) log(2 + r t**2)**(-2) e**(-1/4r) dr``

    This is the integer flux heat kernel bound after subordination,
    divided by ``t**-2 log(2+t)**-2``; it stays bounded in `t`.

    """
    if not t > 0:
        raise errors.DomainError(f'time must be positive, got {t}')
    spec = (spec or datastructures.QuadratureSpec()).replace(vectorized=True)
    t_sq = t * t

    def integrand(r: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return np.asarray(
            r**-1.5 * np.log(2.0 + r * t_sq) ** -2 * np.exp(-0.25 / r)
        )

    integral = quad.integrate_semi_infinite(integrand, spec).value
    return math.log(2.0 + t) ** 2 * integral


def fit_samples(
    samples: abc.Iterable[datastructures.KernelSample],
    *,
    weight_exponent: float = 0.0,
) -> dict[
    tuple[datastructures.Point, datastructures.Point],
    datastructures.DecayFit,
]:
    """Fit the decay of ``|K|`` separately for every pair of points.

    :param samples: kernel samples, for instance read from CSV
    :param weight_exponent: multiply each modulus by
        ``((1 + |x|) (1 + |y|))**-weight_exponent`` before fitting
    :returns: a fit per ``(x, y)`` in order of first appearance
    :raises relheat.errors.EmptySampleSet: without samples
    :raises relheat.errors.DomainError: when a group cannot be fitted

    """
    groups: dict[
        tuple[datastructures.Point, datastructures.Point],
        dict[float, float],
    ] = {}
    for sample in samples:
        r, r_prime = sample.radii
        weight = ((1.0 + r) * (1.0 + r_prime)) ** -weight_exponent
        groups.setdefault((sample.x, sample.y), {})[sample.t] = (
            weight * sample.modulus
        )
    if not groups:
        raise errors.EmptySampleSet('no kernel samples to fit')
    fits = {}
    for key, series in groups.items():
        times = sorted(series)
        fits[key] = fit_exponent(times, [series[t] for t in times])
    return fits


def fit_envelope(
    samples: abc.Iterable[datastructures.KernelSample],
    *,
    weight_exponent: float = 0.0,
) -> datastructures.DecayFit:
    """Fit the decay of the largest weighted ``|K|`` at each time.

    This is the sampled counterpart of a weighted supremum over the
    plane; see [relheat.bounds_fit.fit_samples][] for the weights.

    :raises relheat.errors.EmptySampleSet: without samples
    :raises relheat.errors.DomainError: when the envelope cannot be
        fitted

    """
    envelope: dict[float, float] = {}
    for sample in samples:
        r, r_prime = sample.radii
        weight = ((1.0 + r) * (1.0 + r_prime)) ** -weight_exponent
        envelope[sample.t] = max(
            envelope.get(sample.t, 0.0), weight * sample.modulus
        )
    if not envelope:
        raise errors.EmptySampleSet('no kernel samples to fit')
    times = sorted(envelope)
    return fit_exponent(times, [envelope[t] for t in times])


def interpolated_bound_check(
    samples: abc.Sequence[datastructures.KernelSample],
    kappa: float,
    *,
    slack: float = constants.HELD_OUT_SLACK,
) -> BoundReport:
    """Check the ``magnetic_poly`` bound at ``beta = kappa / 2``.

    The endpoint bounds ``beta = 0`` and ``beta = kappa`` are fitted
    with [relheat.bounds_fit.verify_bound][].  Their constants, raised
    to the largest held-out ratio, are combined by
    [relheat.bounds_fit.interpolated_constant][] and every sample is
    checked against the midpoint bound with that constant.

    :raises relheat.errors.DomainError: unless ``0 < kappa <= 1/2``

    """
    if not 0 < kappa <= 0.5:
        raise errors.DomainError(f'kappa must lie in (0, 1/2], got {kappa}')
    constants_at = []
    for beta in (0.0, kappa):
        spec = BoundSpec(BoundKind.MAGNETIC_POLY, beta=beta, kappa=kappa)
        report = verify_bound(spec, samples, slack=slack)
        constants_at.append(
            report.fitted_constant * max(1.0, report.max_ratio)
        )
    low, high = constants_at
    midpoint = 0.5 * kappa
    constant = interpolated_constant(low, high, midpoint, kappa)
    spec = BoundSpec(
        BoundKind.MAGNETIC_POLY, beta=midpoint, kappa=kappa, constant=constant
    )
    return verify_bound(spec, samples, fit=False, slack=slack)


@dataclasses.dataclass(frozen=True)
class MagneticDecayReport:
    """Outcome of [relheat.bounds_fit.magnetic_decay_check][].

    :param alpha: total flux of the profile
    :param kappa: distance of the flux from the integers
    :param expected_slope: ``-2 - 2 kappa``
    :param slopes: fitted decay exponent of the weighted kernel for
        each pair of points
    :param diamagnetic_ratio: largest ``(|K| - error) / K_free`` over
        the heat and the relativistic samples
    :param passed: every slope lies within the tolerance of
        `expected_slope` and the ratio does not exceed one
    :param samples: relativistic kernel samples

    """

    alpha: float
    kappa: float
    expected_slope: float
    slopes: tuple[float, ...]
    diamagnetic_ratio: float
    passed: bool
    samples: tuple[datastructures.KernelSample, ...] = dataclasses.field(
        default=(), repr=False, compare=False
    )

    @property
    def worst_deviation(self) -> float:
        """Largest distance of a slope from `expected_slope`."""
        return max(abs(slope - self.expected_slope) for slope in self.slopes)

    def as_dict(self) -> dict[str, typing.Any]:
        """JSON friendly representation without the samples."""
        return {
            'alpha': self.alpha,
            'kappa': self.kappa,
            'expected_slope': self.expected_slope,
            'slopes': list(self.slopes),
            'worst_deviation': self.worst_deviation,
            'diamagnetic_ratio': self.diamagnetic_ratio,
            'pass': self.passed,
        }

    def to_json(self) -> str:
        """Serialise the report."""
        return json.dumps(self.as_dict(), sort_keys=True)


def _field_solver(
    profile: field.FieldProfile,
    t_max: float,
    pairs: abc.Sequence[tuple[datastructures.Point, datastructures.Point]],
    grid: radial_solver.RadialGrid | None,
) -> radial_solver.RadialSolver:
    flux = field.flux_data(profile)
    if grid is None:
        reach = max(max(math.hypot(*x), math.hypot(*y)) for x, y in pairs)
        grid = radial_solver.default_grid(
            flux, t_max, reach, relativistic=True
        )
    return radial_solver.RadialSolver(flux, grid, estimate_error=False)


def _sampling_plan(
    times: abc.Iterable[float],
    pairs: abc.Iterable[tuple[datastructures.Point, datastructures.Point]],
) -> tuple[
    list[float],
    list[tuple[datastructures.Point, datastructures.Point]],
]:
    grid = sorted({float(t) for t in times})
    points = list(pairs)
    if not grid or not points:
        raise errors.EmptySampleSet('need at least one time and one pair')
    return grid, points


def magnetic_decay_check(
    profile: field.FieldProfile,
    times: abc.Iterable[float],
    pairs: abc.Iterable[tuple[datastructures.Point, datastructures.Point]],
    *,
    grid: radial_solver.RadialGrid | None = None,
    slope_tolerance: float = constants.SLOPE_TOLERANCE,
) -> MagneticDecayReport:
    """Decay of the subordinated solver kernel of a radial field.

    The massless relativistic kernel is computed with
    [relheat.radial_solver.RadialSolver][] at every time and pair of
    points.  Its modulus, weighted by ``((1+|x|) (1+|y|))**-kappa``,
    is fitted per pair and each slope is compared with
    ``-2 - 2 kappa``.  The heat kernel at the same times and the
    relativistic kernel are also compared with the free kernels, which
    dominate them.

    :param profile: compactly supported field
    :param times: times spanning at least a decade
    :param pairs: pairs of points inside of the grid
    :param grid: radial grid; [relheat.radial_solver.default_grid][]
        for relativistic kernels up to the largest time when omitted
    :param slope_tolerance: allowed deviation of each slope
    :raises relheat.errors.EmptySampleSet: without times or pairs
    :raises relheat.errors.DomainError: when the times cannot be
        fitted

    """
    t_grid, points = _sampling_plan(times, pairs)
    solver = _field_solver(profile, t_grid[-1], points, grid)
    kappa = solver.flux.kappa
    samples = []
    ratio = 0.0
    for t in t_grid:
        for x, y in points:
            sample = solver.relativistic_kernel(t, x, y)
            samples.append(sample)
            free = ab_kernel.free_relativistic_kernel(t, x, y)
            ratio = max(ratio, (sample.modulus - sample.error) / free)
            heat = solver.heat_kernel(t, x, y)
            gaussian = ab_kernel.free_heat_kernel(t, x, y)
            ratio = max(ratio, (heat.modulus - heat.error) / gaussian)
    fits = fit_samples(samples, weight_exponent=kappa)
    expected = -2.0 - 2.0 * kappa
    slopes = tuple(fit.slope for fit in fits.values())
    worst = max(abs(slope - expected) for slope in slopes)
    passed = worst <= slope_tolerance and ratio <= 1.0
    LOGGER.info(
        '%s: slopes %s against %g, diamagnetic ratio %.4g, %s',
        profile.description,
        ', '.join(f'{slope:.4f}' for slope in slopes),
        expected,
        ratio,
        'pass' if passed else 'FAIL',
    )
    return MagneticDecayReport(
        solver.flux.alpha,
        kappa,
        expected,
        slopes,
        ratio,
        passed,
        tuple(samples),
    )


@dataclasses.dataclass(frozen=True)
class LogBoundReport:
    """Outcome of [relheat.bounds_fit.log_bound_check][].

    :param alpha: total flux of the profile
    :param times: sampled times
    :param scaled: ``t**2 log(2+t)**2`` times the largest
        log-weighted kernel at each time
    :param growth: largest value of `scaled` over the last decade of
        times divided by its value at the start of that decade
    :param log_growth: growth of ``log(2+t)`` over the same decade
    :param passed: `growth` stays below `log_growth`

    """

    alpha: float
    times: tuple[float, ...]
    scaled: tuple[float, ...]
    growth: float
    log_growth: float
    passed: bool

    def as_dict(self) -> dict[str, typing.Any]:
        """JSON friendly representation."""
        data = dataclasses.asdict(self)
        data['times'] = list(self.times)
        data['scaled'] = list(self.scaled)
        data['pass'] = data.pop('passed')
        return data

    def to_json(self) -> str:
        """Serialise the report."""
        return json.dumps(self.as_dict(), sort_keys=True)


def log_bound_check(
    profile: field.FieldProfile,
    times: abc.Iterable[float],
    pairs: abc.Iterable[tuple[datastructures.Point, datastructures.Point]],
    *,
    grid: radial_solver.RadialGrid | None = None,
) -> LogBoundReport:
    """Boundedness of the integer flux kernel under the log bound.

    The massless relativistic kernel of `profile` is weighted by
    ``(log(2+|x|) log(2+|y|))**-1`` and multiplied by
    ``t**2 log(2+t)**2``.  Without the logarithmic improvement this
    product grows like ``log(2+t)**2``, so the check passes when its
    growth over the last decade of `times` stays below that of a
    single ``log(2+t)``.

    :param times: times spanning at least a decade
    :raises relheat.errors.EmptySampleSet: without times or pairs
    :raises relheat.errors.DomainError: when the times span less than
        a decade

    """
    t_grid, points = _sampling_plan(times, pairs)
    if t_grid[-1] < 10.0 * t_grid[0] * (1.0 - _DECADE_SLACK):
        raise errors.DomainError('times must span at least a decade')
    solver = _field_solver(profile, t_grid[-1], points, grid)
    scaled = []
    for t in t_grid:
        peak = 0.0
        for x, y in points:
            sample = solver.relativistic_kernel(t, x, y)
            r, r_prime = sample.radii
            weight = math.log(2.0 + r) * math.log(2.0 + r_prime)
            peak = max(peak, sample.modulus / weight)
        scaled.append(t * t * math.log(2.0 + t) ** 2 * peak)
    start = t_grid[-1] / 10.0 * (1.0 - _DECADE_SLACK)
    first = next(i for i, t in enumerate(t_grid) if t >= start)
    growth = max(scaled[first:]) / scaled[first]
    log_growth = math.log(2.0 + t_grid[-1]) / math.log(2.0 + t_grid[first])
    passed = growth <= log_growth
    LOGGER.info(
        '%s: last decade growth %.4g against %.4g, %s',
        profile.description,
        growth,
        log_growth,
        'pass' if passed else 'FAIL',
    )
    return LogBoundReport(
        solver.flux.alpha,
        tuple(t_grid),
        tuple(scaled),
        growth,
        log_growth,
        passed,
    )
