"""Exact relativistic kernels of the Aharonov-Bohm field.

- [relheat.ab_kernel.pm_diag][]: mode kernel on the diagonal
- [relheat.ab_kernel.pm_offdiag][]: mode kernel at two radii
- [relheat.ab_kernel.ab_full_kernel][]: the kernel of
  ``exp(-t sqrt(H))`` at two points of the plane
- [relheat.ab_kernel.ab_diagonal_kernel][]: the same on the diagonal
- [relheat.ab_kernel.weighted_sup][]: weighted supremum of the kernel
  over a set of radii
- [relheat.ab_kernel.cauchy_schwarz_offdiag_bound][]: check of
  ``p(r, r') <= sqrt(p(r, r) p(r', r'))``

The mode kernel of order ``nu = |m + alpha|`` is
``p(r, r', t) = int_0^inf exp(-t p) J_nu(r p) J_nu(r' p) p dp``.  With
``z = r**2 / t**2`` its diagonal is

    (2 nu + 1) / (pi t**2) * (4 z)**nu
        * int_0^1 s**(nu-1/2) (1-s)**(nu-1/2) (1 + 4 z s)**(-nu-3/2) ds

which is a Gauss hypergeometric function.  The free kernels of the
plane are provided as oracles.

"""

from __future__ import annotations

import dataclasses
import functools
import logging
import math
import typing
import warnings

import numpy as np
from scipy import special

from relheat import (
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

_PANEL_BATCH = 64
_MAX_PANELS = 50_000
_GRADED_LEVELS = 12
_COSH_LIMIT = 300.0
_MAX_MODES = 400
_FAR_FIELD = 1e100
"""Beyond this ``chi - 1`` only the order zero mode is not negligible"""

_FINE_NODES, _FINE_WEIGHTS = np.polynomial.legendre.leggauss(20)
_COARSE_NODES, _COARSE_WEIGHTS = np.polynomial.legendre.leggauss(10)


@dataclasses.dataclass(frozen=True)
class ABModeArgs:
    """Arguments of a single mode kernel.

    :param nu: Bessel order ``|m + alpha|``
    :param r: first radius
    :param r_prime: second radius
    :param t: time
    :raises relheat.errors.DomainError: for a negative or non-finite
        order, negative radii or non-positive time

    """

    nu: float
    r: float
    r_prime: float
    t: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.nu) and self.nu >= 0):
            raise errors.DomainError(f'order must be >= 0, got {self.nu}')
        if not (self.r >= 0 and self.r_prime >= 0):
            raise errors.DomainError(
                f'radii must be >= 0, got {self.r} and {self.r_prime}'
            )
        if not (self.t > 0 and math.isfinite(self.t)):
            raise errors.DomainError(f'time must be positive, got {self.t}')

    @classmethod
    def for_mode(
        cls, alpha: float, mode: int, r: float, r_prime: float, t: float
    ) -> ABModeArgs:
        """Arguments of mode `mode` for the flux `alpha`."""
        return cls(abs(mode + alpha), r, r_prime, t)

    @property
    def z(self) -> float:
        """``r**2 / t**2``"""
        return self.r * self.r / (self.t * self.t)

    def swapped(self) -> ABModeArgs:
        """The same arguments with the radii exchanged."""
        return dataclasses.replace(self, r=self.r_prime, r_prime=self.r)


def _origin_value(args: ABModeArgs) -> float:
    """Mode kernel when one of the radii vanishes."""
    if args.nu != 0:
        return 0.0
    other = max(args.r, args.r_prime)
    return args.t / (args.t * args.t + other * other) ** 1.5


def _diag_euler(
    args: ABModeArgs, spec: datastructures.QuadratureSpec
) -> float:
    """Diagonal from the Euler integral with bounded factors.

    The integrand is rewritten as
    ``q**nu s**(-1/2) (1-s)**(nu-1/2) (1 + 4 z s)**(-3/2)`` with
    ``q = 4 z s / (1 + 4 z s)`` so that nothing overflows for large
    orders.

    """
    nu, four_z = args.nu, 4.0 * args.z
    spec = spec.replace(vectorized=True)

    def integrand(
        s: npt.NDArray[np.float64], u: npt.NDArray[np.float64]
    ) -> npt.NDArray[np.float64]:
        stretched = 1.0 + four_z * s
        ratio = four_z * s / stretched
        return np.asarray(
            ratio**nu * s**-0.5 * u ** (nu - 0.5) * stretched**-1.5
        )

    def lower(s: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return integrand(s, 1.0 - s)

    def upper(u: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return integrand(1.0 - u, u)

    # the mass sits within 1/(4z) of the origin when z is large
    knee = 1.0 / (1.0 + four_z)
    if knee < 0.25:
        total = (
            quad.integrate_interval(lower, 0.0, knee, spec).value
            + quad.integrate_interval(lower, knee, 0.5, spec).value
        )
    else:
        total = quad.integrate_interval(lower, 0.0, 0.5, spec).value
    total += quad.integrate_interval(upper, 0.0, 0.5, spec).value
    return (2.0 * nu + 1.0) / (math.pi * args.t * args.t) * total


def _diag_hypergeometric(args: ABModeArgs) -> float:
    """Diagonal through ``2F1`` after the Pfaff transformation.

    ``B(nu+1/2, nu+1/2) q**nu (1 + 4z)**(-1/2)
    F(nu+1/2, nu-1/2; 2 nu+1; q)`` with ``q = 4z / (1 + 4z)``.

    """
    nu, four_z = args.nu, 4.0 * args.z
    q = four_z / (1.0 + four_z)
    half = nu + 0.5
    log_factor = 2.0 * specfun.log_gamma(half) - specfun.log_gamma(
        2.0 * half
    )
    if nu > 0:
        log_factor += nu * math.log(q)
    series = specfun.hyp2f1(half, nu - 0.5, 2.0 * nu + 1.0, q)
    prefactor = (2.0 * nu + 1.0) / (math.pi * args.t * args.t)
    return prefactor * math.exp(log_factor) * series / math.sqrt(1 + four_z)


def _bessel_panels(
    args: ABModeArgs,
) -> tuple[float, npt.NDArray[np.float64]]:
    """Panel width and the graded breakpoints of the first panel."""
    frequency = args.r + args.r_prime
    width = min(math.pi / frequency, 2.0 / args.t)
    graded = width * 2.0 ** -np.arange(_GRADED_LEVELS, -1, -1, dtype=float)
    return width, np.concatenate(([0.0], graded))


def _gauss_legendre(
    integrand: abc.Callable[
        [npt.NDArray[np.float64]], npt.NDArray[np.float64]
    ],
    edges: npt.NDArray[np.float64],
) -> tuple[float, float]:
    """Sum of the 20 point rule over panels and its distance to the 10
    point rule."""
    left, right = edges[:-1, np.newaxis], edges[1:, np.newaxis]
    half, middle = 0.5 * (right - left), 0.5 * (right + left)
    fine = half * (
        integrand(middle + half * _FINE_NODES) @ _FINE_WEIGHTS
    )[:, np.newaxis]
    coarse = half * (
        integrand(middle + half * _COARSE_NODES) @ _COARSE_WEIGHTS
    )[:, np.newaxis]
    return math.fsum(fine.ravel()), float(np.sum(np.abs(fine - coarse)))


def _offdiag_bessel(
    args: ABModeArgs, spec: datastructures.QuadratureSpec
) -> datastructures.QuadResult:
    """Bessel product integral over panels of half an oscillation.

    Integration stops once ``int_P^inf exp(-t p) p dp`` drops below a
    tenth of the tolerance since ``|J_nu| <= 1``.

    """
    nu, r, r_prime, t = args.nu, args.r, args.r_prime, args.t

    def integrand(p: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return np.asarray(
            np.exp(-t * p)
            * specfun.bessel_j_array(nu, r * p)
            * specfun.bessel_j_array(nu, r_prime * p)
            * p
        )

    width, first = _bessel_panels(args)
    total, error = _gauss_legendre(integrand, first)
    evaluations = 30 * (first.size - 1)
    start, panels = width, 0
    while panels < _MAX_PANELS:
        remainder = math.exp(-t * start) * (start / t + 1.0 / (t * t))
        if remainder <= 0.1 * spec.tolerance(total):
            LOGGER.debug(
                'bessel product integral used %d panels up to p=%g',
                panels,
                start,
            )
            break
        edges = start + width * np.arange(_PANEL_BATCH + 1, dtype=float)
        value, panel_error = _gauss_legendre(integrand, edges)
        total += value
        error += panel_error
        evaluations += 30 * _PANEL_BATCH
        start = float(edges[-1])
        panels += _PANEL_BATCH
    else:
        raise errors.ConvergenceFailure(
            f'bessel product integral needs more than {_MAX_PANELS} panels',
            estimate=total,
            achieved=remainder,
        )
    error += remainder
    if error > spec.tolerance(total):
        raise errors.ConvergenceFailure(
            f'bessel product integral reached only {error:.3g}',
            estimate=total,
            achieved=error,
        )
    return datastructures.QuadResult(total, error, evaluations)


def _sigma(chi_minus_one: float) -> float:
    """``sqrt(chi**2 - 1)`` from ``chi - 1``."""
    return chi_minus_one * math.sqrt(1.0 + 2.0 / chi_minus_one)


def _offdiag_legendre(
    args: ABModeArgs, spec: datastructures.QuadratureSpec
) -> datastructures.QuadResult:
    """Mode kernel as the time derivative of a Legendre function.

    ``int_0^inf exp(-t p) J_nu(r p) J_nu(r' p) dp`` equals
    ``Q_{nu-1/2}(chi) / (pi sqrt(r r'))`` with
    ``chi = (t**2 + r**2 + r'**2) / (2 r r')``, and differentiating in
    ``t`` the integral representation
    ``Q_mu(chi) = int_0^inf (chi + sigma cosh u)**(-mu-1) du`` with
    ``sigma = sqrt(chi**2 - 1)`` gives a positive integrand without
    oscillations.

    """
    nu, r, r_prime, t = args.nu, args.r, args.r_prime, args.t
    product = r * r_prime
    chi_minus_one = (t * t + (r - r_prime) ** 2) / (2.0 * product)
    if chi_minus_one > _FAR_FIELD:
        return datastructures.QuadResult(_origin_value(args), 0.0, 0)
    chi = 1.0 + chi_minus_one
    sigma = _sigma(chi_minus_one)
    order = nu + 0.5

    def integrand(u: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        cosh = np.cosh(np.minimum(u, _COSH_LIMIT))
        denominator = chi + sigma * cosh
        values = denominator**-order * (sigma + chi * cosh) / (
            sigma * denominator
        )
        return np.where(u > _COSH_LIMIT, 0.0, values)

    result = quad.integrate_semi_infinite(
        integrand, spec.replace(vectorized=True)
    )
    scale = order * t / (math.pi * product**1.5)
    return datastructures.QuadResult(
        scale * result.value, scale * result.error, result.evaluations
    )


def pm_diag(
    args: ABModeArgs,
    *,
    route: str = 'euler',
    spec: datastructures.QuadratureSpec | None = None,
) -> float:
    """Mode kernel ``p(r, r, t)`` at the radius ``args.r``.

    :param args: order, radius and time; `r_prime` is ignored
    :param route: ``euler`` integrates the Euler integral over
        ``[0, 1]``, ``hypergeometric`` evaluates the closed form with
        [relheat.specfun.hyp2f1][] and ``bessel`` integrates the Bessel
        product directly
    :raises relheat.errors.ConvergenceFailure: from the special
        functions or the quadrature
    :raises relheat.errors.DomainError: for an unknown `route`

    """
    spec = spec or datastructures.QuadratureSpec()
    args = dataclasses.replace(args, r_prime=args.r)
    if args.r == 0:
        return _origin_value(args)
    if route == 'euler':
        return _diag_euler(args, spec)
    if route == 'hypergeometric':
        return _diag_hypergeometric(args)
    if route == 'bessel':
        return _offdiag_bessel(args, spec).value
    raise errors.DomainError(f'unknown diagonal route {route!r}')


def pm_offdiag(
    args: ABModeArgs,
    *,
    route: str = 'bessel',
    spec: datastructures.QuadratureSpec | None = None,
) -> float:
    """Mode kernel ``p(r, r', t)``.

    :param route: ``bessel`` integrates the damped Bessel product over
        panels of half an oscillation, ``legendre`` uses the
        Legendre function representation
    :raises relheat.errors.ConvergenceFailure: when the quadrature
        does not reach its tolerance; the exception carries the
        achieved error
    :raises relheat.errors.DomainError: for an unknown `route`

    """
    spec = spec or datastructures.QuadratureSpec()
    if args.r == 0 or args.r_prime == 0:
        return _origin_value(args)
    if route == 'bessel':
        return _offdiag_bessel(args, spec).value
    if route == 'legendre':
        return _offdiag_legendre(args, spec).value
    raise errors.DomainError(f'unknown off-diagonal route {route!r}')


def _mode_value(args: ABModeArgs) -> float:
    """Fastest available evaluation of a mode kernel."""
    if args.r == 0 or args.r_prime == 0:
        return _origin_value(args)
    if args.r == args.r_prime:
        return pm_diag(args)
    return pm_offdiag(args, route='legendre')


def _decay_ratio(r: float, r_prime: float, t: float) -> float:
    """Ratio of successive mode kernels for large orders.

    ``Q_mu(chi)`` falls like ``(chi + sqrt(chi**2 - 1))**(-mu)``.

    """
    if r == 0 or r_prime == 0:
        return 0.0
    chi_minus_one = (t * t + (r - r_prime) ** 2) / (2.0 * r * r_prime)
    sigma = _sigma(chi_minus_one)
    return 1.0 / (1.0 + chi_minus_one + sigma)


def _evaluation_method(
    r: float, r_prime: float, t: float
) -> datastructures.Method:
    """How [relheat.ab_kernel.ab_full_kernel][] obtains its mode kernels.

    The origin and the far field have closed forms.  Other mode
    kernels come from the Euler integral on the diagonal and from the
    Legendre integral elsewhere.

    """
    if r == 0 or r_prime == 0:
        return datastructures.Method.AB_CLOSED
    chi_minus_one = (t * t + (r - r_prime) ** 2) / (2.0 * r * r_prime)
    if r != r_prime and chi_minus_one > _FAR_FIELD:
        return datastructures.Method.AB_CLOSED
    return datastructures.Method.AB_QUADRATURE


def ab_full_kernel(
    alpha: float,
    t: float,
    x: datastructures.Point,
    y: datastructures.Point,
    mode_cutoff: int | None = None,
    *,
    tolerance: float = constants.MODE_TOLERANCE,
) -> datastructures.KernelSample:
    """Kernel of ``exp(-t sqrt(H_alpha))`` at ``(x, y)``.

    :param alpha: flux of the Aharonov-Bohm field
    :param t: time
    :param x: first point
    :param y: second point
    :param mode_cutoff: number of modes summed on each side of
        ``m = -floor(alpha + 1/2)``; chosen from the decay of the mode
        kernels when omitted
    :param tolerance: relative size of the neglected tail
    :returns: the kernel together with an estimate of the neglected
        tail as its error

    ``(1/2 pi) sum_m p_m(r, r', t) exp(i m (theta - theta'))`` is
    summed in order of increasing ``|m + alpha|``.  A
    [relheat.errors.CutoffInsufficient][] warning is issued when the
    estimated tail exceeds `tolerance`.

    """
    if not t > 0:
        raise errors.DomainError(f'time must be positive, got {t}')
    if mode_cutoff is not None and mode_cutoff < 1:
        raise errors.DomainError('mode_cutoff must be at least 1')
    r, r_prime = math.hypot(*x), math.hypot(*y)
    rho = _decay_ratio(r, r_prime, t)
    if mode_cutoff is not None:
        half_width = mode_cutoff
    elif rho == 0:
        half_width = 1
    else:
        needed = math.log(tolerance) / math.log(rho) + 1.0
        half_width = max(1, min(_MAX_MODES, math.ceil(needed)))
    delta = datastructures.phase_difference(x, y)
    total = 0j
    terms: list[float] = []
    for mode in radial_solver.centred_modes(alpha, half_width):
        value = _mode_value(ABModeArgs.for_mode(alpha, mode, r, r_prime, t))
        terms.append(value)
        angle = mode * delta
        total += value * complex(math.cos(angle), math.sin(angle))
    total /= 2.0 * math.pi
    tail = 0.0
    if rho > 0:
        tail = (terms[-1] + terms[-2]) * rho / (1.0 - rho) / (2.0 * math.pi)
    LOGGER.debug(
        'alpha=%g t=%g: %d modes, tail %.3g', alpha, t, len(terms), tail
    )
    if tail > tolerance * max(abs(total), 1e-300):
        warnings.warn(
            f'{half_width} modes leave a tail of {tail:.3g}',
            errors.CutoffInsufficient,
            stacklevel=2,
        )
    method = _evaluation_method(r, r_prime, t)
    return datastructures.KernelSample(t, x, y, total, tail, method)


def ab_diagonal_kernel(
    alpha: float, t: float, r: float, mode_cutoff: int | None = None
) -> float:
    """``(1/2 pi) sum_m p_m(r, r, t)``, the kernel at ``x = y``."""
    sample = ab_full_kernel(alpha, t, (r, 0.0), (r, 0.0), mode_cutoff)
    return sample.value.real


def weighted_sup(
    alpha: float, t: float, eps: float, radii: abc.Iterable[float]
) -> float:
    """Largest weighted kernel over points with radii in `radii`.

    The weight is ``(1 + |x|)**(-3/2-eps) (1 + |y|)**(-3/2-eps)``.  The
    kernel is positive definite, so ``|K(x, y)|`` is bounded by
    ``sqrt(K(x, x) K(y, y))`` and the supremum over pairs is attained
    on the diagonal.  The result is a lower bound for the supremum over
    the plane.

    :raises relheat.errors.DomainError: unless ``0 < eps < eps0`` of
        `alpha` and `radii` is a non-empty set of non-negative values

    """
    eps0 = field.eps0_of(alpha)
    if not 0 < eps < eps0:
        raise errors.DomainError(
            f'eps must lie in (0, {eps0:g}) for alpha={alpha}, got {eps}'
        )
    grid = sorted({float(radius) for radius in radii})
    if not grid or grid[0] < 0:
        raise errors.DomainError('radii must be a non-empty set of r >= 0')
    exponent = -3.0 - 2.0 * eps
    return max(
        (1.0 + radius) ** exponent * ab_diagonal_kernel(alpha, t, radius)
        for radius in grid
    )


def cauchy_schwarz_offdiag_bound(
    args: ABModeArgs, *, slack: float = 1e-10
) -> bool:
    """Check ``p(r, r', t) <= sqrt(p(r, r, t) p(r', r', t))``."""
    if args.r == args.r_prime:
        return True
    lhs = pm_offdiag(args)
    rhs = math.sqrt(pm_diag(args) * pm_diag(args.swapped()))
    return lhs <= rhs * (1.0 + slack)


def heat_mode_kernel(nu: float, r: float, r_prime: float, s: float) -> float:
    """Kernel of ``exp(-s h)`` for the free mode of order `nu`.

    ``exp(-(r - r')**2 / 4s) ive(nu, r r' / 2s) / 2s`` in the
    ``r dr`` measure.

    """
    if not s > 0:
        raise errors.DomainError(f'time must be positive, got {s}')
    z = r * r_prime / (2.0 * s)
    return float(
        math.exp(-((r - r_prime) ** 2) / (4.0 * s))
        * special.ive(nu, z)
        / (2.0 * s)
    )


def _distance_sq(x: datastructures.Point, y: datastructures.Point) -> float:
    return (x[0] - y[0]) ** 2 + (x[1] - y[1]) ** 2


def free_heat_kernel(
    s: float, x: datastructures.Point, y: datastructures.Point
) -> float:
    """``exp(-|x - y|**2 / 4s) / (4 pi s)``"""
    if not s > 0:
        raise errors.DomainError(f'time must be positive, got {s}')
    return math.exp(-_distance_sq(x, y) / (4.0 * s)) / (4.0 * math.pi * s)


def free_relativistic_kernel(
    t: float,
    x: datastructures.Point,
    y: datastructures.Point,
    mass: float = 0.0,
) -> float:
    """Kernel of ``exp(-t (sqrt(-Laplace + m**2) - m))`` in the plane.

    With ``rho = sqrt(t**2 + |x - y|**2)`` it equals
    ``t (1 + m rho) exp(-m (rho - t)) / (2 pi rho**3)``.

    """
    if not t > 0:
        raise errors.DomainError(f'time must be positive, got {t}')
    if mass < 0:
        raise errors.DomainError(f'mass must be >= 0, got {mass}')
    distance_sq = _distance_sq(x, y)
    rho = math.sqrt(t * t + distance_sq)
    # rho - t without cancellation
    excess = distance_sq / (rho + t)
    return (
        t
        * (1.0 + mass * rho)
        * math.exp(-mass * excess)
        / (2.0 * math.pi * rho**3)
    )


@functools.lru_cache(maxsize=4096)
def _cached_mode(nu: float, r: float, r_prime: float, t: float) -> float:
    return _mode_value(ABModeArgs(nu, r, r_prime, t))


def mode_semigroup_residual(
    nu: float,
    r: float,
    r_prime: float,
    t: float,
    s: float,
    *,
    spec: datastructures.QuadratureSpec | None = None,
) -> float:
    """Relative defect of ``p(t) p(s) = p(t + s)`` for one mode.

    ``int_0^inf p(r, u, t) p(u, r', s) u du`` is compared with
    ``p(r, r', t + s)``.

    """
    spec = spec or datastructures.QuadratureSpec(rel_tol=1e-8)
    spec = spec.replace(vectorized=False)

    def integrand(u: float) -> float:
        return _cached_mode(nu, r, u, t) * _cached_mode(nu, u, r_prime, s) * u

    composed = quad.integrate_semi_infinite(integrand, spec).value
    direct = _mode_value(ABModeArgs(nu, r, r_prime, t + s))
    return abs(composed - direct) / abs(direct)
