"""Important data structures.

- [relheat.datastructures.QuadratureSpec][]: how a semi-infinite
  integral is to be computed
- [relheat.datastructures.QuadResult][]: value and error estimate of a
  quadrature
- [relheat.datastructures.KernelSample][]: one value of a heat kernel
  with provenance
- [relheat.datastructures.DecayFit][]: fitted power law
- [relheat.datastructures.phase_difference][]: angle between two points

This module contains data structures that are shared between several
modules.  Types that only make sense inside of a single module (for
example the radial grid) live next to the code that uses them.

"""

from __future__ import annotations

import dataclasses
import enum
import math
import typing

from relheat import constants, errors


class Transform(str, enum.Enum):
    """Variable transformation applied to a semi-infinite integral."""

    EXP_SUBSTITUTION = 'exp_substitution'
    DOUBLE_EXPONENTIAL = 'double_exponential'
    NONE = 'none'


@dataclasses.dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and strategy for a quadrature.

    :param abs_tol: absolute error target
    :param rel_tol: relative error target
    :param max_subdivisions: number of adaptive bisections (Gauss-Kronrod
        strategies) or refinement levels (double exponential strategy)
        that may be used
    :param transform: how the half line is mapped
    :param max_nodes: upper bound on integrand evaluations; expensive
        integrands such as solver-backed kernels lower this
    :param vectorized: the integrand accepts and returns
        [numpy.ndarray][] values

    The integral is accepted once the error estimate is below
    ``max(abs_tol, rel_tol * |estimate|)``.

    """

    abs_tol: float = constants.DEFAULT_ABS_TOL
    rel_tol: float = constants.DEFAULT_REL_TOL
    max_subdivisions: int = constants.DEFAULT_MAX_SUBDIVISIONS
    transform: Transform = Transform.DOUBLE_EXPONENTIAL
    max_nodes: int = constants.DEFAULT_MAX_NODES
    vectorized: bool = False

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise errors.DomainError('quadrature tolerances must be > 0')
        if self.max_subdivisions < 1:
            raise errors.DomainError('max_subdivisions must be >= 1')
        if self.max_nodes < 16:
            raise errors.DomainError('max_nodes must be >= 16')
        object.__setattr__(self, 'transform', Transform(self.transform))

    def tolerance(self, estimate: float) -> float:
        """Error that is acceptable for `estimate`."""
        return max(self.abs_tol, self.rel_tol * abs(estimate))

    def replace(self, **changes: typing.Any) -> QuadratureSpec:  # noqa: ANN401
        """Copy with `changes` applied."""
        return dataclasses.replace(self, **changes)


class QuadResult(typing.NamedTuple):
    """Value of an integral and its error estimate."""

    value: float
    error: float
    evaluations: int


class Method(str, enum.Enum):
    """Provenance of a kernel value."""

    AB_CLOSED = 'ab-closed'
    AB_QUADRATURE = 'ab-quadrature'
    SOLVER = 'solver'
    SOLVER_SUBORDINATION = 'solver+subordination'
    SOLVER_SPECTRAL = 'solver+spectral'
    FREE_CLOSED = 'free-closed'


Point = tuple[float, float]


@dataclasses.dataclass(frozen=True)
class KernelSample:
    """A single heat kernel value.

    :param t: time
    :param x: first point in the plane
    :param y: second point in the plane
    :param value: kernel value; complex since magnetic kernels are
    :param error: error estimate accompanying `value`
    :param method: how the value was computed
    :param nu: partial-wave order when the sample belongs to a
        single mode rather than to the full kernel

    """

    t: float
    x: Point
    y: Point
    value: complex
    error: float = 0.0
    method: Method = Method.AB_CLOSED
    nu: float | None = None

    @property
    def modulus(self) -> float:
        """Absolute value of the kernel."""
        return abs(self.value)

    @property
    def radii(self) -> tuple[float, float]:
        """Distances of `x` and `y` from the origin."""
        return math.hypot(*self.x), math.hypot(*self.y)


@dataclasses.dataclass(frozen=True)
class DecayFit:
    """Least squares power law ``value ~ exp(intercept) * t**slope``.

    :param times: strictly increasing times
    :param values: positive values, one per time
    :param slope: fitted exponent
    :param intercept: fitted log prefactor
    :param residual: root mean square of the log-space residuals
    :param slope_stderr: standard error of `slope`

    """

    times: tuple[float, ...]
    values: tuple[float, ...]
    slope: float
    intercept: float
    residual: float
    slope_stderr: float = 0.0

    def band(self, width: float = 2.0) -> tuple[float, float]:
        """Confidence band ``slope -/+ width * slope_stderr``."""
        return (
            self.slope - width * self.slope_stderr,
            self.slope + width * self.slope_stderr,
        )

    def as_dict(self) -> dict[str, typing.Any]:
        """JSON friendly representation."""
        return {
            'times': list(self.times),
            'values': list(self.values),
            'slope': self.slope,
            'intercept': self.intercept,
            'residual': self.residual,
            'slope_stderr': self.slope_stderr,
        }


def phase_difference(x: Point, y: Point) -> float:
    """Polar angle of `x` minus that of `y`, in ``(-pi, pi]``.

    The angle comes from one ``atan2`` of the cross and dot products
    so no two large angles are subtracted.

    """
    cross = y[0] * x[1] - y[1] * x[0]
    dot = y[0] * x[0] + y[1] * x[1]
    return math.atan2(cross, dot) if cross or dot else 0.0
