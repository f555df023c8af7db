"""Quadrature for decaying integrands and semigroup subordination.

- [relheat.quad.integrate_semi_infinite][]: integral over a half line
- [relheat.quad.integrate_interval][]: integral over a finite interval
  with integrable endpoint singularities
- [relheat.quad.subordinate_massless][]: turn a heat kernel into the
  kernel of the massless relativistic semigroup
- [relheat.quad.subordinate_massive][]: the same with a positive mass
- [relheat.quad.substituted_moment][]: the Gaussian-type moment that
  controls the massive kernel

The default strategy is the double exponential (exp-sinh) rule which
handles algebraic singularities at the origin as well as exponential
and algebraic decay without tuning.  Finite intervals use the
tanh-sinh rule.  Both halve the step until two consecutive levels
agree.

"""

from __future__ import annotations

import dataclasses
import heapq
import logging
import math
import typing
import warnings

import numpy as np

from relheat import datastructures, errors

if typing.TYPE_CHECKING:
    from collections import abc

    import numpy.typing as npt

    Mapping = abc.Callable[
        [npt.NDArray[np.float64]],
        tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]],
    ]

LOGGER = logging.getLogger(__name__)

Integrand = typing.Callable[[typing.Any], typing.Any]
"""A function of one real variable, scalar or vectorised"""

_HALF_PI = 0.5 * math.pi
_INITIAL_STEP = 0.5
_EXP_SINH_RANGE = (-5.0, 5.0)
_TANH_SINH_RANGE = (-4.5, 4.5)
_MAX_SEGMENTS = 200
_ROUNDOFF = 64.0 * float(np.finfo(float).eps)
_NEAR_MISS = 1e4

# Gauss-Kronrod 7/15 abscissae on [0, 1] of the symmetric rule, the
# Kronrod weights for every abscissa and the Gauss weights for the
# abscissae with odd index.
_GK_NODES = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_KRONROD_WEIGHTS = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_GAUSS_WEIGHTS = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_GK_ABSCISSAE = np.concatenate((-_GK_NODES[:-1], _GK_NODES[::-1]))
_GK_KRONROD = np.concatenate(
    (_KRONROD_WEIGHTS[:-1], _KRONROD_WEIGHTS[::-1])
)
_GK_GAUSS = np.zeros(15)
_GK_GAUSS[[1, 3, 5]] = _GAUSS_WEIGHTS[:3]
_GK_GAUSS[7] = _GAUSS_WEIGHTS[3]
_GK_GAUSS[[9, 11, 13]] = _GAUSS_WEIGHTS[2::-1]


def _default_spec(
    spec: datastructures.QuadratureSpec | None,
) -> datastructures.QuadratureSpec:
    return datastructures.QuadratureSpec() if spec is None else spec


def _evaluate(
    f: Integrand,
    nodes: npt.NDArray[np.float64],
    spec: datastructures.QuadratureSpec,
) -> npt.NDArray[np.float64]:
    if spec.vectorized:
        values = np.asarray(f(nodes), dtype=float)
        values = np.broadcast_to(values, nodes.shape)
    else:
        values = np.fromiter(
            (f(float(x)) for x in nodes), float, nodes.size
        )
    if not np.all(np.isfinite(values)):
        bad = float(nodes[~np.isfinite(values)][0])
        raise errors.IntegrandError(
            f'integrand is not finite at {bad!r}',
            estimate=math.nan,
            achieved=math.inf,
        )
    return values


def _level_offsets(
    level: int, tau_min: float, tau_max: float
) -> npt.NDArray[np.float64]:
    step = _INITIAL_STEP / (1 << level)
    if level == 0:
        first, last = math.ceil(tau_min / step), math.floor(tau_max / step)
        return step * np.arange(first, last + 1, dtype=float)
    first = math.ceil((tau_min / step - 1) / 2)
    last = math.floor((tau_max / step - 1) / 2)
    return step * (2.0 * np.arange(first, last + 1, dtype=float) + 1.0)


def _double_exponential(
    f: Integrand,
    mapping: Mapping,
    tau_range: tuple[float, float],
    spec: datastructures.QuadratureSpec,
) -> datastructures.QuadResult:
    """Trapezoidal rule in the transformed variable with step halving.

    The truncation error is estimated from the outermost nodes that
    were kept on any level.  Nodes that round onto an end point are
    dropped, so the outermost kept node moves outwards as the step
    shrinks.

    """
    total = magnitude = 0.0
    evaluations = 0
    previous = estimate = math.nan
    error = math.inf
    low = (math.inf, 0.0)
    high = (-math.inf, 0.0)
    for level in range(spec.max_subdivisions + 1):
        tau = _level_offsets(level, *tau_range)
        nodes, weights = mapping(tau)
        keep = weights > 0.0
        tau, nodes, weights = tau[keep], nodes[keep], weights[keep]
        if evaluations + nodes.size > spec.max_nodes:
            LOGGER.debug(
                'node budget %d exhausted at level %d',
                spec.max_nodes,
                level,
            )
            break
        values = _evaluate(f, nodes, spec) * weights
        evaluations += nodes.size
        total += math.fsum(values)
        magnitude += math.fsum(np.abs(values))
        if values.size:
            low = min(low, (float(tau[0]), abs(float(values[0]))))
            high = max(high, (float(tau[-1]), abs(float(values[-1]))))
        step = _INITIAL_STEP / (1 << level)
        previous, estimate = estimate, step * total
        if level >= 2:
            edge = _INITIAL_STEP * max(low[1], high[1])
            error = abs(estimate - previous) + edge
            roundoff = _ROUNDOFF * step * magnitude
            if error <= max(spec.tolerance(estimate), roundoff):
                LOGGER.debug(
                    'converged at level %d after %d evaluations',
                    level,
                    evaluations,
                )
                return datastructures.QuadResult(
                    estimate, error, evaluations
                )
    result = datastructures.QuadResult(estimate, error, evaluations)
    return _best_effort(
        'double exponential quadrature', result, spec.tolerance(estimate)
    )


def _best_effort(
    rule: str, result: datastructures.QuadResult, target: float
) -> datastructures.QuadResult:
    """Accept a near miss with a warning, fail on anything else."""
    message = (
        f'{rule} did not converge (error {result.error:.3g} '
        f'after {result.evaluations} evaluations)'
    )
    if result.error <= _NEAR_MISS * target:
        warnings.warn(message, errors.ToleranceNotReached, stacklevel=4)
        return result
    raise errors.ConvergenceFailure(
        message, estimate=result.value, achieved=result.error
    )


def _exp_sinh(lower: float) -> Mapping:
    def mapping(
        tau: npt.NDArray[np.float64],
    ) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        offset = np.exp(_HALF_PI * np.sinh(tau))
        nodes = lower + offset
        weights = offset * _HALF_PI * np.cosh(tau)
        return nodes, np.where(nodes > lower, weights, 0.0)

    return mapping


def _tanh_sinh(a: float, b: float) -> Mapping:
    width = b - a

    def mapping(
        tau: npt.NDArray[np.float64],
    ) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        arg = math.pi * np.sinh(tau)
        with np.errstate(over='ignore'):
            left = 1.0 / (1.0 + np.exp(-arg))
            right = 1.0 / (1.0 + np.exp(arg))
        nodes = np.where(tau < 0, a + width * left, b - width * right)
        weights = width * left * right * math.pi * np.cosh(tau)
        inside = (nodes > a) & (nodes < b)
        return nodes, np.where(inside, weights, 0.0)

    return mapping


def _kronrod_segment(
    f: Integrand,
    a: float,
    b: float,
    spec: datastructures.QuadratureSpec,
) -> tuple[float, float]:
    half = 0.5 * (b - a)
    values = _evaluate(f, a + half * (_GK_ABSCISSAE + 1.0), spec)
    kronrod = half * float(values @ _GK_KRONROD)
    gauss = half * float(values @ _GK_GAUSS)
    return kronrod, abs(kronrod - gauss)


def _adaptive_kronrod(
    f: Integrand,
    a: float,
    b: float,
    spec: datastructures.QuadratureSpec,
    *,
    tolerance: float | None = None,
) -> datastructures.QuadResult:
    """Bisect the segment with the largest error until the sum is good."""
    value, error = _kronrod_segment(f, a, b, spec)
    heap = [(-error, a, b, value)]
    evaluations = 15
    for _ in range(spec.max_subdivisions):
        total = math.fsum(entry[3] for entry in heap)
        error = sum(-entry[0] for entry in heap)
        target = spec.tolerance(total) if tolerance is None else tolerance
        if error <= target:
            return datastructures.QuadResult(total, error, evaluations)
        if evaluations + 30 > spec.max_nodes:
            break
        _, left, right, _ = heapq.heappop(heap)
        middle = 0.5 * (left + right)
        for lo, hi in ((left, middle), (middle, right)):
            part, part_error = _kronrod_segment(f, lo, hi, spec)
            heapq.heappush(heap, (-part_error, lo, hi, part))
        evaluations += 30
    total = math.fsum(entry[3] for entry in heap)
    error = sum(-entry[0] for entry in heap)
    target = spec.tolerance(total) if tolerance is None else tolerance
    result = datastructures.QuadResult(total, error, evaluations)
    if error <= target:
        return result
    return _best_effort(
        f'Gauss-Kronrod bisection on [{a}, {b}]', result, target
    )


def _segmented_kronrod(
    f: Integrand, lower: float, spec: datastructures.QuadratureSpec
) -> datastructures.QuadResult:
    """Integrate over doubling segments until they stop contributing."""
    value = error = 0.0
    evaluations = 0
    left, width = lower, 1.0
    quiet = 0
    for _ in range(_MAX_SEGMENTS):
        part = _adaptive_kronrod(f, left, left + width, spec)
        value += part.value
        error += part.error
        evaluations += part.evaluations
        if abs(part.value) <= spec.tolerance(value) * 1e-2:
            quiet += 1
            if quiet == 2:
                return datastructures.QuadResult(value, error, evaluations)
        else:
            quiet = 0
        left, width = left + width, 2.0 * width
    raise errors.ConvergenceFailure(
        'integrand does not decay over the segmented half line',
        estimate=value,
        achieved=error,
    )


def integrate_semi_infinite(
    f: Integrand,
    spec: datastructures.QuadratureSpec | None = None,
    *,
    lower: float = 0.0,
) -> datastructures.QuadResult:
    """Integrate `f` over ``[lower, inf)``.

    :param f: integrand; it is never evaluated at `lower` itself
    :param spec: tolerances and strategy, defaults to
        [relheat.datastructures.QuadratureSpec][]
    :param lower: finite lower limit of integration
    :returns: the value, its error estimate and the number of
        integrand evaluations
    :raises relheat.errors.ConvergenceFailure: if the error is still
        far above the tolerance when the subdivision or node budget
        runs out
    :raises relheat.errors.IntegrandError: if `f` returned a
        non-finite value

    An error that misses the tolerance by a small factor, or that is
    already at the rounding level of the sum, is accepted.  The near
    miss is reported with a [relheat.errors.ToleranceNotReached][]
    warning.

    The ``double_exponential`` transform maps the half line with
    ``x = lower + exp(pi/2 sinh(tau))``.  ``exp_substitution`` maps it
    onto ``(0, 1)`` with ``x = lower - log(v)`` and bisects adaptively
    with a 7/15 point Gauss-Kronrod pair, and ``none`` applies the
    same pair to the doubling segments ``[0, 1], [1, 2], [2, 4], ...``.

    """
    spec = _default_spec(spec)
    transform = spec.transform
    if transform is datastructures.Transform.DOUBLE_EXPONENTIAL:
        return _double_exponential(f, _exp_sinh(lower), _EXP_SINH_RANGE, spec)
    if transform is datastructures.Transform.EXP_SUBSTITUTION:

        def substituted(v: typing.Any) -> typing.Any:  # noqa: ANN401
            return f(lower - np.log(v)) / v

        return _adaptive_kronrod(substituted, 0.0, 1.0, spec)
    return _segmented_kronrod(f, lower, spec)


def integrate_interval(
    f: Integrand,
    a: float,
    b: float,
    spec: datastructures.QuadratureSpec | None = None,
) -> datastructures.QuadResult:
    """Integrate `f` over ``[a, b]`` with the tanh-sinh rule.

    Endpoint singularities are allowed.  The distance of each node
    from `a` is computed without cancellation so singularities belong
    at the left end; callers reflect the integrand when both ends are
    singular.

    """
    spec = _default_spec(spec)
    if a == b:
        return datastructures.QuadResult(0.0, 0.0, 0)
    if a > b:
        value, error, evaluations = integrate_interval(f, b, a, spec)
        return datastructures.QuadResult(-value, error, evaluations)
    return _double_exponential(f, _tanh_sinh(a, b), _TANH_SINH_RANGE, spec)


@dataclasses.dataclass(frozen=True)
class SubordinationInput:
    """A heat kernel at fixed points together with time and mass.

    :param base_kernel: the map ``s -> exp(-s H)(x, y)``
    :param t: relativistic time
    :param mass: particle mass

    """

    base_kernel: abc.Callable[[float], float]
    t: float
    mass: float = 0.0

    def __post_init__(self) -> None:
        if not (self.t > 0 and math.isfinite(self.t)):
            raise errors.DomainError(f'time must be positive, got {self.t}')
        if not (self.mass >= 0 and math.isfinite(self.mass)):
            raise errors.DomainError(
                f'mass must be non-negative, got {self.mass}'
            )


def subordination_weight(s: float, t: float, mass: float = 0.0) -> float:
    """Density of the subordinator at heat time `s`.

    ``t / sqrt(4 pi) * s**(-3/2) * exp(-(t / (2 sqrt(s)) - m sqrt(s))**2)``
    which integrates to one over ``s`` when the mass vanishes.

    """
    if s <= 0:
        return 0.0
    root = math.sqrt(s)
    exponent = (t / (2.0 * root) - mass * root) ** 2
    return t / math.sqrt(4.0 * math.pi) * s**-1.5 * math.exp(-exponent)


def _kernel_at(inp: SubordinationInput, u: float) -> float:
    return inp.base_kernel(inp.t * inp.t / (4.0 * u))


def subordinate_massless(
    inp: SubordinationInput,
    spec: datastructures.QuadratureSpec | None = None,
) -> datastructures.QuadResult:
    """Kernel of ``exp(-t sqrt(H))`` from the kernel of ``exp(-s H)``.

    :param inp: base kernel and time; the mass is ignored
    :param spec: quadrature settings
    :raises relheat.errors.ConvergenceFailure: from the quadrature

    With ``u = t**2 / (4 s)`` the subordination integral becomes
    ``pi**(-1/2) * int u**(-1/2) exp(-u) K(t**2 / (4 u)) du`` which has
    no essential singularity left.

    """
    spec = _default_spec(spec).replace(vectorized=False)
    scale = 1.0 / math.sqrt(math.pi)

    def integrand(u: float) -> float:
        weight = math.exp(-u) / math.sqrt(u)
        if weight == 0.0:
            return 0.0
        return scale * weight * _kernel_at(inp, u)

    return integrate_semi_infinite(integrand, spec)


def subordinate_massive(
    inp: SubordinationInput,
    spec: datastructures.QuadratureSpec | None = None,
) -> datastructures.QuadResult:
    """Kernel of ``exp(-t (sqrt(H + m**2) - m))``.

    In the variable ``u = t**2 / (4 s)`` the weight is
    ``pi**(-1/2) u**(-1/2) exp(-(u - m t / 2)**2 / u)`` which peaks at
    ``u = m t / 2``.  The integral is split there and the finite part
    is handled by [relheat.quad.integrate_interval][].  A vanishing
    mass delegates to [relheat.quad.subordinate_massless][].

    """
    if inp.mass == 0:
        return subordinate_massless(inp, spec)
    spec = _default_spec(spec).replace(vectorized=False)
    peak = 0.5 * inp.mass * inp.t
    scale = 1.0 / math.sqrt(math.pi)

    def integrand(u: float) -> float:
        weight = math.exp(-((u - peak) ** 2) / u) / math.sqrt(u)
        if weight == 0.0:
            return 0.0
        return scale * weight * _kernel_at(inp, u)

    head = integrate_interval(integrand, 0.0, peak, spec)
    tail = integrate_semi_infinite(integrand, spec, lower=peak)
    return datastructures.QuadResult(
        head.value + tail.value,
        head.error + tail.error,
        head.evaluations + tail.evaluations,
    )


def substituted_moment(
    a: float,
    mass: float,
    t: float,
    spec: datastructures.QuadratureSpec | None = None,
) -> datastructures.QuadResult:
    """Compute ``int_0^inf r**a exp(-t (r - m / (2 r))**2) dr``.

    :raises relheat.errors.DomainError: unless ``a > 0``, ``t > 0``
        and ``mass >= 0``

    """
    if not (a > 0 and t > 0 and mass >= 0):
        raise errors.DomainError(
            f'moment needs a > 0, t > 0 and mass >= 0, got {a}, {t}, {mass}'
        )
    spec = _default_spec(spec).replace(vectorized=True)
    half_mass = 0.5 * mass

    def integrand(
        r: npt.NDArray[np.float64],
    ) -> npt.NDArray[np.float64]:
        with np.errstate(over='ignore', divide='ignore'):
            exponent = a * np.log(r) - t * (r - half_mass / r) ** 2
        return np.asarray(np.exp(exponent))

    if mass == 0:
        return integrate_semi_infinite(integrand, spec)
    peak = math.sqrt(half_mass)
    head = integrate_interval(integrand, 0.0, peak, spec)
    tail = integrate_semi_infinite(integrand, spec, lower=peak)
    return datastructures.QuadResult(
        head.value + tail.value,
        head.error + tail.error,
        head.evaluations + tail.evaluations,
    )


def free_moment_oracle(
    a: float,
    mass: float,
    t: float,
    spec: datastructures.QuadratureSpec | None = None,
) -> float:
    """The moment of [relheat.quad.substituted_moment][] in Gaussian form.

    Substituting ``r = (s + sqrt(s**2 + 2 m)) / 2`` turns the exponent
    into ``-t s**2`` so the integral runs over the whole real line
    against a plain Gaussian.  The result is an independent check of
    the direct evaluation.

    """
    spec = _default_spec(spec).replace(vectorized=True)

    def positive(s: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        root = np.sqrt(s * s + 2.0 * mass)
        radius = 0.5 * (s + root)
        jacobian = 0.5 * (1.0 + s / root)
        return np.asarray(radius**a * jacobian * np.exp(-t * s * s))

    def negative(s: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        # the mirrored branch r(-s) written without cancellation
        root = np.sqrt(s * s + 2.0 * mass)
        denominator = root + s
        radius = mass / denominator
        jacobian = mass / (denominator * root)
        return np.asarray(radius**a * jacobian * np.exp(-t * s * s))

    right = integrate_semi_infinite(positive, spec)
    if mass == 0:
        return right.value
    left = integrate_semi_infinite(negative, spec)
    return right.value + left.value
