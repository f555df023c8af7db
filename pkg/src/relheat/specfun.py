"""Special functions of real arguments.

- [relheat.specfun.gamma_fn][]: Euler's Gamma function for x > 0
- [relheat.specfun.log_gamma][]: its logarithm
- [relheat.specfun.beta_fn][]: Euler's Beta function
- [relheat.specfun.bessel_j][]: Bessel function of the first kind
  of real order
- [relheat.specfun.gauss_2f1][]: Gauss hypergeometric function for
  arguments below one
- [relheat.specfun.gauss_2f1_integral][]: the same through its Euler
  integral

Every function here is pure.  Arguments outside of the supported domain
raise [relheat.errors.DomainError][] and series that exhaust their
term budget raise [relheat.errors.ConvergenceFailure][].

"""

from __future__ import annotations

import dataclasses
import math
import typing

import numpy as np
from scipy import special

from relheat import constants, datastructures, errors, quad

if typing.TYPE_CHECKING:
    import numpy.typing as npt

_SERIES_RADIUS = 0.5
"""Gauss series are summed directly for |w| up to this value"""

_INTEGER_SLACK = 1e-9
_RESCALE_LIMIT = 1e200


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise errors.DomainError(f'{name} must be finite, got {value}')


def gamma_fn(x: float) -> float:
    """Euler's Gamma function.

    :raises relheat.errors.DomainError: for ``x <= 0``, non-finite `x`
        or when the result overflows

    """
    _require_finite(x=x)
    if x <= 0:
        raise errors.DomainError(f'gamma_fn requires x > 0, got {x}')
    try:
        return math.gamma(x)
    except OverflowError:
        raise errors.DomainError(f'gamma_fn overflows at {x}') from None


def log_gamma(x: float) -> float:
    """Natural logarithm of [relheat.specfun.gamma_fn][]."""
    _require_finite(x=x)
    if x <= 0:
        raise errors.DomainError(f'log_gamma requires x > 0, got {x}')
    return math.lgamma(x)


def beta_fn(p: float, q: float) -> float:
    """Euler's Beta function ``Gamma(p) Gamma(q) / Gamma(p + q)``.

    Small arguments use the Gamma values directly and large ones go
    through [relheat.specfun.log_gamma][] so nothing overflows.  Both
    paths are symmetric in `p` and `q`.

    """
    _require_finite(p=p, q=q)
    if p <= 0 or q <= 0:
        raise errors.DomainError(f'beta_fn requires p, q > 0, got {p}, {q}')
    if p + q < 170.0:
        return math.gamma(p) * math.gamma(q) / math.gamma(p + q)
    return math.exp(math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q))


def _bessel_series(
    nu: float, x: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    """Ascending series; only used where its terms shrink quickly."""
    prefactor = np.exp(nu * np.log(0.5 * x) - math.lgamma(nu + 1.0))
    quarter = -0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, constants.SERIES_MAX_TERMS + 1):
        term = term * quarter / (k * (nu + k))
        total += term
        if np.all(
            np.abs(term) <= constants.SERIES_TOLERANCE * np.abs(total)
        ):
            return prefactor * total
    raise errors.ConvergenceFailure(
        f'Bessel series of order {nu} did not converge',
        estimate=float(prefactor[0] * total[0]),
        achieved=float(np.max(np.abs(term))),
    )


def _bessel_hankel(
    nu: float, x: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    """Large argument expansion ``sqrt(2/(pi x)) (P cos chi - Q sin chi)``."""
    mu = 4.0 * nu * nu
    term = np.ones_like(x)
    even = np.ones_like(x)
    odd = np.zeros_like(x)
    for k in range(1, 200):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            odd += sign * term
        else:
            even += sign * term
        if np.all(np.abs(term) <= constants.SERIES_TOLERANCE):
            break
    chi = x - (0.5 * nu + 0.25) * math.pi
    amplitude = np.sqrt(2.0 / (math.pi * x))
    return amplitude * (even * np.cos(chi) - odd * np.sin(chi))


def _neumann_weights(nu0: float, count: int) -> list[float]:
    """Weights ``w_k`` of ``(x/2)**nu0 = sum_k w_k J_{nu0 + 2k}(x)``."""
    weights = [math.gamma(nu0 + 1.0)]
    ratio = math.gamma(nu0 + 1.0)  # Gamma(nu0 + k) / k! at k = 1
    for k in range(1, count):
        weights.append((nu0 + 2.0 * k) * ratio)
        ratio *= (nu0 + k) / (k + 1.0)
    return weights


def _bessel_miller(
    nu: float, x: npt.NDArray[np.float64]
) -> npt.NDArray[np.float64]:
    """Backward recurrence normalised by the Neumann series."""
    nu0 = nu - math.floor(nu)
    target = math.floor(nu)
    largest = max(nu, float(np.max(x)))
    start = int(largest) + 20 + int(math.sqrt(40.0 * largest))
    start += start % 2
    weights = _neumann_weights(nu0, start // 2 + 1)
    upper = np.zeros_like(x)
    current = np.full_like(x, 1e-30)
    result = np.zeros_like(x)
    norm = weights[start // 2] * current
    for k in range(start, 0, -1):
        lower = 2.0 * (nu0 + k) / x * current - upper
        upper, current = current, lower
        if k - 1 == target:
            result = current.copy()
        if (k - 1) % 2 == 0:
            norm = norm + weights[(k - 1) // 2] * current
        big = np.abs(current) > _RESCALE_LIMIT
        scale = np.where(big, 1.0 / _RESCALE_LIMIT, 1.0)
        upper, current = upper * scale, current * scale
        result, norm = result * scale, norm * scale
    return result * (0.5 * x) ** nu0 / norm


def bessel_j_array(
    nu: float, x: npt.ArrayLike
) -> npt.NDArray[np.float64]:
    """Bessel function of the first kind on an array of arguments.

    :param nu: order, ``nu >= 0``
    :param x: arguments, all ``>= 0``
    :raises relheat.errors.DomainError: for negative or non-finite
        order or arguments

    Each argument is routed to one of three evaluations: the ascending
    series where ``x < 8`` or ``(x/2)**2 <= nu + 1``, the Hankel
    expansion where ``x > max(30, nu**2)``, and Miller's backward
    recurrence everywhere else.

    """
    _require_finite(nu=nu)
    values = np.asarray(x, dtype=float)
    if nu < 0:
        raise errors.DomainError(f'Bessel order must be >= 0, got {nu}')
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise errors.DomainError('Bessel arguments must be finite and >= 0')
    flat = values.ravel()
    out = np.zeros_like(flat)
    zero = flat == 0.0
    out[zero] = 1.0 if nu == 0 else 0.0
    small = (flat < 8.0) | (0.25 * flat * flat <= nu + 1.0)
    series = ~zero & small
    hankel = ~zero & ~series & (flat > max(30.0, nu * nu))
    miller = ~zero & ~series & ~hankel
    if np.any(series):
        out[series] = _bessel_series(nu, flat[series])
    if np.any(hankel):
        out[hankel] = _bessel_hankel(nu, flat[hankel])
    if np.any(miller):
        out[miller] = _bessel_miller(nu, flat[miller])
    return out.reshape(values.shape)


def bessel_j(nu: float, x: float) -> float:
    """Bessel function of the first kind ``J_nu(x)`` for real ``nu, x >= 0``.

    See [relheat.specfun.bessel_j_array][] for the evaluation strategy.

    """
    return float(bessel_j_array(nu, np.array([x], dtype=float))[0])


@dataclasses.dataclass(frozen=True)
class HypergeometricArgs:
    """Parameters and argument of ``F(a, b; c; w)``.

    :raises relheat.errors.DomainError: if ``w >= 1`` or `c` is a
        non-positive integer

    """

    a: float
    b: float
    c: float
    w: float

    def __post_init__(self) -> None:
        _require_finite(a=self.a, b=self.b, c=self.c, w=self.w)
        if self.w >= 1:
            raise errors.DomainError(
                f'hypergeometric argument must be < 1, got {self.w}'
            )
        if self.c <= 0 and self.c == math.floor(self.c):
            raise errors.DomainError(
                f'c must not be a non-positive integer, got {self.c}'
            )


def _is_nonpositive_integer(value: float) -> bool:
    return value <= 0 and value == math.floor(value)


def _gauss_series(a: float, b: float, c: float, w: float) -> float:
    """Sum ``sum_n (a)_n (b)_n / ((c)_n n!) w**n`` directly."""
    term = total = 1.0
    for n in range(constants.SERIES_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * w
        total += term
        if term == 0.0 or abs(term) < constants.SERIES_TOLERANCE * abs(total):
            return total
    raise errors.ConvergenceFailure(
        f'Gauss series for F({a}, {b}; {c}; {w}) did not converge',
        estimate=total,
        achieved=abs(term / total) if total else abs(term),
    )


def _log_series(
    tops: tuple[float, float],
    bottoms: tuple[float, float],
    bracket: typing.Callable[[int], float],
    argument: float,
) -> float:
    """Sum ``sum_n (t1)_n (t2)_n / ((b1)_n (b2)_n) bracket(n) argument**n``."""
    total = 0.0
    coefficient = 1.0
    term = 0.0
    for n in range(constants.SERIES_MAX_TERMS):
        if n:
            coefficient *= (
                (tops[0] + n - 1)
                * (tops[1] + n - 1)
                / ((bottoms[0] + n - 1) * (bottoms[1] + n - 1))
                * argument
            )
        term = coefficient * bracket(n)
        total += term
        if n > 1 and (
            coefficient == 0.0
            or abs(term) < constants.SERIES_TOLERANCE * abs(total)
        ):
            return total
    raise errors.ConvergenceFailure(
        'logarithmic connection series did not converge',
        estimate=total,
        achieved=abs(term),
    )


def _connection_generic(
    a: float, b: float, c: float, w: float, s: float
) -> float:
    """Connection to ``1 - w`` when ``c - a - b`` is not an integer."""
    one_minus = 1.0 - w
    first = (
        special.gamma(c)
        * special.gamma(s)
        * special.rgamma(c - a)
        * special.rgamma(c - b)
    )
    second = (
        special.gamma(c)
        * special.gamma(-s)
        * special.rgamma(a)
        * special.rgamma(b)
    )
    result = 0.0
    if first:
        result += first * _gauss_series(a, b, a + b - c + 1.0, one_minus)
    if second:
        result += (
            second
            * one_minus**s
            * _gauss_series(c - a, c - b, s + 1.0, one_minus)
        )
    return float(result)


def _terminating_sum(p: float, q: float, m: int, x: float) -> float:
    """Sum ``sum_{n<m} (p)_n (q)_n / (n! (1-m)_n) x**n``."""
    total = term = 1.0
    for n in range(m - 1):
        term *= (p + n) * (q + n) / ((n + 1.0) * (1.0 - m + n)) * x
        total += term
    return total


def _connection_log_zero(a: float, b: float, w: float) -> float:
    """``F(a, b; a + b; w)`` near ``w = 1``."""
    one_minus = 1.0 - w
    log_term = math.log(one_minus)
    prefactor = special.gamma(a + b) * special.rgamma(a) * special.rgamma(b)

    def bracket(n: int) -> float:
        return float(
            2.0 * special.digamma(n + 1.0)
            - special.digamma(a + n)
            - special.digamma(b + n)
            - log_term
        )

    series = _log_series((a, b), (1.0, 1.0), bracket, one_minus)
    return float(prefactor * series)


def _connection_log_positive(a: float, b: float, m: int, w: float) -> float:
    """``F(a, b; a + b + m; w)`` near ``w = 1`` for integer ``m >= 1``."""
    one_minus = 1.0 - w
    log_term = math.log(one_minus)
    c = a + b + m
    finite = _terminating_sum(a, b, m, one_minus) * (
        math.gamma(m)
        * special.gamma(c)
        * special.rgamma(a + m)
        * special.rgamma(b + m)
    )
    prefactor = (
        (-1.0) ** m
        * one_minus**m
        * special.gamma(c)
        * special.rgamma(a)
        * special.rgamma(b)
        / math.factorial(m)
    )
    if not prefactor:
        return float(finite)

    def bracket(n: int) -> float:
        return float(
            log_term
            - special.digamma(n + 1.0)
            - special.digamma(n + m + 1.0)
            + special.digamma(a + n + m)
            + special.digamma(b + n + m)
        )

    series = _log_series((a + m, b + m), (1.0, m + 1.0), bracket, one_minus)
    return float(finite - prefactor * series)


def _connection_log_negative(a: float, b: float, m: int, w: float) -> float:
    """``F(a, b; a + b - m; w)`` near ``w = 1`` for integer ``m >= 1``."""
    one_minus = 1.0 - w
    log_term = math.log(one_minus)
    c = a + b - m
    finite = _terminating_sum(a - m, b - m, m, one_minus) * (
        math.gamma(m)
        * special.gamma(c)
        * special.rgamma(a)
        * special.rgamma(b)
        * one_minus ** (-m)
    )
    prefactor = (
        (-1.0) ** m
        * special.gamma(c)
        * special.rgamma(a - m)
        * special.rgamma(b - m)
        / math.factorial(m)
    )
    if not prefactor:
        return float(finite)

    def bracket(n: int) -> float:
        return float(
            log_term
            - special.digamma(n + 1.0)
            - special.digamma(n + m + 1.0)
            + special.digamma(a + n)
            + special.digamma(b + n)
        )

    series = _log_series((a, b), (1.0, m + 1.0), bracket, one_minus)
    return float(finite - prefactor * series)


def _near_one(a: float, b: float, c: float, w: float) -> float:
    s = c - a - b
    m = round(s)
    if abs(s - m) > _INTEGER_SLACK * max(1.0, abs(c)):
        return _connection_generic(a, b, c, w, s)
    if m == 0:
        return _connection_log_zero(a, b, w)
    if m > 0:
        return _connection_log_positive(a, b, m, w)
    return _connection_log_negative(a, b, -m, w)


def gauss_2f1(args: HypergeometricArgs) -> float:
    """Gauss hypergeometric function ``F(a, b; c; w)`` for ``w < 1``.

    :raises relheat.errors.ConvergenceFailure: if a series exhausts its
        term budget; the exception carries the partial sum and the
        last relative term

    Routing:

    - terminating series (``a`` or ``b`` a non-positive integer) are
      summed directly for any `w`
    - ``|w| <= 1/2`` sums the Gauss series
    - ``w < -1/2`` applies Pfaff's transformation
      ``F(a, b; c; w) = (1 - w)**(-b) F(b, c - a; c; w / (w - 1))``
    - ``w`` in ``(1/2, 1)`` uses the connection formulas around one,
      including the logarithmic cases where ``c - a - b`` is an integer

    """
    a, b, c, w = args.a, args.b, args.c, args.w
    if w == 0:
        return 1.0
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        return _gauss_series(a, b, c, w)
    if abs(w) <= _SERIES_RADIUS:
        return _gauss_series(a, b, c, w)
    if w < 0:
        transformed = w / (w - 1.0)
        inner = HypergeometricArgs(b, c - a, c, transformed)
        return (1.0 - w) ** (-b) * gauss_2f1(inner)
    return _near_one(a, b, c, w)


def hyp2f1(a: float, b: float, c: float, w: float) -> float:
    """Shorthand for ``gauss_2f1(HypergeometricArgs(a, b, c, w))``."""
    return gauss_2f1(HypergeometricArgs(a, b, c, w))


def gauss_2f1_integral(
    args: HypergeometricArgs,
    spec: datastructures.QuadratureSpec | None = None,
) -> float:
    """``F(a, b; c; w)`` from Euler's integral representation.

    ``F = int_0^1 s**(b-1) (1-s)**(c-b-1) (1 - w s)**(-a) ds / B(b, c-b)``

    The integral is split at one half and the upper piece is reflected
    so that both endpoint singularities sit at an exactly representable
    zero.

    :raises relheat.errors.DomainError: unless ``c > b > 0``

    """
    a, b, c, w = args.a, args.b, args.c, args.w
    if not c > b > 0:
        raise errors.DomainError(
            f'Euler integral requires c > b > 0, got b={b}, c={c}'
        )
    spec = (spec or datastructures.QuadratureSpec()).replace(vectorized=True)

    def lower_half(s: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return np.asarray(
            s ** (b - 1.0) * (1.0 - s) ** (c - b - 1.0) * (1.0 - w * s) ** -a
        )

    def upper_half(u: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        s = 1.0 - u
        return np.asarray(
            s ** (b - 1.0) * u ** (c - b - 1.0) * (1.0 - w * s) ** -a
        )

    total = (
        quad.integrate_interval(lower_half, 0.0, 0.5, spec).value
        + quad.integrate_interval(upper_half, 0.0, 0.5, spec).value
    )
    return total / beta_fn(b, c - b)
