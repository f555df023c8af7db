"""Radial magnetic fields and their fluxes.

- [relheat.field.FieldProfile][]: a radial field ``B(r)``
- [relheat.field.flux_alpha][]: total normalised flux
- [relheat.field.kappa_of][]: distance from the flux to the integers
- [relheat.field.eps0_of][]: admissible weight margin of the
  Aharonov-Bohm bounds
- [relheat.field.flux_data][]: everything the partial-wave operators
  need to know about a field
- [relheat.field.poincare_gauge_at][]: vector potential in the
  Poincare gauge
- [relheat.field.curl_at][]: finite difference curl of that potential

"""

from __future__ import annotations

import csv
import dataclasses
import enum
import logging
import math
import pathlib
import typing

import numpy as np

from relheat import datastructures, errors, quad

if typing.TYPE_CHECKING:
    from collections import abc

    import numpy.typing as npt

LOGGER = logging.getLogger(__name__)

_FLUX_CELLS = 2048
_TABLE_SUBCELLS = 16
_HALF_LINE_SLACK = 1e-12

FluxFunction = typing.Callable[[typing.Any], typing.Any]
"""``r -> a(r)``; accepts floats and arrays"""


class ProfileKind(str, enum.Enum):
    """Shapes of supported field profiles."""

    ZERO = 'zero'
    STEP = 'step'
    GAUSSIAN_TRUNCATED = 'gaussian_truncated'
    AHARONOV_BOHM = 'aharonov_bohm'
    TABLE = 'table'


@dataclasses.dataclass(frozen=True)
class FieldProfile:
    """A radial magnetic field.

    Use the class methods to construct instances; they validate the
    parameters.  Every kind except ``aharonov_bohm`` is compactly
    supported in ``[0, radius]`` and continuous there apart from the
    ``step`` kind which jumps to zero at `radius`.

    :param kind: shape of the profile
    :param b0: field strength of ``step`` and ``gaussian_truncated``
    :param radius: support radius
    :param sigma: width of ``gaussian_truncated``
    :param alpha: flux of ``aharonov_bohm``
    :param nodes: ``(r, B)`` pairs of ``table``
    :param description: free form label carried into reports

    """

    kind: ProfileKind
    b0: float = 0.0
    radius: float = 0.0
    sigma: float = 0.0
    alpha: float = 0.0
    nodes: tuple[tuple[float, float], ...] = ()
    description: str = ''

    @classmethod
    def zero(cls) -> FieldProfile:
        """The vanishing field."""
        return cls(ProfileKind.ZERO, description='zero')

    @classmethod
    def step(cls, b0: float, radius: float) -> FieldProfile:
        """Constant field `b0` inside the disc of radius `radius`."""
        _require_positive(radius=radius)
        _require_finite(b0=b0)
        return cls(
            ProfileKind.STEP,
            b0=b0,
            radius=radius,
            description=f'step(b0={b0!r}, radius={radius!r})',
        )

    @classmethod
    def gaussian_truncated(
        cls, b0: float, sigma: float, radius: float
    ) -> FieldProfile:
        """``b0 (exp(-r**2 / 2 sigma**2) - exp(-R**2 / 2 sigma**2))``.

        The constant shift makes the profile vanish continuously at
        ``r = radius``.

        """
        _require_positive(sigma=sigma, radius=radius)
        _require_finite(b0=b0)
        return cls(
            ProfileKind.GAUSSIAN_TRUNCATED,
            b0=b0,
            sigma=sigma,
            radius=radius,
            description=(
                f'gaussian_truncated(b0={b0!r}, sigma={sigma!r}, '
                f'radius={radius!r})'
            ),
        )

    @classmethod
    def aharonov_bohm(cls, alpha: float) -> FieldProfile:
        """Singular flux tube of flux `alpha` at the origin."""
        _require_finite(alpha=alpha)
        return cls(
            ProfileKind.AHARONOV_BOHM,
            alpha=alpha,
            description=f'aharonov_bohm(alpha={alpha!r})',
        )

    @classmethod
    def table(
        cls, nodes: abc.Iterable[tuple[float, float]]
    ) -> FieldProfile:
        """Piecewise linear field through ``(r, B)`` nodes.

        The last node marks the support radius and its field value is
        replaced by zero.

        :raises relheat.errors.DomainError: if there are fewer than two
            nodes, radii are negative or not strictly increasing

        """
        pairs = tuple((float(r), float(b)) for r, b in nodes)
        if len(pairs) < 2:
            raise errors.DomainError('table profiles need at least 2 nodes')
        radii = [r for r, _ in pairs]
        if radii[0] < 0 or any(
            right <= left for left, right in zip(radii, radii[1:])
        ):
            raise errors.DomainError(
                'table radii must be non-negative and strictly increasing'
            )
        for r, b in pairs:
            _require_finite(r=r, b=b)
        pairs = (*pairs[:-1], (pairs[-1][0], 0.0))
        return cls(
            ProfileKind.TABLE,
            radius=pairs[-1][0],
            nodes=pairs,
            description=f'table({len(pairs)} nodes)',
        )

    @classmethod
    def from_csv(cls, path: str | pathlib.Path) -> FieldProfile:
        """Read a table profile from a two column ``r,B`` CSV file.

        A first row that does not parse as numbers is treated as a
        header.

        :raises relheat.errors.MalformedCSV: with the offending row

        """
        pairs: list[tuple[float, float]] = []
        with pathlib.Path(path).open(newline='', encoding='utf-8') as stream:
            for row_number, row in enumerate(csv.reader(stream), start=1):
                if not row or row[0].lstrip().startswith('#'):
                    continue
                if len(row) != 2:
                    raise errors.MalformedCSV(
                        f'expected 2 columns, found {len(row)}',
                        row_number=row_number,
                    )
                try:
                    pairs.append((float(row[0]), float(row[1])))
                except ValueError:
                    if row_number == 1:
                        continue
                    raise errors.MalformedCSV(
                        f'non-numeric value in {row!r}', row_number=row_number
                    ) from None
        LOGGER.debug('read %d table nodes from %s', len(pairs), path)
        try:
            return cls.table(pairs)
        except errors.DomainError as error:
            raise errors.MalformedCSV(str(error), row_number=0) from None

    @property
    def is_singular(self) -> bool:
        """Does the profile carry flux without a regular field?"""
        return self.kind is ProfileKind.AHARONOV_BOHM

    @property
    def support(self) -> float:
        """Radius outside of which the field vanishes."""
        return self.radius

    def field(self, r: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Evaluate ``B(r)``.

        :raises relheat.errors.UnsupportedProfile: for the singular
            Aharonov-Bohm profile

        """
        radii = np.asarray(r, dtype=float)
        if self.kind is ProfileKind.AHARONOV_BOHM:
            raise errors.UnsupportedProfile(
                'the Aharonov-Bohm profile has no regular field'
            )
        if self.kind is ProfileKind.ZERO:
            return np.zeros_like(radii)
        inside = radii <= self.radius
        if self.kind is ProfileKind.STEP:
            return np.where(radii < self.radius, self.b0, 0.0)
        if self.kind is ProfileKind.GAUSSIAN_TRUNCATED:
            scale = 2.0 * self.sigma * self.sigma
            floor = math.exp(-self.radius * self.radius / scale)
            values = self.b0 * (np.exp(-radii * radii / scale) - floor)
            return np.where(inside, values, 0.0)
        table = np.array(self.nodes)
        values = np.interp(radii, table[:, 0], table[:, 1])
        return np.where(inside, values, 0.0)


@dataclasses.dataclass(frozen=True)
class FluxData:
    """Flux quantities derived from a profile.

    :param alpha: total normalised flux
    :param kappa: distance from `alpha` to the nearest integer
    :param eps0: weight margin, see [relheat.field.eps0_of][]
    :param flux_fn: cumulative flux ``a(r) = int_0^r B(s) s ds``
    :param support: radius beyond which ``a(r) = alpha``

    """

    alpha: float
    kappa: float
    eps0: float
    flux_fn: FluxFunction = dataclasses.field(repr=False, compare=False)
    support: float = 0.0

    @classmethod
    def constant(cls, alpha: float) -> FluxData:
        """Flux data of a field concentrated at the origin."""

        def flux_fn(r: npt.ArrayLike) -> npt.NDArray[np.float64]:
            return np.full_like(np.asarray(r, dtype=float), alpha)

        return cls(alpha, kappa_of(alpha), eps0_of(alpha), flux_fn, 0.0)


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise errors.DomainError(f'{name} must be finite, got {value}')


def _require_positive(**values: float) -> None:
    _require_finite(**values)
    for name, value in values.items():
        if value <= 0:
            raise errors.DomainError(f'{name} must be positive, got {value}')


def _cumulative_flux(
    profile: FieldProfile,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Cumulative flux on a grid from Simpson's rule per cell."""
    if profile.kind is ProfileKind.TABLE:
        breaks = np.array([r for r, _ in profile.nodes])
        if breaks[0] > 0:
            breaks = np.concatenate(([0.0], breaks))
        fractions = np.arange(_TABLE_SUBCELLS) / _TABLE_SUBCELLS
        grid = np.concatenate([
            left + (right - left) * fractions
            for left, right in zip(breaks[:-1], breaks[1:])
        ] + [breaks[-1:]])
    else:
        grid = np.linspace(0.0, profile.radius, _FLUX_CELLS + 1)
    left, right = grid[:-1], grid[1:]
    middle = 0.5 * (left + right)
    integrand = (
        profile.field(left) * left
        + 4.0 * profile.field(middle) * middle
        + profile.field(right) * right
    )
    cells = (right - left) / 6.0 * integrand
    return grid, np.concatenate(([0.0], np.cumsum(cells)))


def flux_alpha(profile: FieldProfile) -> float:
    """Total flux ``int_0^inf B(r) r dr`` of a regular profile.

    :raises relheat.errors.UnsupportedProfile: for the Aharonov-Bohm
        profile whose flux is a parameter rather than an integral

    """
    if profile.kind is ProfileKind.AHARONOV_BOHM:
        raise errors.UnsupportedProfile(
            'Aharonov-Bohm flux is a parameter of the profile'
        )
    if profile.kind is ProfileKind.ZERO:
        return 0.0
    if profile.kind is ProfileKind.STEP:
        return 0.5 * profile.b0 * profile.radius**2
    if profile.kind is ProfileKind.TABLE:
        return float(_cumulative_flux(profile)[1][-1])

    def integrand(r: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return profile.field(r) * r

    spec = datastructures.QuadratureSpec(vectorized=True)
    return quad.integrate_interval(integrand, 0.0, profile.radius, spec).value


def kappa_of(alpha: float) -> float:
    """Distance from `alpha` to the nearest integer, in ``[0, 1/2]``."""
    _require_finite(alpha=alpha)
    return abs(alpha - round(alpha))


def eps0_of(alpha: float) -> float:
    """Gap between 3/2 and the next partial-wave order above it.

    The result is the smallest ``|m + alpha| - 3/2`` over the integers
    ``m`` with ``|m + alpha| > 3/2``.

    The orders ``|m + alpha|`` are ``f + j`` and ``1 - f + j`` for
    ``j = 0, 1, ...`` where ``f`` is the fractional part of `alpha`.
    Orders within ``1e-12`` of ``3/2`` count as equal to it.

    """
    _require_finite(alpha=alpha)
    fraction = alpha - math.floor(alpha)
    threshold = 1.5 + _HALF_LINE_SLACK
    margins = []
    for base in (fraction, 1.0 - fraction):
        shift = math.floor(threshold - base) + 1
        margins.append(base + shift - 1.5)
    return min(margins)


def flux_data(profile: FieldProfile) -> FluxData:
    """Collect flux, kappa, eps0 and the flux function of `profile`."""
    if profile.kind is ProfileKind.AHARONOV_BOHM:
        return FluxData.constant(profile.alpha)
    alpha = flux_alpha(profile)
    kappa, eps0 = kappa_of(alpha), eps0_of(alpha)
    if profile.kind is ProfileKind.ZERO:
        return FluxData.constant(0.0)
    if profile.kind is ProfileKind.STEP:
        half_b0, radius = 0.5 * profile.b0, profile.radius

        def step_flux(r: npt.ArrayLike) -> npt.NDArray[np.float64]:
            clipped = np.minimum(np.asarray(r, dtype=float), radius)
            return half_b0 * clipped * clipped

        return FluxData(alpha, kappa, eps0, step_flux, radius)
    grid, cumulative = _cumulative_flux(profile)
    cumulative[-1] = alpha
    LOGGER.debug(
        'flux of %s is %.12g on %d cells',
        profile.description,
        alpha,
        grid.size - 1,
    )

    def tabulated_flux(r: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return np.interp(np.asarray(r, dtype=float), grid, cumulative)

    return FluxData(alpha, kappa, eps0, tabulated_flux, profile.radius)


def poincare_gauge_at(
    profile: FieldProfile | FluxData, x: tuple[float, float]
) -> tuple[float, float]:
    """Vector potential ``A(x) = (-x2, x1) a(|x|) / |x|**2``.

    :raises relheat.errors.SingularOrigin: for an Aharonov-Bohm
        profile at the origin

    """
    data = profile if isinstance(profile, FluxData) else flux_data(profile)
    radius_sq = x[0] * x[0] + x[1] * x[1]
    if radius_sq == 0:
        if isinstance(profile, FieldProfile):
            singular = profile.is_singular
        else:
            singular = data.support == 0 and data.alpha != 0
        if singular:
            raise errors.SingularOrigin(
                'the Aharonov-Bohm potential is singular at the origin'
            )
        return 0.0, 0.0
    scale = float(data.flux_fn(math.sqrt(radius_sq))) / radius_sq
    return -x[1] * scale, x[0] * scale


def curl_at(
    profile: FieldProfile | FluxData,
    x: tuple[float, float],
    h: float = 1e-4,
) -> float:
    """Central difference approximation of ``rot A`` at `x`."""
    data = profile if isinstance(profile, FluxData) else flux_data(profile)
    x1, x2 = x
    d_a2 = (
        poincare_gauge_at(data, (x1 + h, x2))[1]
        - poincare_gauge_at(data, (x1 - h, x2))[1]
    )
    d_a1 = (
        poincare_gauge_at(data, (x1, x2 + h))[0]
        - poincare_gauge_at(data, (x1, x2 - h))[0]
    )
    return (d_a2 - d_a1) / (2.0 * h)
