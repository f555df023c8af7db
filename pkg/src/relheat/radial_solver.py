"""Numerical heat kernels of radial magnetic fields by partial waves.

- [relheat.radial_solver.RadialGrid][]: cell-centred grid on
  ``[0, r_max]``
- [relheat.radial_solver.build_operator][]: discretised partial-wave
  operator of one angular momentum
- [relheat.radial_solver.mode_heat_kernel][]: ``exp(-t h_m)`` on the
  grid
- [relheat.radial_solver.RadialSolver][]: cached spectra for one field
  and grid, assembling two dimensional kernels
- [relheat.radial_solver.assemble_2d_kernel][]: the magnetic heat
  kernel at two points
- [relheat.radial_solver.relativistic_radial_kernel][]: the
  relativistic kernel obtained by subordination

A radial field in the Poincare gauge separates into the half-line
operators ``h_m = -r**-1 d/dr r d/dr + (m + a(r))**2 / r**2`` acting in
``L2(r dr)`` where ``a`` is the cumulative flux.  Each is discretised
with a conservative finite volume scheme that has no flux through
``r = 0`` and a Dirichlet wall at ``r_max``.  The symmetrised matrix is
tridiagonal so one eigendecomposition per mode serves every time.

"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import functools
import logging
import math
import threading
import typing
import warnings

import numpy as np
from scipy import linalg, special

from relheat import constants, datastructures, errors, field, quad

if typing.TYPE_CHECKING:
    from collections import abc

    import numpy.typing as npt

LOGGER = logging.getLogger(__name__)

_SUBORDINATION_HORIZON = 40.0
"""Subordination nodes beyond ``u`` of this size carry ``exp(-u)``"""

_DEFAULT_CELLS = 800
_MAX_MODES = 400


@dataclasses.dataclass(frozen=True, eq=False)
class RadialGrid:
    """Finite volume grid on ``[0, r_max]``.

    :param faces: strictly increasing cell faces starting at zero; the
        last face is the truncation radius
    :raises relheat.errors.GridTooCoarse: with fewer than 16 cells

    Cell centres are the face midpoints and the cell volume in the
    ``r dr`` measure is ``(f_j**2 - f_{j-1}**2) / 2``.

    """

    faces: npt.NDArray[np.float64]

    def __post_init__(self) -> None:
        faces = np.asarray(self.faces, dtype=float)
        if faces.ndim != 1 or faces.size - 1 < constants.MIN_GRID_CELLS:
            raise errors.GridTooCoarse(
                max(faces.size - 1, 0), constants.MIN_GRID_CELLS
            )
        if faces[0] != 0 or np.any(np.diff(faces) <= 0):
            raise errors.DomainError(
                'grid faces must start at 0 and increase strictly'
            )
        object.__setattr__(self, 'faces', faces)

    @classmethod
    def uniform(cls, r_max: float, n: int) -> RadialGrid:
        """`n` cells of width ``r_max / n``."""
        if n < constants.MIN_GRID_CELLS:
            raise errors.GridTooCoarse(n, constants.MIN_GRID_CELLS)
        if not r_max > 0:
            raise errors.DomainError(f'r_max must be positive, got {r_max}')
        return cls(np.linspace(0.0, r_max, n + 1))

    @classmethod
    def stretched(
        cls, r_max: float, h0: float, core: float, ratio: float = 1.01
    ) -> RadialGrid:
        """Cells of width `h0` up to `core`, growing by `ratio` beyond.

        The last cell is stretched or shrunk so that the grid ends
        exactly at `r_max`.

        """
        if not (r_max > 0 and h0 > 0 and core > 0 and ratio >= 1):
            raise errors.DomainError(
                'stretched grids need positive r_max, h0, core and ratio >= 1'
            )
        core = min(core, r_max)
        cells = max(round(core / h0), 1)
        faces = list(np.linspace(0.0, core, cells + 1))
        width = core / cells
        while faces[-1] < r_max:
            width *= ratio
            faces.append(faces[-1] + width)
        if len(faces) > 2 and faces[-1] - r_max > 0.5 * width:
            faces.pop()
        faces[-1] = r_max
        return cls(np.array(faces))

    @property
    def r_max(self) -> float:
        """Truncation radius."""
        return float(self.faces[-1])

    @property
    def n(self) -> int:
        """Number of cells."""
        return int(self.faces.size - 1)

    @functools.cached_property
    def centres(self) -> npt.NDArray[np.float64]:
        """Cell centres."""
        return 0.5 * (self.faces[1:] + self.faces[:-1])

    @functools.cached_property
    def volumes(self) -> npt.NDArray[np.float64]:
        """Cell volumes in the ``r dr`` measure."""
        return 0.5 * (self.faces[1:] ** 2 - self.faces[:-1] ** 2)

    def coarsened(self) -> RadialGrid:
        """Grid made of every other face, keeping ``r_max``."""
        faces = self.faces[::2]
        if faces[-1] != self.r_max:
            faces = np.append(faces[:-1], self.r_max)
        return RadialGrid(faces)

    def interpolation(
        self, r: float, *, regular_origin: bool
    ) -> tuple[npt.NDArray[np.intp], npt.NDArray[np.float64]]:
        """Indices and weights of linear interpolation from the centres.

        Inside of the first centre the value is held constant when
        `regular_origin` is set and falls linearly to zero at ``r = 0``
        otherwise.  Beyond the last centre it falls linearly to zero at
        ``r_max``.

        :raises relheat.errors.DomainError: if `r` lies outside of the
            grid

        """
        centres = self.centres
        if not 0 <= r <= self.r_max:
            raise errors.DomainError(
                f'radius {r} is outside of the grid [0, {self.r_max}]'
            )
        if r <= centres[0]:
            weight = 1.0 if regular_origin else r / centres[0]
            return np.array([0]), np.array([weight])
        if r >= centres[-1]:
            last = self.n - 1
            weight = (self.r_max - r) / (self.r_max - centres[-1])
            return np.array([last]), np.array([weight])
        right = int(np.searchsorted(centres, r))
        left = right - 1
        fraction = (r - centres[left]) / (centres[right] - centres[left])
        return np.array([left, right]), np.array([1.0 - fraction, fraction])


@dataclasses.dataclass(frozen=True, eq=False)
class PartialWaveOperator:
    """Discretised ``h_m`` for one angular momentum `mode`.

    :param mode: angular momentum ``m``
    :param flux: flux data of the field
    :param grid: radial grid

    """

    mode: int
    flux: field.FluxData
    grid: RadialGrid

    def potential(self, r: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Potential ``((m + a(r))**2 - 1/4) / r**2`` of the unitarily
        equivalent operator on ``L2(dr)``."""
        radii = np.asarray(r, dtype=float)
        shifted = self.mode + np.asarray(self.flux.flux_fn(radii))
        return (shifted * shifted - 0.25) / (radii * radii)

    @property
    def origin_order(self) -> float:
        """``|m + a(0)|``, the power law of the modes at the origin."""
        return abs(self.mode + float(self.flux.flux_fn(0.0)))

    @functools.cached_property
    def bands(
        self,
    ) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
        """Diagonal and off-diagonal of the symmetrised matrix."""
        faces = self.grid.faces
        centres = self.grid.centres
        volumes = self.grid.volumes
        spacing = np.diff(centres)
        conductance = np.empty(self.grid.n)
        conductance[:-1] = faces[1:-1] / spacing
        conductance[-1] = faces[-1] / (faces[-1] - centres[-1])
        inner = np.concatenate(([0.0], conductance[:-1]))
        # (m + a)**2 / r**2 of the r dr form is the potential plus 1 / 4r**2
        centrifugal = self.potential(centres) + 0.25 / (centres * centres)
        diagonal = (inner + conductance) / volumes + centrifugal
        off_diagonal = -conductance[:-1] / np.sqrt(volumes[:-1] * volumes[1:])
        return diagonal, off_diagonal

    def spectrum(self, *, energy_cap: float | None = None) -> ModeSpectrum:
        """Eigenpairs of the symmetrised matrix.

        :param energy_cap: only eigenvalues up to this value are
            computed when given

        """
        diagonal, off_diagonal = self.bands
        if energy_cap is None:
            values, vectors = linalg.eigh_tridiagonal(diagonal, off_diagonal)
        else:
            values, vectors = linalg.eigh_tridiagonal(
                diagonal,
                off_diagonal,
                select='v',
                select_range=(-np.inf, energy_cap),
            )
        LOGGER.debug(
            'mode %d: %d eigenvalues, lowest %.6g',
            self.mode,
            values.size,
            values[0] if values.size else math.nan,
        )
        return ModeSpectrum(
            self.mode,
            self.grid,
            values,
            vectors / np.sqrt(self.grid.volumes)[:, np.newaxis],
            regular_origin=self.origin_order == 0,
        )


@dataclasses.dataclass(frozen=True, eq=False)
class ModeSpectrum:
    """Eigenvalues and ``r dr``-normalised eigenfunctions of one mode.

    :param mode: angular momentum
    :param grid: radial grid
    :param eigenvalues: ascending eigenvalues
    :param eigenfunctions: eigenfunction ``k`` sampled at the cell
        centres in column ``k``
    :param regular_origin: eigenfunctions do not vanish at ``r = 0``

    """

    mode: int
    grid: RadialGrid
    eigenvalues: npt.NDArray[np.float64]
    eigenfunctions: npt.NDArray[np.float64]
    regular_origin: bool = False

    def at(self, r: float) -> npt.NDArray[np.float64]:
        """Every eigenfunction evaluated at radius `r`."""
        indices, weights = self.grid.interpolation(
            r, regular_origin=self.regular_origin
        )
        return np.asarray(weights @ self.eigenfunctions[indices])

    def matrix(
        self, t: float, *, generator: str = 'heat', mass: float = 0.0
    ) -> npt.NDArray[np.float64]:
        """Kernel matrix ``sum_k g(lambda_k) f_k(r_i) f_k(r_j)``.

        `generator` selects ``g``: ``heat`` is ``exp(-t lambda)`` and
        ``relativistic`` is ``exp(-t (sqrt(lambda + m**2) - m))``.

        """
        factors = self.decay(t, generator=generator, mass=mass)
        return np.asarray(
            (self.eigenfunctions * factors) @ self.eigenfunctions.T
        )

    def decay(
        self, t: float, *, generator: str = 'heat', mass: float = 0.0
    ) -> npt.NDArray[np.float64]:
        """Spectral multipliers of the semigroup at time `t`."""
        energies = np.maximum(self.eigenvalues, 0.0)
        if generator == 'heat':
            return np.exp(-t * energies)
        if generator == 'relativistic':
            return np.exp(-t * (np.sqrt(energies + mass * mass) - mass))
        raise errors.DomainError(f'unknown generator {generator!r}')

    def value(
        self,
        t: float,
        r: float,
        r_prime: float,
        *,
        generator: str = 'heat',
        mass: float = 0.0,
    ) -> float:
        """Kernel of the mode at ``(r, r_prime)``."""
        factors = self.decay(t, generator=generator, mass=mass)
        return float(np.sum(factors * self.at(r) * self.at(r_prime)))


@dataclasses.dataclass(frozen=True, eq=False)
class ModeKernel:
    """``exp(-t h_m)`` on the grid in the ``r dr`` measure.

    :param mode: angular momentum
    :param t: time
    :param matrix: symmetric kernel values at the cell centres
    :param grid: radial grid

    """

    mode: int
    t: float
    matrix: npt.NDArray[np.float64]
    grid: RadialGrid

    def compose(self, other: ModeKernel) -> ModeKernel:
        """Kernel of the product of the two semigroup elements."""
        if other.grid is not self.grid or other.mode != self.mode:
            raise errors.DomainError('kernels belong to different operators')
        product = (self.matrix * self.grid.volumes) @ other.matrix
        return ModeKernel(self.mode, self.t + other.t, product, self.grid)

    def relative_difference(self, other: ModeKernel) -> float:
        """Relative Frobenius distance between two kernels."""
        scale = float(np.linalg.norm(self.matrix))
        return float(np.linalg.norm(self.matrix - other.matrix)) / scale


def build_operator(
    mode: int, flux: field.FluxData, grid: RadialGrid
) -> PartialWaveOperator:
    """Discretise ``h_m`` for the flux `flux` on `grid`."""
    return PartialWaveOperator(int(mode), flux, grid)


def mode_heat_kernel(opr: PartialWaveOperator, t: float) -> ModeKernel:
    """Heat semigroup of one discretised mode at time `t`.

    :raises relheat.errors.DomainError: unless ``t > 0``

    """
    if not t > 0:
        raise errors.DomainError(f'time must be positive, got {t}')
    spectrum = opr.spectrum()
    return ModeKernel(opr.mode, t, spectrum.matrix(t), opr.grid)


def free_mode_tail(r: float, r_prime: float, s: float, cutoff: int) -> float:
    """Relative weight of the free modes ``|j| > cutoff`` at time `s`.

    The free mode kernels are ``exp(-(r - r')**2 / 4s) ive(j, r r' / 2s)
    / 2s`` and they sum to the free Gaussian, so the tail relative to
    the whole sum is ``sum_{|j| > cutoff} ive(j, r r' / 2s)``.

    """
    z = r * r_prime / (2.0 * s)
    if z == 0:
        return 0.0
    total = 0.0
    order = cutoff + 1
    while True:
        term = float(special.ive(order, z))
        total += 2.0 * term
        if term <= 1e-17 * max(total, 1e-300) or term == 0.0:
            return total
        order += 1


def centred_modes(alpha: float, half_width: int) -> list[int]:
    """Modes ``m`` nearest to ``-alpha`` in summation order.

    The ``2 * half_width + 1`` modes around ``-floor(alpha + 1/2)`` are
    ordered by distance from the centre with the lower mode first at
    ties.

    """
    centre = -math.floor(alpha + 0.5)
    modes = [centre]
    for offset in range(1, half_width + 1):
        modes.extend((centre - offset, centre + offset))
    return modes


def default_grid(
    flux: field.FluxData,
    t_max: float,
    radius: float,
    *,
    relativistic: bool = False,
    n: int = _DEFAULT_CELLS,
) -> RadialGrid:
    """Grid large enough for kernels up to `t_max` near `radius`.

    The truncation radius is ``max(8 sqrt(t), 4 R, 4 |x|)`` for heat
    kernels and at least ``20 t`` for relativistic kernels whose
    subordinated heat times reach ``t**2``.  Radii above 40 switch to
    a stretched grid.

    """
    r_max = max(8.0 * math.sqrt(t_max), 4.0 * flux.support, 4.0 * radius)
    if relativistic:
        r_max = max(r_max, 20.0 * t_max)
    r_max = max(r_max, 1.0)
    if r_max <= 40.0:
        return RadialGrid.uniform(r_max, n)
    core = max(4.0 * flux.support, 4.0 * radius, 5.0)
    return RadialGrid.stretched(r_max, core / (n // 2), core, 1.02)


class RadialSolver:
    """Magnetic heat kernels of a radial field on a fixed grid.

    :param profile: field profile or its precomputed flux data
    :param grid: radial grid
    :param mode_cutoff: fixed number of modes on each side of the
        centre; chosen from the free tail when omitted
    :param tolerance: relative size of the neglected mode tail
    :param quad_spec: quadrature settings for subordination
    :param estimate_error: also solve on the coarsened grid to
        estimate the discretisation error
    :param threads: worker threads used to build mode spectra

    Spectra are computed on first use and cached.  The cache is guarded
    by a lock so a solver may be shared by threads.

    """

    def __init__(
        self,
        profile: field.FieldProfile | field.FluxData,
        grid: RadialGrid,
        *,
        mode_cutoff: int | None = None,
        tolerance: float = constants.MODE_TOLERANCE,
        quad_spec: datastructures.QuadratureSpec | None = None,
        estimate_error: bool = True,
        threads: int = 1,
    ) -> None:
        if isinstance(profile, field.FieldProfile):
            self.flux = field.flux_data(profile)
        else:
            self.flux = profile
        if mode_cutoff is not None and mode_cutoff < 1:
            raise errors.DomainError('mode_cutoff must be at least 1')
        self.grid = grid
        self.mode_cutoff = mode_cutoff
        self.tolerance = tolerance
        self.quad_spec = quad_spec or datastructures.QuadratureSpec()
        self.estimate_error = estimate_error
        self.threads = max(1, threads)
        self._spectra: dict[int, ModeSpectrum] = {}
        self._lock = threading.Lock()
        self._coarse: RadialSolver | None = None

    def spectrum(self, mode: int) -> ModeSpectrum:
        """Cached spectrum of `mode`."""
        with self._lock:
            cached = self._spectra.get(mode)
        if cached is not None:
            return cached
        computed = build_operator(mode, self.flux, self.grid).spectrum()
        with self._lock:
            return self._spectra.setdefault(mode, computed)

    def prepare(self, modes: abc.Iterable[int]) -> list[ModeSpectrum]:
        """Spectra of `modes`, computed concurrently when allowed."""
        modes = list(modes)
        if self.threads == 1 or len(modes) < 2:
            return [self.spectrum(mode) for mode in modes]
        with concurrent.futures.ThreadPoolExecutor(self.threads) as pool:
            return list(pool.map(self.spectrum, modes))

    def mode_kernel(self, mode: int, t: float) -> ModeKernel:
        """Heat kernel matrix of `mode` at time `t`."""
        if not t > 0:
            raise errors.DomainError(f'time must be positive, got {t}')
        return ModeKernel(mode, t, self.spectrum(mode).matrix(t), self.grid)

    def modes_for(
        self, r: float, r_prime: float, s_min: float
    ) -> tuple[list[int], float]:
        """Modes to sum for heat times ``s >= s_min`` and their tail.

        :returns: the ordered modes and the relative tail estimate

        """
        if self.mode_cutoff is not None:
            half_width = self.mode_cutoff
            tail = free_mode_tail(r, r_prime, s_min, half_width)
            if tail > self.tolerance:
                warnings.warn(
                    f'mode cutoff {half_width} leaves a relative tail of '
                    f'{tail:.3g}',
                    errors.CutoffInsufficient,
                    stacklevel=3,
                )
        else:
            half_width = 1
            tail = free_mode_tail(r, r_prime, s_min, half_width)
            while tail > self.tolerance and half_width < _MAX_MODES:
                half_width += 1
                tail = free_mode_tail(r, r_prime, s_min, half_width)
        # the flux shifts the orders by at most one half
        half_width += 1
        return centred_modes(self.flux.alpha, half_width), tail

    def _check_point(self, point: datastructures.Point) -> float:
        radius = math.hypot(*point)
        if radius >= self.grid.r_max:
            raise errors.DomainError(
                f'point {point} lies outside of the grid radius '
                f'{self.grid.r_max}'
            )
        return radius

    def _mode_terms(
        self,
        x: datastructures.Point,
        y: datastructures.Point,
        s_min: float,
    ) -> tuple[
        npt.NDArray[np.float64],
        npt.NDArray[np.complex128],
        float,
    ]:
        """Eigenvalues and complex weights of the assembled kernel."""
        r, r_prime = self._check_point(x), self._check_point(y)
        modes, tail = self.modes_for(r, r_prime, s_min)
        delta = datastructures.phase_difference(x, y)
        energies = []
        weights = []
        for spectrum in self.prepare(modes):
            phase = complex(
                math.cos(spectrum.mode * delta),
                math.sin(spectrum.mode * delta),
            )
            energies.append(np.maximum(spectrum.eigenvalues, 0.0))
            products = spectrum.at(r) * spectrum.at(r_prime)
            weights.append(products * phase / (2.0 * math.pi))
        return np.concatenate(energies), np.concatenate(weights), tail

    def _coarse_solver(self) -> RadialSolver | None:
        if not self.estimate_error:
            return None
        if self._coarse is None:
            try:
                grid = self.grid.coarsened()
            except errors.GridTooCoarse:
                return None
            self._coarse = RadialSolver(
                self.flux,
                grid,
                mode_cutoff=self.mode_cutoff,
                tolerance=self.tolerance,
                quad_spec=self.quad_spec,
                estimate_error=False,
                threads=self.threads,
            )
        return self._coarse

    def _heat_value(
        self, t: float, x: datastructures.Point, y: datastructures.Point
    ) -> tuple[complex, float]:
        energies, weights, tail = self._mode_terms(x, y, t)
        value = complex(np.sum(weights * np.exp(-t * energies)))
        return value, tail * _radial_gaussian(t, x, y)

    def heat_kernel(
        self, t: float, x: datastructures.Point, y: datastructures.Point
    ) -> datastructures.KernelSample:
        """Magnetic heat kernel ``exp(-t H)(x, y)``.

        :raises relheat.errors.DomainError: for non-positive `t` or
            points outside of the grid

        """
        if not t > 0:
            raise errors.DomainError(f'time must be positive, got {t}')
        value, error = self._heat_value(t, x, y)
        coarse = self._coarse_solver()
        if coarse is not None:
            coarse_value, _ = coarse._heat_value(t, x, y)  # noqa: SLF001
            error += abs(value - coarse_value) / 3.0
        return datastructures.KernelSample(
            t, x, y, value, error, datastructures.Method.SOLVER
        )

    def _spectral_value(
        self,
        t: float,
        x: datastructures.Point,
        y: datastructures.Point,
        mass: float,
    ) -> complex:
        energies, weights, _ = self._mode_terms(x, y, _heat_horizon(t))
        return _spectral_sum(energies, weights, t, mass)

    def relativistic_kernel(
        self,
        t: float,
        x: datastructures.Point,
        y: datastructures.Point,
        *,
        mass: float = 0.0,
        method: str = 'subordination',
    ) -> datastructures.KernelSample:
        """Kernel of ``exp(-t (sqrt(H + m**2) - m))``.

        :param method: ``subordination`` integrates the heat kernel
            against the subordinator with
            [relheat.quad.subordinate_massive][], and ``spectral``
            applies the function to the eigenvalues directly
        :raises relheat.errors.ConvergenceFailure: from the quadrature

        """
        if not t > 0:
            raise errors.DomainError(f'time must be positive, got {t}')
        if mass < 0:
            raise errors.DomainError(f'mass must be >= 0, got {mass}')
        energies, weights, tail = self._mode_terms(x, y, _heat_horizon(t))
        spectral = _spectral_sum(energies, weights, t, mass)
        if method == 'spectral':
            value, error = spectral, 0.0
            kind = datastructures.Method.SOLVER_SPECTRAL
        elif method == 'subordination':
            value, error = self._subordinated(energies, weights, t, mass)
            kind = datastructures.Method.SOLVER_SUBORDINATION
        else:
            raise errors.DomainError(f'unknown method {method!r}')
        error += tail * _radial_poisson(t, x, y)
        coarse = self._coarse_solver()
        if coarse is not None:
            rough = coarse._spectral_value(t, x, y, mass)  # noqa: SLF001
            error += abs(spectral - rough) / 3.0
        LOGGER.debug(
            'relativistic kernel at t=%g by %s: %r +/- %.3g',
            t,
            method,
            value,
            error,
        )
        return datastructures.KernelSample(t, x, y, value, error, kind)

    def _subordinated(
        self,
        energies: npt.NDArray[np.float64],
        weights: npt.NDArray[np.complex128],
        t: float,
        mass: float,
    ) -> tuple[complex, float]:
        """Subordinate the real and imaginary parts separately."""

        def part(
            coefficients: npt.NDArray[np.float64],
        ) -> datastructures.QuadResult:
            def base_kernel(s: float) -> float:
                return float(coefficients @ np.exp(-s * energies))

            inp = quad.SubordinationInput(base_kernel, t, mass)
            return quad.subordinate_massive(inp, self.quad_spec)

        real_part = part(weights.real.copy())
        if np.any(weights.imag):
            imag_part = part(weights.imag.copy())
        else:
            imag_part = datastructures.QuadResult(0.0, 0.0, 0)
        return (
            complex(real_part.value, imag_part.value),
            real_part.error + imag_part.error,
        )


def _spectral_sum(
    energies: npt.NDArray[np.float64],
    weights: npt.NDArray[np.complex128],
    t: float,
    mass: float,
) -> complex:
    factors = np.exp(-t * (np.sqrt(energies + mass * mass) - mass))
    return complex(np.sum(weights * factors))


def _heat_horizon(t: float) -> float:
    """Smallest heat time that matters when subordinating at time `t`."""
    return t * t / (4.0 * _SUBORDINATION_HORIZON)


def _radial_distance_sq(
    x: datastructures.Point, y: datastructures.Point
) -> float:
    return (math.hypot(*x) - math.hypot(*y)) ** 2


def _radial_gaussian(
    s: float, x: datastructures.Point, y: datastructures.Point
) -> float:
    """Free heat kernel at the distance ``| |x| - |y| |``."""
    return math.exp(-_radial_distance_sq(x, y) / (4.0 * s)) / (
        4.0 * math.pi * s
    )


def _radial_poisson(
    t: float, x: datastructures.Point, y: datastructures.Point
) -> float:
    return t / (2.0 * math.pi * (t * t + _radial_distance_sq(x, y)) ** 1.5)


def assemble_2d_kernel(
    profile: field.FieldProfile | field.FluxData,
    t: float,
    x: datastructures.Point,
    y: datastructures.Point,
    mode_cutoff: int | None = None,
    *,
    grid: RadialGrid | None = None,
) -> complex:
    """``(1/2 pi) sum_m exp(i m (theta - theta')) k_m(r, r', t)``.

    A default grid from [relheat.radial_solver.default_grid][] is used
    when `grid` is omitted.  Use [relheat.radial_solver.RadialSolver][]
    directly to reuse spectra across many evaluations.

    """
    flux = _as_flux(profile)
    if grid is None:
        radius = max(math.hypot(*x), math.hypot(*y))
        grid = default_grid(flux, t, radius)
    solver = RadialSolver(
        flux, grid, mode_cutoff=mode_cutoff, estimate_error=False
    )
    return solver.heat_kernel(t, x, y).value


def relativistic_radial_kernel(
    profile: field.FieldProfile | field.FluxData,
    t: float,
    x: datastructures.Point,
    y: datastructures.Point,
    mass: float = 0.0,
    *,
    mode_cutoff: int | None = None,
    grid: RadialGrid | None = None,
    quad_spec: datastructures.QuadratureSpec | None = None,
) -> complex:
    """Subordinated solver kernel at ``(x, y)`` and time `t`."""
    flux = _as_flux(profile)
    if grid is None:
        radius = max(math.hypot(*x), math.hypot(*y))
        grid = default_grid(flux, t, radius, relativistic=True)
    solver = RadialSolver(
        flux,
        grid,
        mode_cutoff=mode_cutoff,
        quad_spec=quad_spec,
        estimate_error=False,
    )
    return solver.relativistic_kernel(t, x, y, mass=mass).value


def _as_flux(profile: field.FieldProfile | field.FluxData) -> field.FluxData:
    if isinstance(profile, field.FluxData):
        return profile
    return field.flux_data(profile)
