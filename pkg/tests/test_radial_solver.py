import cmath
import math
import unittest

import numpy as np

from relheat import ab_kernel, errors, field, radial_solver

BESSEL_J0_ZERO = 2.404825557695773
BESSEL_J1_ZERO = 3.8317059702075125


def zero_field_solver(
    r_max: float = 12.0, n: int = 300, **kwargs: object
) -> radial_solver.RadialSolver:
    grid = radial_solver.RadialGrid.uniform(r_max, n)
    kwargs.setdefault('estimate_error', False)
    return radial_solver.RadialSolver(
        field.FieldProfile.zero(),
        grid,
        **kwargs,  # type: ignore[arg-type]
    )


class RadialGridTests(unittest.TestCase):
    def test_uniform_grid(self) -> None:
        grid = radial_solver.RadialGrid.uniform(4.0, 16)
        self.assertEqual(grid.n, 16)
        self.assertEqual(grid.r_max, 4.0)
        self.assertAlmostEqual(float(grid.centres[0]), 0.125)
        self.assertAlmostEqual(float(np.sum(grid.volumes)), 8.0)

    def test_too_few_cells(self) -> None:
        with self.assertRaises(errors.GridTooCoarse):
            radial_solver.RadialGrid.uniform(1.0, 15)
        with self.assertRaises(errors.GridTooCoarse):
            radial_solver.RadialGrid(np.linspace(0.0, 1.0, 8))

    def test_faces_must_start_at_zero(self) -> None:
        with self.assertRaises(errors.DomainError):
            radial_solver.RadialGrid(np.linspace(0.5, 1.0, 40))
        with self.assertRaises(errors.DomainError):
            radial_solver.RadialGrid.uniform(0.0, 40)

    def test_stretched_grid(self) -> None:
        grid = radial_solver.RadialGrid.stretched(100.0, 0.1, 5.0, 1.05)
        widths = np.diff(grid.faces)
        self.assertEqual(grid.r_max, 100.0)
        self.assertAlmostEqual(float(widths[0]), 0.1)
        self.assertGreater(float(widths[-2]), float(widths[60]))
        with self.assertRaises(errors.DomainError):
            radial_solver.RadialGrid.stretched(100.0, 0.1, 5.0, 0.9)

    def test_coarsened_grid_keeps_the_radius(self) -> None:
        grid = radial_solver.RadialGrid.uniform(3.0, 64)
        coarse = grid.coarsened()
        self.assertEqual(coarse.n, 32)
        self.assertEqual(coarse.r_max, 3.0)

    def test_interpolation(self) -> None:
        grid = radial_solver.RadialGrid.uniform(4.0, 16)
        indices, weights = grid.interpolation(0.5, regular_origin=False)
        self.assertEqual(indices.tolist(), [1, 2])
        np.testing.assert_allclose(weights, [0.5, 0.5])
        indices, weights = grid.interpolation(0.0, regular_origin=True)
        self.assertEqual((indices.tolist(), weights.tolist()), ([0], [1.0]))
        indices, weights = grid.interpolation(0.0, regular_origin=False)
        self.assertEqual(weights.tolist(), [0.0])
        with self.assertRaises(errors.DomainError):
            grid.interpolation(4.5, regular_origin=True)

    def test_default_grid(self) -> None:
        flux = field.FluxData.constant(0.0)
        grid = radial_solver.default_grid(flux, 1.0, 1.0)
        self.assertEqual((grid.r_max, grid.n), (8.0, 800))
        wide = radial_solver.default_grid(flux, 10.0, 1.0, relativistic=True)
        self.assertEqual(wide.r_max, 200.0)
        self.assertGreater(float(np.diff(wide.faces)[-1]), 0.1)


class ModeOrderingTests(unittest.TestCase):
    def test_centred_modes(self) -> None:
        self.assertEqual(radial_solver.centred_modes(0.0, 1), [0, -1, 1])
        self.assertEqual(
            radial_solver.centred_modes(0.5, 2), [-1, -2, 0, -3, 1]
        )
        self.assertEqual(radial_solver.centred_modes(-2.2, 0), [2])

    def test_free_tail(self) -> None:
        self.assertEqual(radial_solver.free_mode_tail(0.0, 1.0, 1.0, 1), 0)
        tails = [
            radial_solver.free_mode_tail(1.0, 2.0, 0.5, cutoff)
            for cutoff in range(1, 11)
        ]
        self.assertEqual(tails, sorted(tails, reverse=True))
        self.assertLess(tails[-1], 1e-6)

    def test_automatic_cutoff_meets_tolerance(self) -> None:
        solver = zero_field_solver(tolerance=1e-8)
        modes, tail = solver.modes_for(1.0, 1.0, 0.5)
        self.assertLessEqual(tail, 1e-8)
        self.assertEqual(modes[0], 0)
        self.assertEqual(len(modes) % 2, 1)

    def test_fixed_cutoff_warns_when_insufficient(self) -> None:
        solver = zero_field_solver(mode_cutoff=1)
        with self.assertWarns(errors.CutoffInsufficient):
            solver.modes_for(5.0, 5.0, 0.1)

    def test_cutoff_must_be_positive(self) -> None:
        with self.assertRaises(errors.DomainError):
            zero_field_solver(mode_cutoff=0)


class PartialWaveTests(unittest.TestCase):
    def setUp(self) -> None:
        super().setUp()
        self.grid = radial_solver.RadialGrid.uniform(10.0, 400)
        self.flux = field.FluxData.constant(0.0)

    def test_dirichlet_ground_states(self) -> None:
        for mode, zero in ((0, BESSEL_J0_ZERO), (1, BESSEL_J1_ZERO)):
            opr = radial_solver.build_operator(mode, self.flux, self.grid)
            lowest = float(opr.spectrum().eigenvalues[0])
            with self.subTest(mode=mode):
                self.assertAlmostEqual(lowest, (zero / 10.0) ** 2, delta=1e-3)

    def test_origin_order(self) -> None:
        flux = field.FluxData.constant(0.25)
        self.assertEqual(
            radial_solver.build_operator(-1, flux, self.grid).origin_order,
            0.75,
        )
        opr = radial_solver.build_operator(0, self.flux, self.grid)
        self.assertTrue(opr.spectrum().regular_origin)

    def test_potential(self) -> None:
        radii = np.array([0.5, 1.0, 2.0, 5.0])
        half_flux = radial_solver.build_operator(
            0, field.FluxData.constant(0.5), self.grid
        )
        np.testing.assert_array_equal(half_flux.potential(radii), 0.0)
        step = field.flux_data(field.FieldProfile.step(2.0, 1.0))
        opr = radial_solver.build_operator(-1, step, self.grid)
        np.testing.assert_allclose(
            opr.potential(radii[1:]), -0.25 / radii[1:] ** 2, rtol=1e-12
        )
        self.assertAlmostEqual(float(opr.potential(0.5)), 1.25)

    def test_energy_cap(self) -> None:
        opr = radial_solver.build_operator(0, self.flux, self.grid)
        capped = opr.spectrum(energy_cap=1.0)
        self.assertLessEqual(float(capped.eigenvalues[-1]), 1.0)
        self.assertLess(capped.eigenvalues.size, self.grid.n)

    def test_semigroup_property(self) -> None:
        for mode in (0, 2):
            opr = radial_solver.build_operator(mode, self.flux, self.grid)
            composed = radial_solver.mode_heat_kernel(opr, 0.5).compose(
                radial_solver.mode_heat_kernel(opr, 0.75)
            )
            direct = radial_solver.mode_heat_kernel(opr, 1.25)
            with self.subTest(mode=mode):
                self.assertLess(composed.relative_difference(direct), 1e-8)

    def test_mode_kernel_matches_the_free_kernel(self) -> None:
        for mode in (0, 1, 2):
            opr = radial_solver.build_operator(mode, self.flux, self.grid)
            spectrum = opr.spectrum()
            exact = ab_kernel.heat_mode_kernel(float(mode), 1.0, 2.0, 1.0)
            with self.subTest(mode=mode):
                self.assertLess(
                    abs(spectrum.value(1.0, 1.0, 2.0) - exact), 0.01 * exact
                )

    def test_invalid_requests(self) -> None:
        opr = radial_solver.build_operator(0, self.flux, self.grid)
        with self.assertRaises(errors.DomainError):
            radial_solver.mode_heat_kernel(opr, 0.0)
        with self.assertRaises(errors.DomainError):
            opr.spectrum().decay(1.0, generator='wave')
        other = radial_solver.build_operator(1, self.flux, self.grid)
        with self.assertRaises(errors.DomainError):
            radial_solver.mode_heat_kernel(opr, 1.0).compose(
                radial_solver.mode_heat_kernel(other, 1.0)
            )


class RadialSolverTests(unittest.TestCase):
    def test_free_heat_kernel(self) -> None:
        solver = zero_field_solver()
        for t in (0.5, 1.0, 2.0):
            sample = solver.heat_kernel(t, (1.0, 0.0), (0.0, 1.0))
            expected = ab_kernel.free_heat_kernel(t, (1.0, 0.0), (0.0, 1.0))
            with self.subTest(t=t):
                self.assertLess(abs(sample.value - expected), 0.02 * expected)

    def test_spectra_are_cached(self) -> None:
        solver = zero_field_solver(threads=2)
        first = solver.prepare([0, 1, -1])
        self.assertIs(solver.spectrum(1), first[1])

    def test_kernel_is_hermitian(self) -> None:
        grid = radial_solver.RadialGrid.uniform(12.0, 300)
        solver = radial_solver.RadialSolver(
            field.FieldProfile.step(1.0, 1.0), grid, estimate_error=False
        )
        x, y = (0.5, 0.2), (-0.3, 0.9)
        forward = solver.heat_kernel(1.0, x, y).value
        backward = solver.heat_kernel(1.0, y, x).value
        self.assertAlmostEqual(forward, backward.conjugate(), places=12)
        self.assertNotAlmostEqual(forward.imag, 0.0, places=6)

    def test_step_field_is_dominated_by_the_free_kernel(self) -> None:
        grid = radial_solver.RadialGrid.uniform(12.0, 300)
        solver = radial_solver.RadialSolver(
            field.FieldProfile.step(1.0, 1.0), grid
        )
        pairs = (((1.0, 0.0), (1.0, 0.0)), ((0.5, 0.2), (-0.3, 0.9)))
        for t in (2.0, 4.0):
            for x, y in pairs:
                sample = solver.heat_kernel(t, x, y)
                free = ab_kernel.free_heat_kernel(t, x, y)
                with self.subTest(t=t, x=x, y=y):
                    self.assertLessEqual(sample.modulus - sample.error, free)

    def test_error_estimate_from_the_coarse_grid(self) -> None:
        solver = zero_field_solver(estimate_error=True)
        sample = solver.heat_kernel(1.0, (1.0, 0.0), (1.0, 0.0))
        self.assertGreater(sample.error, 0.0)
        self.assertLess(sample.error, 0.05 * abs(sample.value))

    def test_relativistic_methods_agree(self) -> None:
        solver = zero_field_solver()
        x, y = (1.0, 0.0), (0.0, 0.5)
        for mass in (0.0, 1.0):
            spectral = solver.relativistic_kernel(
                1.0, x, y, mass=mass, method='spectral'
            )
            subordinated = solver.relativistic_kernel(1.0, x, y, mass=mass)
            with self.subTest(mass=mass):
                self.assertLess(
                    abs(spectral.value - subordinated.value),
                    1e-7 * abs(spectral.value),
                )

    def test_invalid_arguments(self) -> None:
        solver = zero_field_solver()
        with self.assertRaises(errors.DomainError):
            solver.heat_kernel(0.0, (1.0, 0.0), (1.0, 0.0))
        with self.assertRaises(errors.DomainError):
            solver.heat_kernel(1.0, (13.0, 0.0), (1.0, 0.0))
        with self.assertRaises(errors.DomainError):
            solver.relativistic_kernel(1.0, (1, 0), (1, 0), mass=-1.0)
        with self.assertRaises(errors.DomainError):
            solver.relativistic_kernel(1.0, (1, 0), (1, 0), method='euler')
        with self.assertRaises(errors.DomainError):
            solver.mode_kernel(0, -1.0)

    def test_assembled_kernel_with_default_grid(self) -> None:
        value = radial_solver.assemble_2d_kernel(
            field.FieldProfile.zero(), 1.0, (1.0, 0.0), (1.0, 0.0)
        )
        self.assertLess(abs(value - 1.0 / (4.0 * math.pi)), 0.01 / math.pi)
        self.assertAlmostEqual(cmath.phase(value), 0.0)

    def test_relativistic_kernel_on_an_explicit_grid(self) -> None:
        grid = radial_solver.RadialGrid.uniform(12.0, 300)
        x, y = (1.0, 0.0), (0.0, 0.5)
        value = radial_solver.relativistic_radial_kernel(
            field.FieldProfile.zero(), 1.0, x, y, mass=1.0, grid=grid
        )
        expected = zero_field_solver().relativistic_kernel(
            1.0, x, y, mass=1.0
        )
        self.assertLess(
            abs(value - expected.value), 1e-9 * abs(expected.value)
        )
