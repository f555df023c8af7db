import pathlib
import tempfile
import typing
import unittest

from relheat import config, datastructures, errors, field

MINIMAL = """
[points]
point = 1 0 0 1
"""


class ParseConfigTests(unittest.TestCase):
    def test_defaults(self) -> None:
        run = config.parse_config(MINIMAL)
        self.assertEqual(run.profile.kind, field.ProfileKind.ZERO)
        self.assertEqual(run.mass, 0.0)
        self.assertEqual(run.method, 'subordination')
        self.assertEqual(run.eval_points, (((1.0, 0.0), (0.0, 1.0)),))
        self.assertEqual(run.quad, datastructures.QuadratureSpec())
        self.assertIsNone(run.outputs.csv_path)
        self.assertEqual(run.tasks(), [(1.0, (1.0, 0.0), (0.0, 1.0))])

    def test_complete_configuration(self) -> None:
        run = config.parse_config(
            '[profile]\n'
            'kind = step\n'
            'b0 = 2.0\n'
            'radius = 0.5   # flux 1/4\n'
            '\n'
            '[run]\n'
            'mass = 1.5\n'
            'method = SPECTRAL\n'
            '[time]\n'
            't_min = 1\n'
            't_max = 100\n'
            'points = 3\n'
            '[points]\n'
            'point = 1 0 1 0\n'
            'point = "1, 0, 0, 1"\n'
            '[solver]\n'
            'r_max = 50\n'
            'n = 400\n'
            'core = 10\n'
            '[quad]\n'
            'transform = none\n'
            'rel_tol = 1e-8\n'
        )
        self.assertEqual(run.profile.kind, field.ProfileKind.STEP)
        self.assertEqual((run.profile.b0, run.profile.radius), (2.0, 0.5))
        self.assertEqual(run.mass, 1.5)
        self.assertEqual(run.method, 'spectral')
        self.assertEqual(len(run.eval_points), 2)
        self.assertEqual(run.eval_points[1], ((1.0, 0.0), (0.0, 1.0)))
        self.assertEqual(run.solver.core, 10.0)
        self.assertEqual(run.quad.transform, datastructures.Transform.NONE)
        self.assertEqual(run.quad.rel_tol, 1e-8)
        times = [t for t, _, _ in run.tasks()]
        self.assertEqual(len(times), 6)
        self.assertEqual((times[0], times[-1]), (1.0, 100.0))
        self.assertAlmostEqual(times[2], 10.0)

    def test_comment_markers_inside_quotes(self) -> None:
        run = config.parse_config(
            MINIMAL + '[output]\ncsv_path = "out#1;a.csv"  ; trailing\n'
        )
        self.assertEqual(run.outputs.csv_path, pathlib.Path('out#1;a.csv'))

    def test_max_radius(self) -> None:
        run = config.parse_config('[points]\npoint = 3 4 0 1\n')
        self.assertEqual(run.max_radius, 5.0)

    def test_relative_paths_use_the_base_directory(self) -> None:
        run = config.parse_config(
            MINIMAL + '[output]\njson_path = report.json\n',
            base_dir=pathlib.Path('/data'),
        )
        self.assertEqual(
            run.outputs.json_path, pathlib.Path('/data/report.json')
        )

    def test_aharonov_bohm_profile(self) -> None:
        run = config.parse_config(
            '[profile]\nkind = aharonov_bohm\nalpha = 0.5\n' + MINIMAL
        )
        profile = run.profile.build()
        self.assertTrue(profile.is_singular)


class MalformedConfigTests(unittest.TestCase):
    def assert_malformed(
        self, text: str, field_name: str, line_number: typing.Optional[int]
    ) -> None:
        with self.assertRaises(errors.MalformedConfig) as context:
            config.parse_config(text)
        self.assertEqual(context.exception.field, field_name)
        self.assertEqual(context.exception.line_number, line_number)

    def test_syntax_errors(self) -> None:
        self.assert_malformed('point = 1 0 0 1\n', 'point', 1)
        self.assert_malformed(
            '[points]\npoint 1 0 0 1\n', 'points.point 1 0 0 1', 2
        )
        self.assert_malformed('[mystery]\n', 'mystery', 1)
        self.assert_malformed(
            MINIMAL + '[run]\ncolour = red\n', 'run.colour', 5
        )

    def test_duplicate_key(self) -> None:
        self.assert_malformed(
            MINIMAL + '[run]\nmass = 1\nmass = 2\n', 'run.mass', 6
        )

    def test_invalid_values(self) -> None:
        for text, field_name, line_number in (
            ('[run]\nmass = heavy\n', 'run.mass', 2),
            ('[run]\nmass = -1\n', 'run.mass', 2),
            ('[run]\nmass = inf\n', 'run.mass', 2),
            ('[run]\nmethod = euler\n', 'run.method', 2),
            ('[time]\nt_min = 0\n', 'time.t_min', 2),
            ('[time]\nt_min = 2\nt_max = 1\n', 'time.t_max', 3),
            ('[time]\nt_max = 10\npoints = 1\n', 'time.points', 3),
            ('[time]\npoints = 1.5\n', 'time.points', 2),
            ('[time]\nspacing = cubic\n', 'time.spacing', 2),
            ('[solver]\nn = 8\n', 'solver.n', 2),
            ('[solver]\ncore = 2\n', 'solver.core', 2),
            ('[solver]\nr_max = 2\ncore = 3\n', 'solver.core', 3),
            ('[solver]\nratio = 0.5\n', 'solver.ratio', 2),
            ('[quad]\nmax_nodes = 4\n', 'quad.max_nodes', 2),
            ('[profile]\nkind = disc\n', 'profile.kind', 2),
        ):
            with self.subTest(text=text):
                self.assert_malformed(text + MINIMAL, field_name, line_number)

    def test_missing_profile_parameters(self) -> None:
        self.assert_malformed(
            '[profile]\nkind = step\nradius = 1\n' + MINIMAL,
            'profile.b0',
            None,
        )
        self.assert_malformed(
            '[profile]\nkind = aharonov_bohm\n' + MINIMAL,
            'profile.alpha',
            None,
        )
        self.assert_malformed(
            '[profile]\nkind = table\n' + MINIMAL, 'profile.table', None
        )

    def test_malformed_points(self) -> None:
        self.assert_malformed('[points]\npoint = 1 0 0\n', 'points.point', 2)
        self.assert_malformed(
            '[points]\npoint = 1 0 nan 1\n', 'points.point', 2
        )
        self.assert_malformed('[run]\nmass = 1\n', 'points.point', None)

    def test_aharonov_bohm_is_massless(self) -> None:
        self.assert_malformed(
            '[profile]\nkind = aharonov_bohm\nalpha = 0.5\n'
            '[run]\nmass = 1\n' + MINIMAL,
            'run.mass',
            5,
        )

    def test_message_names_the_location(self) -> None:
        with self.assertRaises(errors.MalformedConfig) as context:
            config.parse_config('[run]\nmass = heavy\n' + MINIMAL)
        self.assertTrue(str(context.exception).startswith('line 2: run.mass'))


class LoadConfigTests(unittest.TestCase):
    def setUp(self) -> None:
        super().setUp()
        self.directory = tempfile.TemporaryDirectory()
        self.addCleanup(self.directory.cleanup)
        self.root = pathlib.Path(self.directory.name)

    def test_table_is_relative_to_the_file(self) -> None:
        (self.root / 'profile.csv').write_text(
            'r,B\n0,1\n1,1\n2,0\n', encoding='utf-8'
        )
        path = self.root / 'run.ini'
        path.write_text(
            '[profile]\nkind = table\ntable = profile.csv\n' + MINIMAL,
            encoding='utf-8',
        )
        run = config.load_config(path)
        self.assertEqual(run.profile.table, self.root / 'profile.csv')
        self.assertAlmostEqual(
            field.flux_alpha(run.profile.build()), 7.0 / 6.0
        )

    def test_missing_file(self) -> None:
        with self.assertRaises(errors.MalformedConfig) as context:
            config.load_config(self.root / 'absent.ini')
        self.assertIsNone(context.exception.line_number)


class SolverConfigTests(unittest.TestCase):
    def test_grids(self) -> None:
        flux = field.FluxData.constant(0.0)
        uniform = config.SolverConfig(r_max=10.0, n=100).grid(flux, 1, 1)
        self.assertEqual((uniform.r_max, uniform.n), (10.0, 100))
        stretched = config.SolverConfig(r_max=50.0, n=100, core=10.0).grid(
            flux, 1, 1
        )
        self.assertEqual(stretched.r_max, 50.0)
        self.assertGreater(stretched.n, 100)
        automatic = config.SolverConfig(n=200).grid(flux, 10.0, 1.0)
        self.assertEqual(automatic.r_max, 200.0)
