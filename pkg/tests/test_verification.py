import json
import math
import unittest
from unittest import mock

from relheat import errors, verification


def failing_check() -> None:
    raise errors.ConvergenceFailure(
        'no convergence', estimate=1.0, achieved=math.inf
    )


class RunSuiteTests(unittest.TestCase):
    def test_special_function_suite(self) -> None:
        report = verification.run_suite('specfun')
        self.assertEqual(report.suite, 'specfun')
        self.assertGreaterEqual(len(report.checks), 5)
        self.assertTrue(all(c.suite == 'specfun' for c in report.checks))
        self.assertTrue(report.passed, report.to_json())

    def test_report_serialisation(self) -> None:
        report = verification.run_suite('specfun')
        data = json.loads(report.to_json())
        self.assertEqual(data['suite'], 'specfun')
        self.assertIs(data['pass'], True)
        self.assertEqual(
            [check['name'] for check in data['checks']],
            [check.name for check in report.checks],
        )
        self.assertIn('seconds', data['checks'][0])

    def test_aharonov_bohm_suite(self) -> None:
        report = verification.run_suite('ab')
        names = [check.name for check in report.checks]
        self.assertIn('diagonal-routes', names)
        self.assertIn('cauchy-schwarz', names)
        self.assertIn('ab-mode-held-out', names)
        self.assertTrue(report.passed, report.to_json())

    def test_unknown_suite(self) -> None:
        with self.assertRaises(errors.DomainError):
            verification.run_suite('everything')

    def test_crashing_check_is_reported(self) -> None:
        with mock.patch.dict(
            'relheat.verification._REGISTRY',
            {'specfun': [('crash', failing_check)]},
        ):
            report = verification.run_suite('specfun')
        self.assertFalse(report.passed)
        (check,) = report.checks
        self.assertEqual(check.name, 'crash')
        self.assertEqual(check.detail, 'no convergence')
        self.assertTrue(math.isnan(check.measured))
        self.assertEqual(check.as_dict()['measured'], 'nan')


class CheckResultTests(unittest.TestCase):
    def test_as_dict(self) -> None:
        result = verification.CheckResult('ab', 'demo', 0.5, 1.0, True)
        self.assertEqual(
            result.as_dict(),
            {
                'suite': 'ab',
                'name': 'demo',
                'measured': 0.5,
                'threshold': 1.0,
                'pass': True,
                'detail': '',
                'seconds': 0.0,
            },
        )
