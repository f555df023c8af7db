"""Command line interface.

``relheat compute``
    evaluate the kernels described by a configuration file and write
    them as CSV

``relheat verify``
    run self checks and emit a JSON report

``relheat fit``
    fit power laws to CSV written by ``compute``

``relheat ab``, ``relheat quad``, ``relheat specfun``
    direct access to the Aharonov-Bohm kernel, the quadrature self
    test and the special functions

The exit status is 0 on success, 1 when a verification fails or a
computation does not converge, and 2 for unusable configuration or
input files.

"""

from __future__ import annotations

import argparse
import concurrent.futures
import contextlib
import json
import logging
import pathlib
import sys
import typing

import relheat
from relheat import (
    _helpers,
    ab_kernel,
    bounds_fit,
    config,
    datastructures,
    errors,
    field,
    radial_solver,
    verification,
)

if typing.TYPE_CHECKING:
    from collections import abc

LOGGER = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

_Evaluator = typing.Callable[
    [float, datastructures.Point, datastructures.Point],
    datastructures.KernelSample,
]


def kernel_evaluator(run: config.RunConfig) -> _Evaluator:
    """Select how the kernels of `run` are computed.

    The vanishing field uses the closed form free kernel, the
    Aharonov-Bohm field sums its partial waves and every other
    profile goes through a shared [relheat.radial_solver.RadialSolver][].

    """
    profile = run.profile.build()
    if profile.kind is field.ProfileKind.ZERO:

        def free(
            t: float, x: datastructures.Point, y: datastructures.Point
        ) -> datastructures.KernelSample:
            value = ab_kernel.free_relativistic_kernel(t, x, y, run.mass)
            return datastructures.KernelSample(
                t, x, y, value, method=datastructures.Method.FREE_CLOSED
            )

        return free

    if profile.kind is field.ProfileKind.AHARONOV_BOHM:

        def aharonov_bohm(
            t: float, x: datastructures.Point, y: datastructures.Point
        ) -> datastructures.KernelSample:
            return ab_kernel.ab_full_kernel(
                profile.alpha, t, x, y, run.solver.mode_cutoff
            )

        return aharonov_bohm

    flux = field.flux_data(profile)
    grid = run.solver.grid(flux, run.time.t_max, run.max_radius)
    LOGGER.info(
        'radial solver for flux %g on %d cells up to r=%g',
        flux.alpha,
        grid.n,
        grid.r_max,
    )
    solver = radial_solver.RadialSolver(
        flux, grid, mode_cutoff=run.solver.mode_cutoff, quad_spec=run.quad
    )

    def solved(
        t: float, x: datastructures.Point, y: datastructures.Point
    ) -> datastructures.KernelSample:
        return solver.relativistic_kernel(
            t, x, y, mass=run.mass, method=run.method
        )

    return solved


def compute_samples(
    run: config.RunConfig, *, threads: int = 1
) -> list[datastructures.KernelSample]:
    """Evaluate every ``(t, x, y)`` of `run`.

    The samples are returned in the order of
    [relheat.config.RunConfig.tasks][] whatever order the worker
    threads finish in.

    """
    evaluate = kernel_evaluator(run)
    tasks = run.tasks()
    LOGGER.info('computing %d kernel values', len(tasks))
    if threads <= 1:
        return [evaluate(*task) for task in tasks]
    with concurrent.futures.ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda task: evaluate(*task), tasks))


@contextlib.contextmanager
def _output(path: pathlib.Path | None) -> abc.Iterator[typing.TextIO]:
    if path is None:
        yield sys.stdout
        return
    with path.open('w', encoding='utf-8', newline='') as stream:
        yield stream


def _load(arguments: argparse.Namespace) -> config.RunConfig:
    if arguments.config is None:
        raise errors.MalformedConfig(
            'a configuration file is required',
            line_number=None,
            field='--config',
        )
    return config.load_config(arguments.config)


def cmd_compute(arguments: argparse.Namespace) -> int:
    """Write the kernels of a configuration as CSV."""
    run = _load(arguments)
    samples = compute_samples(run, threads=arguments.threads)
    with _output(arguments.out or run.outputs.csv_path) as stream:
        _helpers.write_samples(stream, samples)
    if run.outputs.json_path is not None:
        summary: dict[str, typing.Any] = {
            'profile': run.profile.kind.value,
            'mass': run.mass,
            'rows': len(samples),
            'methods': sorted({sample.method.value for sample in samples}),
        }
        try:
            fits = bounds_fit.fit_samples(samples)
        except errors.DomainError as error:
            LOGGER.info('no decay fit: %s', error)
        else:
            summary['fits'] = [
                {'x': list(x), 'y': list(y), **fit.as_dict()}
                for (x, y), fit in fits.items()
            ]
        run.outputs.json_path.write_text(
            json.dumps(summary, sort_keys=True) + '\n', encoding='utf-8'
        )
    return EXIT_SUCCESS


def _print_table(report: verification.SuiteReport) -> None:
    for check in report.checks:
        status = 'pass' if check.passed else 'FAIL'
        print(  # noqa: T201
            f'{status:4}  {check.suite}/{check.name:<28} '
            f'{check.measured:<12.4g} <= {check.threshold:<10.4g} '
            f'{check.detail}'.rstrip()
        )


def cmd_verify(arguments: argparse.Namespace) -> int:
    """Run a verification suite and report every check."""
    json_path = arguments.out
    if json_path is None and arguments.config is not None:
        json_path = config.load_config(arguments.config).outputs.json_path
    report = verification.run_suite(arguments.suite)
    if json_path is None:
        print(report.to_json())  # noqa: T201
    else:
        json_path.write_text(report.to_json() + '\n', encoding='utf-8')
        _print_table(report)
    return EXIT_SUCCESS if report.passed else EXIT_FAILURE


def cmd_fit(arguments: argparse.Namespace) -> int:
    """Fit power laws to a kernel CSV file."""
    try:
        with arguments.csv.open(encoding='utf-8', newline='') as stream:
            samples = _helpers.read_samples(stream)
    except OSError as error:
        raise errors.MalformedCSV(
            error.strerror or str(error), row_number=0
        ) from None
    result: list[dict[str, typing.Any]] | dict[str, typing.Any]
    try:
        if arguments.envelope:
            result = bounds_fit.fit_envelope(
                samples, weight_exponent=arguments.weight_exponent
            ).as_dict()
        else:
            fits = bounds_fit.fit_samples(
                samples, weight_exponent=arguments.weight_exponent
            )
            result = [
                {'x': list(x), 'y': list(y), **fit.as_dict()}
                for (x, y), fit in fits.items()
            ]
    except (errors.DomainError, errors.EmptySampleSet) as error:
        raise errors.MalformedCSV(str(error), row_number=0) from None
    with _output(arguments.out) as stream:
        stream.write(json.dumps(result, sort_keys=True) + '\n')
    return EXIT_SUCCESS


def cmd_ab(arguments: argparse.Namespace) -> int:
    """Evaluate the Aharonov-Bohm kernel directly."""
    if arguments.ab_command == 'diag':
        value = ab_kernel.ab_diagonal_kernel(
            arguments.alpha, arguments.t, arguments.r, arguments.cutoff
        )
        print(_helpers.format_float(value))  # noqa: T201
    elif arguments.ab_command == 'kernel':
        sample = ab_kernel.ab_full_kernel(
            arguments.alpha,
            arguments.t,
            tuple(arguments.x),
            tuple(arguments.y),
            arguments.cutoff,
        )
        _helpers.write_samples(sys.stdout, [sample])
    else:
        value = ab_kernel.weighted_sup(
            arguments.alpha, arguments.t, arguments.eps, arguments.radii
        )
        print(_helpers.format_float(value))  # noqa: T201
    return EXIT_SUCCESS


def cmd_quad(arguments: argparse.Namespace) -> int:  # noqa: ARG001
    """Run the quadrature self test."""
    report = verification.run_suite('quad')
    _print_table(report)
    return EXIT_SUCCESS if report.passed else EXIT_FAILURE


def cmd_specfun(arguments: argparse.Namespace) -> int:
    """Evaluate a special function by name."""
    try:
        value = _helpers.evaluate_function(
            arguments.name, ' '.join(arguments.arguments)
        )
    except NotImplementedError as error:
        LOGGER.error('%s', error)  # noqa: TRY400
        return EXIT_USAGE
    print(_helpers.format_float(value))  # noqa: T201
    return EXIT_SUCCESS


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f'expected >= 1, got {number}')
    return number


def build_parser() -> argparse.ArgumentParser:
    """The argument parser of the ``relheat`` command."""
    parser = argparse.ArgumentParser(
        prog='relheat',
        description='Heat kernels of relativistic magnetic Hamiltonians.',
    )
    parser.add_argument(
        '--version', action='version', version=relheat.version
    )
    parser.add_argument(
        '-v',
        '--verbose',
        action='count',
        default=0,
        help='log more detail, repeat for debug output',
    )
    commands = parser.add_subparsers(dest='command', required=True)

    compute = commands.add_parser('compute', help=cmd_compute.__doc__)
    compute.add_argument('--config', type=pathlib.Path)
    compute.add_argument('--out', type=pathlib.Path)
    compute.add_argument('--threads', type=_positive_int, default=1)
    compute.set_defaults(handler=cmd_compute)

    verify = commands.add_parser('verify', help=cmd_verify.__doc__)
    verify.add_argument('--config', type=pathlib.Path)
    verify.add_argument(
        '--suite', choices=verification.SUITES, default='all'
    )
    verify.add_argument('--out', type=pathlib.Path)
    verify.set_defaults(handler=cmd_verify)

    fit = commands.add_parser('fit', help=cmd_fit.__doc__)
    fit.add_argument('csv', type=pathlib.Path)
    fit.add_argument('--out', type=pathlib.Path)
    fit.add_argument(
        '--weight-exponent',
        type=float,
        default=0.0,
        help='divide |K| by ((1+|x|)(1+|y|))**BETA before fitting',
    )
    fit.add_argument(
        '--envelope',
        action='store_true',
        help='fit the largest value per time instead of each point pair',
    )
    fit.set_defaults(handler=cmd_fit)

    ab = commands.add_parser('ab', help=cmd_ab.__doc__)
    ab_commands = ab.add_subparsers(dest='ab_command', required=True)
    for name in ('diag', 'kernel', 'weighted-sup'):
        verb = ab_commands.add_parser(name)
        verb.add_argument('--alpha', type=float, required=True)
        verb.add_argument('--t', type=float, required=True)
        if name == 'diag':
            verb.add_argument('--r', type=float, required=True)
        elif name == 'kernel':
            verb.add_argument('--x', type=float, nargs=2, required=True)
            verb.add_argument('--y', type=float, nargs=2, required=True)
        else:
            verb.add_argument('--eps', type=float, required=True)
            verb.add_argument(
                '--radii', type=float, nargs='+', required=True
            )
        if name != 'weighted-sup':
            verb.add_argument('--cutoff', type=_positive_int)
        verb.set_defaults(handler=cmd_ab)

    quad_parser = commands.add_parser('quad', help=cmd_quad.__doc__)
    quad_commands = quad_parser.add_subparsers(
        dest='quad_command', required=True
    )
    quad_commands.add_parser('selftest').set_defaults(handler=cmd_quad)

    specfun_parser = commands.add_parser(
        'specfun', help=cmd_specfun.__doc__
    )
    specfun_commands = specfun_parser.add_subparsers(
        dest='specfun_command', required=True
    )
    evaluate = specfun_commands.add_parser('eval')
    evaluate.add_argument('name')
    evaluate.add_argument('arguments', nargs='*')
    evaluate.set_defaults(handler=cmd_specfun)
    return parser


def main(argv: abc.Sequence[str] | None = None) -> int:
    """Entry point of the ``relheat`` command."""
    arguments = build_parser().parse_args(argv)
    logging.basicConfig(
        level=max(logging.DEBUG, logging.WARNING - 10 * arguments.verbose),
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    handler: abc.Callable[[argparse.Namespace], int] = arguments.handler
    try:
        return handler(arguments)
    except (errors.MalformedConfig, errors.MalformedCSV) as error:
        LOGGER.error('%s', error)  # noqa: TRY400
        return EXIT_USAGE
    except errors.DomainError as error:
        LOGGER.error('invalid input: %s', error)  # noqa: TRY400
        return EXIT_USAGE
    except errors.RootException as error:
        LOGGER.error('%s', error)  # noqa: TRY400
        return EXIT_FAILURE


if __name__ == '__main__':
    raise SystemExit(main())
