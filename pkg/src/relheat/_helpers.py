from __future__ import annotations

import csv
import math
import typing

import numpy as np

from relheat import datastructures, errors, specfun

if typing.TYPE_CHECKING:
    from collections import abc

    import numpy.typing as npt

_EVALUATORS: dict[str, abc.Callable[..., float]] = {
    'gamma_fn': specfun.gamma_fn,
    'log_gamma': specfun.log_gamma,
    'beta_fn': specfun.beta_fn,
    'bessel_j': specfun.bessel_j,
    'gauss_2f1': specfun.hyp2f1,
    'hyp2f1': specfun.hyp2f1,
    'gauss_2f1_integral': lambda a, b, c, w: specfun.gauss_2f1_integral(
        specfun.HypergeometricArgs(a, b, c, w)
    ),
}


def evaluate_function(function_name: str, arguments: str) -> float:
    """Evaluate a special function from a line of text.

    :param function_name: name of a function in [relheat.specfun][]
    :param arguments: whitespace separated numeric arguments
    :raises NotImplementedError: if `function_name` is unknown
    :raises relheat.errors.DomainError: if the arguments cannot be
        parsed or do not match the function

    """
    try:
        evaluator = _EVALUATORS[function_name]
    except KeyError:
        raise NotImplementedError(
            f'unknown function {function_name}'
        ) from None
    try:
        values = [float(token) for token in arguments.split()]
    except ValueError:
        raise errors.DomainError(
            f'non-numeric arguments {arguments!r}'
        ) from None
    try:
        return evaluator(*values)
    except TypeError:
        raise errors.DomainError(
            f'wrong number of arguments for {function_name}: {len(values)}'
        ) from None


def format_float(value: float) -> str:
    """Shortest string that round-trips to `value`."""
    return repr(float(value))


def time_grid(
    t_min: float, t_max: float, points: int, *, spacing: str = 'log'
) -> npt.NDArray[np.float64]:
    """Times from `t_min` to `t_max` inclusive.

    :raises relheat.errors.DomainError: for an empty or reversed range

    """
    if not (t_min > 0 and t_max >= t_min and points >= 1):
        raise errors.DomainError(
            f'invalid time grid [{t_min}, {t_max}] with {points} points'
        )
    if points == 1:
        return np.array([t_min])
    if spacing == 'log':
        grid = np.logspace(math.log10(t_min), math.log10(t_max), points)
    elif spacing == 'linear':
        grid = np.linspace(t_min, t_max, points)
    else:
        raise errors.DomainError(f'unknown spacing {spacing!r}')
    grid[0], grid[-1] = t_min, t_max
    return grid


CSV_COLUMNS = ('t', 'x1', 'x2', 'y1', 'y2', 're', 'im', 'err', 'method')


def write_samples(
    stream: typing.TextIO,
    samples: abc.Iterable[datastructures.KernelSample],
) -> None:
    """Write `samples` as CSV with a header row.

    Floats are written with [relheat._helpers.format_float][] so the
    output reads back bit for bit and identical samples always produce
    identical bytes.

    """
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for sample in samples:
        value = complex(sample.value)
        writer.writerow([
            *(
                format_float(number)
                for number in (
                    sample.t,
                    *sample.x,
                    *sample.y,
                    value.real,
                    value.imag,
                    sample.error,
                )
            ),
            sample.method.value,
        ])


def read_samples(
    stream: abc.Iterable[str],
) -> list[datastructures.KernelSample]:
    """Parse CSV written by [relheat._helpers.write_samples][].

    :raises relheat.errors.MalformedCSV: for a missing or unexpected
        header, short rows, non-numeric values and unknown methods

    """
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CSV_COLUMNS:
        raise errors.MalformedCSV(
            f'expected header {",".join(CSV_COLUMNS)}', row_number=1
        )
    samples = []
    for row_number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise errors.MalformedCSV(
                f'expected {len(CSV_COLUMNS)} columns, found {len(row)}',
                row_number=row_number,
            )
        try:
            t, x1, x2, y1, y2, re, im, err = (float(v) for v in row[:-1])
        except ValueError:
            raise errors.MalformedCSV(
                f'non-numeric value in {row!r}', row_number=row_number
            ) from None
        try:
            method = datastructures.Method(row[-1].strip())
        except ValueError:
            raise errors.MalformedCSV(
                f'unknown method {row[-1]!r}', row_number=row_number
            ) from None
        if not t > 0:
            raise errors.MalformedCSV(
                f'time must be positive, got {t!r}', row_number=row_number
            )
        samples.append(
            datastructures.KernelSample(
                t, (x1, x2), (y1, y2), complex(re, im), err, method
            )
        )
    return samples
