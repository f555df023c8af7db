"""Parsing of run configuration files.

- [relheat.config.parse_config][]: parse configuration text
- [relheat.config.load_config][]: read and parse a configuration file
- [relheat.config.RunConfig][]: the parsed and validated result

A configuration is a sequence of ``[section]`` headers and
``key = value`` lines::

    [profile]
    kind = step
    b0 = 2.0
    radius = 0.5   # flux 1/4

    [time]
    t_min = 1
    t_max = 100
    points = 8

    [points]
    point = 1 0 1 0
    point = "1, 0, 0, 1"

Everything after an unquoted ``#`` or ``;`` is a comment.  Values may be
enclosed in double quotes, and list values are separated by commas or
whitespace.  Every problem is reported as a
[relheat.errors.MalformedConfig][] naming the line and the
``section.key`` that caused it.

"""

from __future__ import annotations

import dataclasses
import logging
import math
import pathlib
import re
import typing

from relheat import _helpers, datastructures, errors, field, radial_solver

if typing.TYPE_CHECKING:
    import numpy as np
    import numpy.typing as npt

LOGGER = logging.getLogger(__name__)

_QUOTED_SEGMENT_RE = re.compile(r'"([^"]*)"')
_SECTION_RE = re.compile(r'^\[\s*(?P<name>[a-z_]+)\s*\]$')
_LIST_SEPARATOR_RE = re.compile(r'[\s,]+')

_KNOWN_KEYS: dict[str, frozenset[str]] = {
    'profile': frozenset(
        {'kind', 'b0', 'radius', 'sigma', 'alpha', 'table'}
    ),
    'run': frozenset({'mass', 'method'}),
    'time': frozenset({'t_min', 't_max', 'points', 'spacing'}),
    'points': frozenset({'point'}),
    'solver': frozenset(
        {'r_max', 'n', 'mode_cutoff', 'core', 'h0', 'ratio'}
    ),
    'quad': frozenset(
        {'abs_tol', 'rel_tol', 'max_subdivisions', 'transform', 'max_nodes'}
    ),
    'output': frozenset({'csv_path', 'json_path'}),
}
_REPEATABLE = frozenset({('points', 'point')})


class _Entry(typing.NamedTuple):
    value: str
    line_number: int


@dataclasses.dataclass(frozen=True)
class ProfileConfig:
    """Description of the field profile of a run.

    :param kind: profile shape
    :param b0: field strength of ``step`` and ``gaussian_truncated``
    :param radius: support radius of ``step`` and ``gaussian_truncated``
    :param sigma: width of ``gaussian_truncated``
    :param alpha: flux of ``aharonov_bohm``
    :param table: two column CSV file of a ``table`` profile

    """

    kind: field.ProfileKind = field.ProfileKind.ZERO
    b0: float = 0.0
    radius: float = 1.0
    sigma: float = 1.0
    alpha: float = 0.0
    table: pathlib.Path | None = None

    def build(self) -> field.FieldProfile:
        """Construct the profile.

        :raises relheat.errors.DomainError: for invalid parameters
        :raises relheat.errors.MalformedCSV: for an unreadable table

        """
        if self.kind is field.ProfileKind.STEP:
            return field.FieldProfile.step(self.b0, self.radius)
        if self.kind is field.ProfileKind.GAUSSIAN_TRUNCATED:
            return field.FieldProfile.gaussian_truncated(
                self.b0, self.sigma, self.radius
            )
        if self.kind is field.ProfileKind.AHARONOV_BOHM:
            return field.FieldProfile.aharonov_bohm(self.alpha)
        if self.kind is field.ProfileKind.TABLE:
            if self.table is None:
                raise errors.DomainError('table profile without a table')
            return field.FieldProfile.from_csv(self.table)
        return field.FieldProfile.zero()


@dataclasses.dataclass(frozen=True)
class TimeConfig:
    """Time grid of a run."""

    t_min: float = 1.0
    t_max: float = 1.0
    points: int = 1
    spacing: str = 'log'

    def grid(self) -> npt.NDArray[np.float64]:
        """The sampled times in increasing order."""
        return _helpers.time_grid(
            self.t_min, self.t_max, self.points, spacing=self.spacing
        )


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    """Radial solver settings.

    Without `r_max` the grid is sized from the time range and the
    evaluation points by [relheat.radial_solver.default_grid][].  With
    `core` the grid is stretched beyond that radius.

    """

    r_max: float | None = None
    n: int = 800
    mode_cutoff: int | None = None
    core: float | None = None
    h0: float | None = None
    ratio: float = 1.01

    def grid(
        self, flux: field.FluxData, t_max: float, radius: float
    ) -> radial_solver.RadialGrid:
        """Grid for a run reaching `t_max` at points within `radius`."""
        if self.r_max is None:
            return radial_solver.default_grid(
                flux, t_max, radius, relativistic=True, n=self.n
            )
        if self.core is None:
            return radial_solver.RadialGrid.uniform(self.r_max, self.n)
        h0 = self.h0 if self.h0 is not None else self.core / self.n
        return radial_solver.RadialGrid.stretched(
            self.r_max, h0, self.core, self.ratio
        )


@dataclasses.dataclass(frozen=True)
class OutputConfig:
    """Where results are written; [None][] means standard output."""

    csv_path: pathlib.Path | None = None
    json_path: pathlib.Path | None = None


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """A validated run configuration.

    :param profile: field profile description
    :param mass: particle mass
    :param method: ``subordination`` or ``spectral`` evaluation of
        solver kernels
    :param time: time grid
    :param eval_points: ``(x, y)`` pairs at which kernels are evaluated
    :param solver: radial solver settings
    :param quad: quadrature settings
    :param outputs: output locations

    """

    profile: ProfileConfig = ProfileConfig()
    mass: float = 0.0
    method: str = 'subordination'
    time: TimeConfig = TimeConfig()
    eval_points: tuple[
        tuple[datastructures.Point, datastructures.Point], ...
    ] = ()
    solver: SolverConfig = SolverConfig()
    quad: datastructures.QuadratureSpec = datastructures.QuadratureSpec()
    outputs: OutputConfig = OutputConfig()

    def tasks(
        self,
    ) -> list[tuple[float, datastructures.Point, datastructures.Point]]:
        """Every ``(t, x, y)`` of the run in output order."""
        return [
            (float(t), x, y)
            for t in self.time.grid()
            for x, y in self.eval_points
        ]

    @property
    def max_radius(self) -> float:
        """Largest distance of an evaluation point from the origin."""
        return max(
            (
                max(math.hypot(*x), math.hypot(*y))
                for x, y in self.eval_points
            ),
            default=0.0,
        )


def _strip_comment(line: str) -> str:
    """Remove an unquoted trailing comment."""
    protected = line
    for segment in _QUOTED_SEGMENT_RE.findall(line):
        masked = segment.replace('#', '\000').replace(';', '\001')
        protected = protected.replace(f'"{segment}"', f'"{masked}"', 1)
    for marker in '#;':
        protected = protected.partition(marker)[0]
    return protected.replace('\000', '#').replace('\001', ';').strip()


def _dequote(value: str) -> str:
    """Remove quotes when the entire value is quoted.

    >>> _dequote('"1 0 1 0"')
    '1 0 1 0'
    >>> _dequote('csv="x"')
    'csv="x"'

    """
    if len(value) > 1 and value[0] == '"' and value[-1] == '"':
        return value[1:-1]
    return value


def _split_list(value: str) -> list[str]:
    return [token for token in _LIST_SEPARATOR_RE.split(value) if token]


def _tokenize(
    text: str,
) -> dict[tuple[str, str], list[_Entry]]:
    entries: dict[tuple[str, str], list[_Entry]] = {}
    section: str | None = None
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw_line)
        if not line:
            continue
        header = _SECTION_RE.match(line)
        if header:
            section = header.group('name')
            if section not in _KNOWN_KEYS:
                raise errors.MalformedConfig(
                    'unknown section', line_number=line_number, field=section
                )
            continue
        name, sep, value = line.partition('=')
        name = name.strip().lower()
        if section is None:
            raise errors.MalformedConfig(
                'entry outside of a section',
                line_number=line_number,
                field=name or line,
            )
        qualified = f'{section}.{name}'
        if sep != '=' or not name:
            raise errors.MalformedConfig(
                'expected "key = value"',
                line_number=line_number,
                field=qualified,
            )
        if name not in _KNOWN_KEYS[section]:
            raise errors.MalformedConfig(
                'unknown key', line_number=line_number, field=qualified
            )
        key = (section, name)
        if key in entries and key not in _REPEATABLE:
            raise errors.MalformedConfig(
                f'duplicate key, first set on line '
                f'{entries[key][0].line_number}',
                line_number=line_number,
                field=qualified,
            )
        value = _dequote(value.strip())
        entries.setdefault(key, []).append(_Entry(value, line_number))
    return entries


class _Reader:
    """Typed access to tokenized entries with located errors."""

    def __init__(self, entries: dict[tuple[str, str], list[_Entry]]) -> None:
        self.entries = entries

    def fail(
        self, section: str, name: str, message: str
    ) -> errors.MalformedConfig:
        found = self.entries.get((section, name))
        return errors.MalformedConfig(
            message,
            line_number=found[0].line_number if found else None,
            field=f'{section}.{name}',
        )

    def raw(self, section: str, name: str) -> str | None:
        found = self.entries.get((section, name))
        return found[0].value if found else None

    @typing.overload
    def real(
        self,
        section: str,
        name: str,
        default: float,
        *,
        positive: bool = ...,
        non_negative: bool = ...,
    ) -> float: ...

    @typing.overload
    def real(
        self,
        section: str,
        name: str,
        default: None,
        *,
        positive: bool = ...,
        non_negative: bool = ...,
    ) -> float | None: ...

    def real(
        self,
        section: str,
        name: str,
        default: float | None,
        *,
        positive: bool = False,
        non_negative: bool = False,
    ) -> float | None:
        value = self.raw(section, name)
        if value is None:
            return default
        try:
            number = float(value)
        except ValueError:
            raise self.fail(
                section, name, f'expected a number, got {value!r}'
            ) from None
        if not math.isfinite(number):
            raise self.fail(section, name, 'must be finite')
        if positive and not number > 0:
            raise self.fail(section, name, f'must be > 0, got {number:g}')
        if non_negative and number < 0:
            raise self.fail(section, name, f'must be >= 0, got {number:g}')
        return number

    @typing.overload
    def integer(
        self, section: str, name: str, default: int, *, minimum: int
    ) -> int: ...

    @typing.overload
    def integer(
        self, section: str, name: str, default: None, *, minimum: int
    ) -> int | None: ...

    def integer(
        self, section: str, name: str, default: int | None, *, minimum: int
    ) -> int | None:
        value = self.raw(section, name)
        if value is None:
            return default
        try:
            number = int(value)
        except ValueError:
            raise self.fail(
                section, name, f'expected an integer, got {value!r}'
            ) from None
        if number < minimum:
            raise self.fail(
                section, name, f'must be >= {minimum}, got {number}'
            )
        return number

    def choice(
        self, section: str, name: str, default: str, choices: set[str]
    ) -> str:
        value = self.raw(section, name)
        if value is None:
            return default
        value = value.lower()
        if value not in choices:
            raise self.fail(
                section,
                name,
                f'expected one of {", ".join(sorted(choices))}, '
                f'got {value!r}',
            )
        return value


def _required_real(reader: _Reader, section: str, name: str) -> float:
    value = reader.real(section, name, None)
    if value is None:
        raise reader.fail(section, name, 'required value is missing')
    return value


def _parse_profile(
    reader: _Reader, base_dir: pathlib.Path | None
) -> ProfileConfig:
    kinds = {kind.value for kind in field.ProfileKind}
    kind = field.ProfileKind(reader.choice('profile', 'kind', 'zero', kinds))
    table_value = reader.raw('profile', 'table')
    table = None
    if table_value is not None:
        table = pathlib.Path(table_value)
        if base_dir is not None and not table.is_absolute():
            table = base_dir / table
    config = ProfileConfig(
        kind=kind,
        b0=reader.real('profile', 'b0', 0.0),
        radius=reader.real('profile', 'radius', 1.0, positive=True),
        sigma=reader.real('profile', 'sigma', 1.0, positive=True),
        alpha=reader.real('profile', 'alpha', 0.0),
        table=table,
    )
    if kind in {
        field.ProfileKind.STEP,
        field.ProfileKind.GAUSSIAN_TRUNCATED,
    }:
        _required_real(reader, 'profile', 'b0')
        _required_real(reader, 'profile', 'radius')
    if kind is field.ProfileKind.GAUSSIAN_TRUNCATED:
        _required_real(reader, 'profile', 'sigma')
    if kind is field.ProfileKind.AHARONOV_BOHM:
        _required_real(reader, 'profile', 'alpha')
    if kind is field.ProfileKind.TABLE and table is None:
        raise reader.fail('profile', 'table', 'required value is missing')
    return config


def _parse_time(reader: _Reader) -> TimeConfig:
    t_min = reader.real('time', 't_min', 1.0, positive=True)
    t_max = reader.real('time', 't_max', t_min, positive=True)
    if t_max < t_min:
        raise reader.fail('time', 't_max', f'must be >= t_min={t_min:g}')
    points = reader.integer('time', 'points', 1, minimum=1)
    if t_max > t_min and points < 2:
        raise reader.fail('time', 'points', 'a time range needs >= 2 points')
    spacing = reader.choice('time', 'spacing', 'log', {'log', 'linear'})
    return TimeConfig(t_min, t_max, points, spacing)


def _parse_points(
    reader: _Reader,
) -> tuple[tuple[datastructures.Point, datastructures.Point], ...]:
    points = []
    for entry in reader.entries.get(('points', 'point'), []):
        try:
            coordinates = [float(token) for token in _split_list(entry.value)]
        except ValueError:
            coordinates = []
        if len(coordinates) != 4 or not all(
            math.isfinite(c) for c in coordinates
        ):
            raise errors.MalformedConfig(
                f'expected four numbers "x1 x2 y1 y2", got {entry.value!r}',
                line_number=entry.line_number,
                field='points.point',
            )
        x1, x2, y1, y2 = coordinates
        points.append(((x1, x2), (y1, y2)))
    if not points:
        raise errors.MalformedConfig(
            'at least one evaluation point is required',
            line_number=None,
            field='points.point',
        )
    return tuple(points)


def _parse_solver(reader: _Reader) -> SolverConfig:
    r_max = reader.real('solver', 'r_max', None, positive=True)
    n = reader.integer('solver', 'n', 800, minimum=16)
    core = reader.real('solver', 'core', None, positive=True)
    if core is not None and r_max is None:
        raise reader.fail('solver', 'core', 'requires solver.r_max')
    if core is not None and r_max is not None and core >= r_max:
        raise reader.fail('solver', 'core', 'must be below solver.r_max')
    ratio = reader.real('solver', 'ratio', 1.01, positive=True)
    if ratio < 1:
        raise reader.fail('solver', 'ratio', 'must be >= 1')
    return SolverConfig(
        r_max=r_max,
        n=n,
        mode_cutoff=reader.integer('solver', 'mode_cutoff', None, minimum=1),
        core=core,
        h0=reader.real('solver', 'h0', None, positive=True),
        ratio=ratio,
    )


def _parse_quad(reader: _Reader) -> datastructures.QuadratureSpec:
    default = datastructures.QuadratureSpec()
    transforms = {transform.value for transform in datastructures.Transform}
    return datastructures.QuadratureSpec(
        abs_tol=reader.real('quad', 'abs_tol', default.abs_tol, positive=True),
        rel_tol=reader.real('quad', 'rel_tol', default.rel_tol, positive=True),
        max_subdivisions=reader.integer(
            'quad', 'max_subdivisions', default.max_subdivisions, minimum=1
        ),
        transform=datastructures.Transform(
            reader.choice(
                'quad', 'transform', default.transform.value, transforms
            )
        ),
        max_nodes=reader.integer(
            'quad', 'max_nodes', default.max_nodes, minimum=16
        ),
    )


def _parse_output(
    reader: _Reader, base_dir: pathlib.Path | None
) -> OutputConfig:
    def path(name: str) -> pathlib.Path | None:
        value = reader.raw('output', name)
        if not value:
            return None
        resolved = pathlib.Path(value)
        if base_dir is not None and not resolved.is_absolute():
            resolved = base_dir / resolved
        return resolved

    return OutputConfig(path('csv_path'), path('json_path'))


def parse_config(
    text: str, *, base_dir: pathlib.Path | None = None
) -> RunConfig:
    """Parse and validate a run configuration.

    :param text: configuration text
    :param base_dir: directory that relative paths are resolved
        against; left relative when omitted
    :raises relheat.errors.MalformedConfig: for syntax errors, unknown
        sections or keys, and values outside of their valid range

    """
    reader = _Reader(_tokenize(text))
    profile = _parse_profile(reader, base_dir)
    mass = reader.real('run', 'mass', 0.0, non_negative=True)
    if profile.kind is field.ProfileKind.AHARONOV_BOHM and mass > 0:
        raise reader.fail(
            'run', 'mass', 'Aharonov-Bohm kernels are massless only'
        )
    config = RunConfig(
        profile=profile,
        mass=mass,
        method=reader.choice(
            'run', 'method', 'subordination', {'subordination', 'spectral'}
        ),
        time=_parse_time(reader),
        eval_points=_parse_points(reader),
        solver=_parse_solver(reader),
        quad=_parse_quad(reader),
        outputs=_parse_output(reader, base_dir),
    )
    LOGGER.debug(
        'parsed configuration: %s profile, %d times, %d points',
        profile.kind.value,
        config.time.points,
        len(config.eval_points),
    )
    return config


def load_config(path: str | pathlib.Path) -> RunConfig:
    """Read `path` and parse it with [relheat.config.parse_config][].

    Relative paths inside of the file are resolved against the
    directory that contains it.

    :raises relheat.errors.MalformedConfig: when the file cannot be
        read or parsed

    """
    path = pathlib.Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as error:
        raise errors.MalformedConfig(
            error.strerror or str(error), line_number=None, field=str(path)
        ) from None
    return parse_config(text, base_dir=path.parent)

