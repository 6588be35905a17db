# Copyright 2026 Geoffrey R. Scheller
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Command Line Front End
----------------------

.. admonition:: ``sdr-kit``

    Reads a CSV sample, runs one estimator, selector or test and writes
    a JSON document, or CSV tables for plotting.

    +--------------+-------------------------------------------------------+
    | subcommand   | result                                                |
    +==============+=======================================================+
    | select-dim   | bootstrap dimension trace and the valley point        |
    +--------------+-------------------------------------------------------+
    | tune         | dimension, ``σu²``, ``σv²`` and ``h`` by bootstrap     |
    +--------------+-------------------------------------------------------+
    | estimate     | FM, CM or IHT basis with eigenvalues                  |
    +--------------+-------------------------------------------------------+
    | test-dim     | weighted, scaled and adjusted dimension tests         |
    +--------------+-------------------------------------------------------+
    | invfm        | inverse Fourier basis                                 |
    +--------------+-------------------------------------------------------+
    | xire         | FT-IRE family basis                                   |
    +--------------+-------------------------------------------------------+
    | sparse       | row sparse ADMM basis with its active set             |
    +--------------+-------------------------------------------------------+
    | simulate     | synthetic sample, optionally a recovery benchmark     |
    +--------------+-------------------------------------------------------+

    .. important::

       **Contract:** reproducible runs

       - every JSON document carries the schema tag ``sdr-kit/1``, the
         fully resolved configuration and the seed
       - seeds default to a constant, identical invocations produce
         byte identical JSON
       - warnings never change the exit status, they are listed under
         ``"warnings"``
       - any estimator or input error exits with status 2 and a JSON
         error document on stdout

    Environment variables ``SDR_KIT_THREADS`` and ``SDR_KIT_OUTPUT_DIR``
    supply the worker cap and the directory relative output paths are
    resolved against. Explicit flags win.

"""

import argparse
import json
import logging
import os
import sys
from collections.abc import Callable, Mapping, Sequence
from dataclasses import asdict, dataclass, field, fields, replace
from enum import StrEnum
from pathlib import Path
from typing import Any, Self, cast

import numpy as np
import pandas as pd

from .data_model import Dataset
from .density_scores import Density
from .errors import DimensionReductionError, EmptyAfterNaDrop, ParseError
from .estimators import BaseEstimator, make_estimator
from .estimators.ftire import XireKind, fm_xire
from .estimators.invfm import (
    MC_DRAWS,
    FourierDesign,
    TestStatistic,
    invfm_estimate,
    sequential_dimension_test,
)
from .estimators.itm_kernels import ItmConfig, Method, Space
from .estimators.sparse_admm import AdmmConfig, admmft
from .selection import DEFAULT_B, DEFAULT_SEED, select_dimension, tune_protocol
from .subspace import SubspaceBasis
from .synth import Model, SynthSpec, XDist, generate, recovery_benchmark, write_csv

__all__ = [
    'SCHEMA',
    'ENV_THREADS',
    'ENV_OUTPUT_DIR',
    'OutputFormat',
    'RunConfig',
    'Ingested',
    'ingest',
    'run',
    'main',
]

logger = logging.getLogger(__name__)

SCHEMA = 'sdr-kit/1'
ENV_THREADS = 'SDR_KIT_THREADS'
ENV_OUTPUT_DIR = 'SDR_KIT_OUTPUT_DIR'

COMMANDS = ('select-dim', 'tune', 'estimate', 'test-dim', 'invfm', 'xire', 'sparse', 'simulate')
ESTIMATE_METHODS = ('FM', 'CM', 'iht')
SELECT_METHODS = ('FM', 'CM', 'iht', 'invfm', 'xire', 'sparse')
INITS = ('invfm', 'identity')

_LOG_FORMAT = '%(levelname)s %(name)s: %(message)s'
_LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


class OutputFormat(StrEnum):
    JSON = 'json'
    CSV = 'csv'


def _default_m(command: str, method: str) -> int:
    if command == 'test-dim':
        return 0
    if 'sparse' in (command, method):
        return 30
    return 10


@dataclass(frozen=True)
class RunConfig:
    """
    .. admonition:: run configuration

        Every option of every subcommand, resolved against the defaults and
        the environment. Options a subcommand does not use keep their
        defaults and are still reported.

        :param command: Subcommand name.
        :param input: CSV file, ``None`` for ``simulate``.
        :param response: Response columns, comma separated names or one
                         based positions, negative positions count from
                         the end. The last column if ``None``.
        :param delimiter: CSV field delimiter.
        :param d: Dimension, the model dimension for ``simulate``.
        :param m: Number of frequencies for ``xire`` and ``sparse``, the
                  first hypothesized dimension for ``test-dim``.
        :param k: Number of frequencies for ``invfm`` and ``test-dim``.
        :param seed: Seed for resamples, frequencies and synthetic data.
        :param threads: Worker cap.
        :raises ValueError: If an option is out of range.

    """

    command: str
    input: str | None = None
    response: str | None = None
    delimiter: str = ','
    d: int | None = None
    method: str = 'FM'
    space: str = Space.MEAN.value
    density: str = Density.NORMAL.value
    sw2: float = 0.1
    st2: float = 1.0
    h: float = 1.0
    threshold: float | None = None
    B: int = DEFAULT_B
    window: int = 3
    m: int | None = None
    k: int = 10
    lam: float | None = None
    kind: str = XireKind.IRE.value
    init: str = 'invfm'
    scale_x: bool = True
    scale_y: bool = True
    level: float = 0.05
    statistic: str = TestStatistic.SCALED.value
    draws: int = MC_DRAWS
    n: int = 200
    p: int = 6
    q: int = 1
    model: str = Model.LINEAR.value
    noise_sd: float = 0.1
    x_dist: str = XDist.NORMAL.value
    replicates: int = 0
    seed: int = DEFAULT_SEED
    output_format: str = OutputFormat.JSON.value
    output: str | None = None
    output_dir: str = '.'
    reduce: str | None = None
    plot: str | None = None
    data: str | None = None
    threads: int = 1

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            msg = f'Unknown subcommand {self.command!r}'
            raise ValueError(msg)
        Space(self.space)
        Density(self.density)
        XireKind(self.kind)
        TestStatistic(self.statistic)
        Model(self.model)
        XDist(self.x_dist)
        OutputFormat(self.output_format)
        if self.method not in SELECT_METHODS:
            msg = f'Unknown method {self.method!r}, expected one of {SELECT_METHODS}'
            raise ValueError(msg)
        if self.init not in INITS:
            msg = f'Unknown initialization {self.init!r}, expected one of {INITS}'
            raise ValueError(msg)
        if len(self.delimiter) != 1:
            msg = f'Delimiter must be a single character, got {self.delimiter!r}'
            raise ValueError(msg)
        if (d := self.d) is None:
            d = Model(self.model).d if self.command == 'simulate' else 1
            object.__setattr__(self, 'd', d)
        if (m := self.m) is None:
            m = _default_m(self.command, self.method)
            object.__setattr__(self, 'm', m)
        if d < 1:
            msg = f'Dimension must be positive, got {d}'
            raise ValueError(msg)
        if m < 0:
            msg = f'm must be nonnegative, got {m}'
            raise ValueError(msg)
        for name in ('sw2', 'st2', 'h'):
            if not getattr(self, name) > 0.0:
                msg = f'{name} must be positive, got {getattr(self, name)}'
                raise ValueError(msg)
        if self.noise_sd < 0.0:
            msg = f'Noise standard deviation must be nonnegative, got {self.noise_sd}'
            raise ValueError(msg)
        if self.lam is not None and self.lam < 0.0:
            msg = f'Penalty must be nonnegative, got {self.lam}'
            raise ValueError(msg)
        if not 0.0 < self.level < 1.0:
            msg = f'Level must lie in (0, 1), got {self.level}'
            raise ValueError(msg)
        if self.B < 2:
            msg = f'Need at least 2 bootstrap replicates, got B={self.B}'
            raise ValueError(msg)
        if min(self.k, self.window, self.draws, self.threads) < 1 or self.replicates < 0:
            msg = 'Counts k, window, draws and threads must be positive, replicates nonnegative'
            raise ValueError(msg)

    @classmethod
    def from_args(cls, args: argparse.Namespace, environ: Mapping[str, str] | None = None) -> Self:
        """
        .. admonition:: from args

            :param args: Parsed command line, unset options are ``None``.
            :param environ: Environment, ``os.environ`` if ``None``.
            :returns: The resolved configuration.
            :raises ValueError: If ``SDR_KIT_THREADS`` is not an integer.

        """
        environ = os.environ if environ is None else environ
        given = {f.name: value for f in fields(cls) if (value := getattr(args, f.name, None)) is not None}
        if 'threads' not in given and (threads := environ.get(ENV_THREADS)):
            try:
                given['threads'] = int(threads)
            except ValueError:
                msg = f'{ENV_THREADS} must be an integer, got {threads!r}'
                raise ValueError(msg) from None
        if 'output_dir' not in given and (output_dir := environ.get(ENV_OUTPUT_DIR)):
            given['output_dir'] = output_dir
        return cls(**given)

    @property
    def dim(self) -> int:
        return cast(int, self.d)

    @property
    def hypothesis(self) -> int:
        return cast(int, self.m)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def resolve(self, path: str) -> Path:
        """
        .. admonition:: resolve

            :returns: ``path`` itself if absolute, otherwise relative to
                      the output directory.

        """
        return Path(self.output_dir) / path


@dataclass(frozen=True, eq=False)
class Ingested:
    """
    .. admonition:: ingested sample

        :param data: Rows without missing values.
        :param dropped: Number of rows dropped for missing values.
        :param path: The file read.

    """

    data: Dataset
    dropped: int = 0
    path: str = ''

    def to_dict(self) -> dict[str, Any]:
        return {
            'path': self.path,
            'n': self.data.n,
            'p': self.data.p,
            'q': self.data.q,
            'dropped': self.dropped,
            'x_names': list(self.data.x_names),
            'y_names': list(self.data.y_names),
        }


def _response_columns(columns: Sequence[str], response: str | None) -> list[str]:
    if response is None:
        return [columns[-1]]
    chosen: list[str] = []
    for token in (part.strip() for part in response.split(',')):
        if token in columns:
            chosen.append(token)
        elif token.lstrip('-').isdigit() and (pos := int(token)) != 0 and -len(columns) <= pos <= len(columns):
            chosen.append(columns[pos - 1 if pos > 0 else pos])
        else:
            msg = f'Response column {token!r} not found in {list(columns)}'
            raise ValueError(msg)
    if len(set(chosen)) != len(chosen):
        msg = f'Response columns repeat: {chosen}'
        raise ValueError(msg)
    return chosen


def ingest(path: str | os.PathLike[str], response: str | None = None, delimiter: str = ',') -> Ingested:
    """
    .. admonition:: ingest

        Read a CSV file with a header row, drop every row with a missing
        value and split the columns into predictors and responses.

        :param path: UTF-8 CSV file with ``'.'`` as decimal separator.
        :param response: Response columns, see ``RunConfig``.
        :param delimiter: Field delimiter.
        :returns: The sample and the number of rows dropped.
        :raises ParseError: At the first non-numeric cell.
        :raises EmptyAfterNaDrop: If no complete row remains.
        :raises ValueError: If a response column does not exist or no
                            predictor column remains.

    """
    try:
        raw = pd.read_csv(path, sep=delimiter, dtype=str, encoding='utf-8', skipinitialspace=True)
    except pd.errors.EmptyDataError:
        msg = f'{path} holds neither a header nor data'
        raise EmptyAfterNaDrop(msg) from None

    numeric = pd.DataFrame({col: pd.to_numeric(raw[col], errors='coerce') for col in raw.columns})
    bad = (numeric.isna() & raw.notna()).to_numpy()
    if bad.any():
        rows, cols = np.nonzero(bad)
        row, col = int(rows[0]), int(cols[0])
        raise ParseError(row + 1, str(raw.columns[col]), str(raw.iat[row, col]))

    complete = numeric.dropna()
    if (dropped := len(numeric) - len(complete)) > 0:
        logger.info('Dropped %d of %d rows with missing values', dropped, len(numeric))
    if complete.empty:
        msg = f'No complete rows in {path}, {dropped} dropped'
        raise EmptyAfterNaDrop(msg)

    columns = [str(col) for col in complete.columns]
    y_cols = _response_columns(columns, response)
    if not (x_cols := [col for col in columns if col not in y_cols]):
        msg = 'No predictor columns left after choosing the responses'
        raise ValueError(msg)
    data = Dataset(
        complete[x_cols].to_numpy(dtype=np.float64),
        complete[y_cols].to_numpy(dtype=np.float64),
        x_names=tuple(x_cols),
        y_names=tuple(y_cols),
    )
    return Ingested(data, dropped, str(path))


@dataclass(frozen=True)
class _Outcome:
    result: dict[str, Any]
    warnings: tuple[str, ...] = ()
    tables: Mapping[str, pd.DataFrame] = field(default_factory=dict)


def _estimator(cfg: RunConfig) -> BaseEstimator:
    match cfg.method:
        case 'FM' | 'CM':
            return make_estimator(
                cfg.method,
                space=cfg.space,
                density=cfg.density,
                sw2=cfg.sw2,
                st2=cfg.st2,
                h=cfg.h,
                threshold=cfg.threshold,
                workers=cfg.threads,
            )
        case 'iht':
            return make_estimator('iht')
        case 'invfm':
            return make_estimator('invfm', k=cfg.k, seed=cfg.seed, scale_x=cfg.scale_x, scale_y=cfg.scale_y)
        case 'xire':
            return make_estimator('xire', kind=cfg.kind, m=cfg.m, seed=cfg.seed, init=cfg.init, scale_y=cfg.scale_y)
        case _:
            return make_estimator(
                'sparse',
                m=cfg.m,
                lam=cfg.lam,
                cfg=AdmmConfig(scale_x=cfg.scale_x, scale_y=cfg.scale_y),
                seed=cfg.seed,
                workers=cfg.threads,
            )


def _basis_outcome(basis: SubspaceBasis, data: Dataset, cfg: RunConfig) -> _Outcome:
    columns = [f'dir{j + 1}' for j in range(basis.d)]
    if cfg.reduce is not None:
        reduced = pd.DataFrame(basis.reduce(data.X), columns=columns)
        reduced.to_csv(cfg.resolve(cfg.reduce), index=False, float_format='%.17g')
    result = {
        'method': basis.method,
        'd': basis.d,
        'predictors': list(data.x_names),
        'basis': basis.B.tolist(),
        'eigenvalues': basis.eigvals.tolist(),
        'spectrum': basis.full_spectrum.tolist(),
    }
    tables = {
        'basis': pd.DataFrame(basis.B, index=pd.Index(data.x_names, name='predictor'), columns=columns),
        'eigenvalues': pd.DataFrame({
            'index': np.arange(1, basis.p + 1),
            'eigenvalue': basis.full_spectrum,
        }),
    }
    return _Outcome(result, basis.diagnostics, tables)


def _select_dim(cfg: RunConfig, data: Dataset) -> _Outcome:
    trace = select_dimension(data, _estimator(cfg), cfg.B, cfg.seed, window=cfg.window, workers=cfg.threads)
    if cfg.plot is not None:
        trace.to_csv(cfg.resolve(cfg.plot))
    result = trace.to_dict() | {'chosen': int(trace.chosen)}
    return _Outcome(result, trace.notes, {'trace': trace.to_frame()})


def _tune(cfg: RunConfig, data: Dataset) -> _Outcome:
    if cfg.method not in (Method.FM, Method.CM):
        msg = f'Tuning needs method FM or CM, got {cfg.method!r}'
        raise ValueError(msg)
    start = ItmConfig(space=cfg.space, method=cfg.method, density=cfg.density, h=cfg.h, threshold=cfg.threshold)
    tuned = tune_protocol(data, start, cfg.B, cfg.seed, window=cfg.window, workers=cfg.threads)
    notes = tuple(note for trace in tuned.traces.values() for note in trace.notes)
    tables = {name: trace.to_frame() for name, trace in tuned.traces.items()}
    return _Outcome(tuned.to_dict(), notes, tables)


def _estimate(cfg: RunConfig, data: Dataset) -> _Outcome:
    if cfg.method not in ESTIMATE_METHODS:
        msg = f'estimate supports {ESTIMATE_METHODS}, got {cfg.method!r}'
        raise ValueError(msg)
    return _basis_outcome(_estimator(cfg).fit(data, cfg.dim), data, cfg)


def _design(cfg: RunConfig, data: Dataset, k: int) -> FourierDesign:
    return FourierDesign.gaussian(data.q, k, cfg.seed)


def _test_dim(cfg: RunConfig, data: Dataset) -> _Outcome:
    fitted = invfm_estimate(data, 1, _design(cfg, data, cfg.k), cfg.scale_x, cfg.scale_y)
    kernel = fitted.kernel
    last = min(kernel.p, 2 * kernel.k)
    outcome = sequential_dimension_test(
        kernel,
        data.n,
        cfg.level,
        cfg.statistic,
        ms=range(cfg.hypothesis, max(cfg.hypothesis + 1, last)),
        draws=cfg.draws,
        seed=cfg.seed,
        workers=cfg.threads,
    )
    rows = [
        {'m': report.m}
        | {f'stat_{name}': value for name, value in report.stats.items()}
        | {f'pvalue_{name}': value for name, value in report.pvalues.items()}
        for report in outcome.reports
    ]
    return _Outcome(outcome.to_dict(), fitted.basis.diagnostics, {'tests': pd.DataFrame(rows)})


def _invfm(cfg: RunConfig, data: Dataset) -> _Outcome:
    fitted = invfm_estimate(data, cfg.dim, _design(cfg, data, cfg.k), cfg.scale_x, cfg.scale_y)
    return _basis_outcome(fitted.basis, data, cfg)


def _xire(cfg: RunConfig, data: Dataset) -> _Outcome:
    basis = fm_xire(
        data,
        cfg.dim,
        cfg.hypothesis,
        cfg.kind,
        cfg.seed,
        init=cfg.init,
        scale_y=cfg.scale_y,
        design=_design(cfg, data, cfg.hypothesis),
    )
    return _basis_outcome(basis, data, cfg)


def _sparse(cfg: RunConfig, data: Dataset) -> _Outcome:
    admm = AdmmConfig(scale_x=cfg.scale_x, scale_y=cfg.scale_y)
    design = _design(cfg, data, cfg.hypothesis)
    sol = admmft(data, cfg.dim, cfg.hypothesis, cfg.lam, admm, cfg.seed, design, cfg.threads)
    columns = [f'dir{j + 1}' for j in range(cfg.dim)]
    if cfg.reduce is not None:
        reduced = pd.DataFrame(data.X @ sol.Gamma, columns=columns)
        reduced.to_csv(cfg.resolve(cfg.reduce), index=False, float_format='%.17g')
    result = {
        'method': 'admm',
        'd': cfg.dim,
        'predictors': list(data.x_names),
        'basis': sol.Gamma.tolist(),
        'active_set': list(sol.active_set),
        'active_names': [data.x_names[j] for j in sol.active_set],
        'lambda': sol.lam,
        'converged': sol.converged,
        'objective_trace': list(sol.objective_trace),
        'path': sol.path.to_dict() if sol.path is not None else None,
    }
    tables = {'basis': pd.DataFrame(sol.Gamma, index=pd.Index(data.x_names, name='predictor'), columns=columns)}
    if sol.path is not None:
        tables['path'] = pd.DataFrame({'lambda': sol.path.grid, 'score': sol.path.scores})
    return _Outcome(result, sol.diagnostics, tables)


def _simulate(cfg: RunConfig) -> _Outcome:
    spec = SynthSpec(cfg.n, cfg.p, Model(cfg.model), cfg.q, noise_sd=cfg.noise_sd, x_dist=XDist(cfg.x_dist), seed=cfg.seed)
    sample = generate(spec)
    if cfg.data is not None:
        write_csv(sample.data, cfg.resolve(cfg.data))
    result: dict[str, Any] = {
        'model': spec.model.value,
        'd': spec.model.d,
        'true_basis': spec.basis.tolist(),
        'data': cfg.data,
        'recovery': None,
    }
    if cfg.replicates > 0:
        seeds = range(cfg.seed, cfg.seed + cfg.replicates)
        report = recovery_benchmark(spec, _estimator(cfg), seeds, cfg.d, cfg.threads)
        result['recovery'] = {
            'method': cfg.method,
            'seeds': list(report.seeds),
            'trace_correlation': list(report.correlations),
            'mean': report.mean,
            'sd': report.sd,
        }
    frame = pd.DataFrame(
        np.hstack([sample.data.X, sample.data.Y]),
        columns=list(sample.data.x_names) + list(sample.data.y_names),
    )
    return _Outcome(result, (), {'data': frame})


HANDLERS: Mapping[str, Callable[[RunConfig, Dataset], _Outcome]] = {
    'select-dim': _select_dim,
    'tune': _tune,
    'estimate': _estimate,
    'test-dim': _test_dim,
    'invfm': _invfm,
    'xire': _xire,
    'sparse': _sparse,
}


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    msg = f'Cannot serialise {type(value).__name__}'
    raise TypeError(msg)


def _dumps(document: Mapping[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, indent=2, default=_jsonable) + '\n'


def _write_tables(cfg: RunConfig, tables: Mapping[str, pd.DataFrame]) -> list[str]:
    primary = cfg.resolve(cfg.output or f'{cfg.command}.csv')
    written: list[str] = []
    for j, (name, frame) in enumerate(tables.items()):
        target = primary if j == 0 else primary.with_name(f'{primary.stem}.{name}.csv')
        frame.to_csv(target, index=frame.index.name is not None, float_format='%.17g')
        written.append(str(target))
    return written


def run(command: str, cfg: RunConfig) -> int:
    """
    .. admonition:: run

        Run one subcommand and write its artifacts. JSON goes to
        ``cfg.output`` or stdout. In CSV format the first table goes to
        ``cfg.output``, default ``<command>.csv``, and every further
        table to ``<stem>.<name>.csv`` beside it.

        :param command: Subcommand name.
        :param cfg: The resolved configuration.
        :returns: Exit status 0, errors propagate.

    """
    if command != cfg.command:
        cfg = replace(cfg, command=command)
    ingested: Ingested | None = None
    if command == 'simulate':
        outcome = _simulate(cfg)
    else:
        if cfg.input is None:
            msg = f'{command} needs an input file'
            raise ValueError(msg)
        ingested = ingest(cfg.input, cfg.response, cfg.delimiter)
        outcome = HANDLERS[command](cfg, ingested.data)

    for warning in outcome.warnings:
        logger.warning('%s: %s', command, warning)

    if cfg.output_format == OutputFormat.CSV:
        for target in _write_tables(cfg, outcome.tables):
            logger.info('Wrote %s', target)
        return 0

    document = {
        'schema': SCHEMA,
        'command': command,
        'config': cfg.to_dict(),
        'seed': cfg.seed,
        'input': ingested.to_dict() if ingested is not None else None,
        'result': outcome.result,
        'warnings': list(outcome.warnings),
    }
    text = _dumps(document)
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        cfg.resolve(cfg.output).write_text(text, encoding='utf-8')
    return 0


def _add_output(sub: argparse.ArgumentParser) -> None:
    sub.add_argument('--format', dest='output_format', choices=[f.value for f in OutputFormat])
    sub.add_argument('-o', '--output', help='output file, JSON to stdout if omitted')
    sub.add_argument('--seed', type=int, help=f'seed, default {DEFAULT_SEED}')


def _add_input(sub: argparse.ArgumentParser) -> None:
    sub.add_argument('input', help='CSV file with a header row')
    sub.add_argument('-r', '--response', help='response columns, names or 1-based positions, default last')
    sub.add_argument('--delimiter', help='field delimiter, default ","')
    _add_output(sub)


def _add_itm(sub: argparse.ArgumentParser, methods: Sequence[str]) -> None:
    sub.add_argument('--method', choices=methods)
    sub.add_argument('--space', choices=[s.value for s in Space])
    sub.add_argument('--density', choices=[dd.value for dd in Density])
    sub.add_argument('--sw2', type=float)
    sub.add_argument('--st2', type=float)
    sub.add_argument('--h', type=float)
    sub.add_argument('--threshold', type=float)


def _add_fourier(sub: argparse.ArgumentParser, *, scale_x: bool = True) -> None:
    sub.add_argument('--k', type=int, help='number of frequencies')
    if scale_x:
        sub.add_argument('--no-scale-x', dest='scale_x', action='store_false', default=None)
    sub.add_argument('--no-scale-y', dest='scale_y', action='store_false', default=None)


def _add_boot(sub: argparse.ArgumentParser) -> None:
    sub.add_argument('--B', type=int, help=f'bootstrap replicates, default {DEFAULT_B}')
    sub.add_argument('--window', type=int, help='moving average width of the valley rule')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='sdr-kit', description='Integral transformation dimension reduction.')
    parser.add_argument('-v', '--verbose', action='count', default=0)
    parser.add_argument('--threads', type=int, help=f'worker cap, default ${ENV_THREADS} or 1')
    parser.add_argument('--output-dir', help=f'base of relative output paths, default ${ENV_OUTPUT_DIR} or .')
    subs = parser.add_subparsers(dest='command', required=True)

    sub = subs.add_parser('select-dim', help='bootstrap selection of the dimension')
    _add_input(sub)
    _add_itm(sub, SELECT_METHODS)
    _add_fourier(sub)
    _add_boot(sub)
    sub.add_argument('--m', type=int, help='frequencies for xire and sparse')
    sub.add_argument('--lam', type=float)
    sub.add_argument('--kind', choices=[kk.value for kk in XireKind])
    sub.add_argument('--plot', help='also write the trace as CSV')

    sub = subs.add_parser('tune', help='bootstrap selection of d, sw2, st2 and h')
    _add_input(sub)
    _add_itm(sub, ('FM', 'CM'))
    _add_boot(sub)

    sub = subs.add_parser('estimate', help='FM, CM or IHT basis')
    _add_input(sub)
    _add_itm(sub, ESTIMATE_METHODS)
    sub.add_argument('--d', type=int)
    sub.add_argument('--reduce', help='write the reduced predictors X B as CSV')

    sub = subs.add_parser('test-dim', help='sequential dimension tests')
    _add_input(sub)
    _add_fourier(sub)
    sub.add_argument('--m', type=int, help='first hypothesized dimension, default 0')
    sub.add_argument('--level', type=float)
    sub.add_argument('--statistic', choices=[t.value for t in TestStatistic])
    sub.add_argument('--draws', type=int, help='Monte Carlo draws of the weighted test')

    sub = subs.add_parser('invfm', help='inverse Fourier basis')
    _add_input(sub)
    _add_fourier(sub)
    sub.add_argument('--d', type=int)
    sub.add_argument('--reduce')

    sub = subs.add_parser('xire', help='FT-IRE family basis')
    _add_input(sub)
    sub.add_argument('--kind', choices=[kk.value for kk in XireKind])
    sub.add_argument('--m', type=int, help='number of frequencies, default 10')
    sub.add_argument('--init', choices=INITS)
    sub.add_argument('--no-scale-y', dest='scale_y', action='store_false', default=None)
    sub.add_argument('--d', type=int)
    sub.add_argument('--reduce')

    sub = subs.add_parser('sparse', help='row sparse ADMM basis')
    _add_input(sub)
    sub.add_argument('--m', type=int, help='number of frequencies, default 30')
    sub.add_argument('--lam', type=float, help='penalty, cross validated if omitted')
    sub.add_argument('--no-scale-x', dest='scale_x', action='store_false', default=None)
    sub.add_argument('--no-scale-y', dest='scale_y', action='store_false', default=None)
    sub.add_argument('--d', type=int)
    sub.add_argument('--reduce')

    sub = subs.add_parser('simulate', help='synthetic sample and recovery benchmark')
    _add_output(sub)
    _add_itm(sub, SELECT_METHODS)
    _add_fourier(sub)
    sub.add_argument('--n', type=int)
    sub.add_argument('--p', type=int)
    sub.add_argument('--q', type=int)
    sub.add_argument('--model', choices=[mm.value for mm in Model])
    sub.add_argument('--noise-sd', dest='noise_sd', type=float)
    sub.add_argument('--x-dist', dest='x_dist', choices=[x.value for x in XDist])
    sub.add_argument('--data', help='write the sample as CSV')
    sub.add_argument('--replicates', type=int, help='recovery benchmark seeds, none by default')
    sub.add_argument('--m', type=int)
    sub.add_argument('--lam', type=float)
    sub.add_argument('--kind', choices=[kk.value for kk in XireKind])
    sub.add_argument('--d', type=int)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """
    .. admonition:: main

        :param argv: Arguments without the program name, ``sys.argv[1:]``
                     if ``None``.
        :returns: 0 on success, 2 on an input or estimator error.

    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=_LOG_LEVELS[min(args.verbose, len(_LOG_LEVELS) - 1)],
        format=_LOG_FORMAT,
        stream=sys.stderr,
    )
    try:
        cfg = RunConfig.from_args(args)
        return run(cfg.command, cfg)
    except (DimensionReductionError, ValueError, OSError) as err:
        logger.error('%s failed: %s', args.command, err)
        error = {'schema': SCHEMA, 'error': {'type': type(err).__name__, 'message': str(err)}}
        sys.stdout.write(_dumps(error))
        return 2
