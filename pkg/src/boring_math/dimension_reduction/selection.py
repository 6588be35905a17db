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
Bootstrap Selection
-------------------

.. admonition:: Dimension and tuning parameter selection

    For every candidate, a dimension ``d`` or a value of a tuning
    parameter, the subspace estimated from the full sample is compared
    with the subspaces estimated from ``B`` bootstrap resamples,

    ``D̄ = B⁻¹ Σ_b (1 - γ(Ŝ^{(b)}, Ŝ))``.

    - **dimension:** the valley point, the ``d`` minimizing ``D̄`` before
      the peak of the smoothed trace
    - **tuning parameter:** the grid value minimizing ``D̄``

    .. important::

       **Contract:** reproducible resampling

       - replicate ``b`` draws from its own Philox stream spawned from the seed
       - every candidate sees the same resamples
       - replicates are merged in index order whatever the worker count

"""

import logging
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import StrEnum
from os import PathLike
from typing import Any

import numpy as np
import numpy.typing as npt
import pandas as pd
from pythonic_fp.fptools.function import compose, partial

from .data_model import Dataset, FloatArray
from .density_scores import Density
from .errors import DimensionReductionError, ResampleFailure, SingularCovariance
from .estimators import BaseEstimator, ItmEstimator
from .estimators.itm_kernels import ItmConfig, Space
from .subspace import SubspaceBasis, subspace_distance

__all__ = [
    'DEFAULT_SEED',
    'DEFAULT_B',
    'MAX_REDRAWS',
    'SW2_GRID',
    'ST2_GRID',
    'H_GRID',
    'TuningTarget',
    'SelectionTrace',
    'valley_point',
    'select_dimension',
    'select_tuning',
    'TuningResult',
    'tune_protocol',
]

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20260917
DEFAULT_B = 50
MAX_REDRAWS = 10

SW2_GRID = tuple(round(0.05 + 0.01 * j, 2) for j in range(96))
ST2_GRID = tuple(round(0.1 * j, 1) for j in range(1, 11))
H_GRID = tuple(round(0.1 * j, 1) for j in range(1, 21))


class TuningTarget(StrEnum):
    SW2 = 'sw2'
    ST2 = 'st2'
    H = 'h'


@dataclass(frozen=True)
class SelectionTrace:
    """
    .. admonition:: selection trace

        :param candidates: Candidate values in the order they were tried.
        :param mean_distance: ``D̄`` for every candidate.
        :param B: Bootstrap replicates.
        :param chosen: The selected candidate.
        :param seed: Seed the resamples were drawn with.
        :param target: ``'d'`` or the tuning parameter name.
        :param peak: Peak of the smoothed trace, dimension traces only.
        :param notes: Remarks, ``'no peak'`` or failed candidates.

    """

    candidates: tuple[float, ...]
    mean_distance: tuple[float, ...]
    B: int
    chosen: float
    seed: int
    target: str = 'd'
    peak: float | None = None
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if len(self.candidates) != len(self.mean_distance):
            msg = 'Every candidate needs exactly one mean distance'
            raise ValueError(msg)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({self.target: list(self.candidates), 'mean_distance': list(self.mean_distance)})

    def to_dict(self) -> dict[str, Any]:
        return {
            'target': self.target,
            'candidates': list(self.candidates),
            'mean_distance': list(self.mean_distance),
            'B': self.B,
            'chosen': self.chosen,
            'peak': self.peak,
            'seed': self.seed,
            'notes': list(self.notes),
        }

    def to_csv(self, path: str | PathLike[str]) -> None:
        """
        .. admonition:: to csv

            Write the ``(candidate, D̄)`` pairs, one row per candidate, as
            data for a variability plot.

        """
        self.to_frame().to_csv(path, index=False, float_format='%.12g')


def _smooth(values: FloatArray, window: int) -> FloatArray:
    rolling = pd.Series(values).rolling(window, center=True, min_periods=1)
    return rolling.mean().to_numpy(dtype=np.float64)


def valley_point(trace: npt.ArrayLike, window: int = 3) -> tuple[int, int, str]:
    """
    .. admonition:: valley point

        Smooth the trace with a centered moving average, shorter at the
        ends, find the peak of the smoothed trace and return the position of
        the smallest raw value in front of it.

        :param trace: ``D̄`` values in candidate order.
        :param window: Odd moving average width, ``1`` disables smoothing.
        :returns: Index of the valley, index of the peak and a note, which
                  is ``'no peak'`` when the smoothed trace peaks at the first
                  candidate and the overall minimum is returned instead.
        :raises ValueError: If the trace is empty or the window not odd.

    """
    values = np.asarray(trace, dtype=np.float64).reshape(-1)
    if values.size == 0:
        msg = 'Cannot find the valley of an empty trace'
        raise ValueError(msg)
    if window < 1 or window % 2 == 0:
        msg = f'Smoothing window must be a positive odd integer, got {window}'
        raise ValueError(msg)
    peak = int(np.argmax(_smooth(values, window)))
    if peak == 0:
        return int(np.argmin(values)), peak, 'no peak'
    return int(np.argmin(values[:peak])), peak, ''


def _streams(seed: int, B: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(B)


def _resampled_fit(
    data: Dataset,
    estimator: BaseEstimator,
    dims: tuple[int, ...],
    job: tuple[int, np.random.SeedSequence],
) -> dict[int, SubspaceBasis] | None:
    b, stream = job
    rng = np.random.Generator(np.random.Philox(stream))
    for redraw in range(MAX_REDRAWS + 1):
        rows = rng.integers(0, data.n, size=data.n)
        try:
            return estimator.fit_path(data.take(rows), dims)
        except SingularCovariance:
            logger.debug('Replicate %d redraw %d, singular covariance', b, redraw + 1)
        except DimensionReductionError as err:
            logger.debug('Replicate %d failed: %s', b, err)
            return None
    raise ResampleFailure(b, MAX_REDRAWS)


def _distances(
    full: Mapping[int, SubspaceBasis],
    dims: tuple[int, ...],
    fits: dict[int, SubspaceBasis] | None,
) -> FloatArray:
    if fits is None:
        return np.ones(len(dims))
    out = np.empty(len(dims))
    for j, d in enumerate(dims):
        try:
            out[j] = subspace_distance(fits[d], full[d], d)
        except DimensionReductionError:
            out[j] = 1.0
    return out


def _mean_distances(
    data: Dataset,
    estimator: BaseEstimator,
    dims: tuple[int, ...],
    B: int,
    seed: int,
    workers: int,
) -> FloatArray:
    full = estimator.fit_path(data, dims)
    replicate = compose(
        partial(_resampled_fit, data, estimator, dims),
        partial(_distances, full, dims),
    )
    jobs = list(enumerate(_streams(seed, B)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(replicate, jobs))
    else:
        rows = [replicate(job) for job in jobs]
    return np.clip(np.mean(np.vstack(rows), axis=0), 0.0, 1.0)


def _as_estimator(estimator: BaseEstimator | ItmConfig, workers: int = 1) -> BaseEstimator:
    if isinstance(estimator, ItmConfig):
        return ItmEstimator(estimator, workers)
    return estimator


def _check_b(B: int) -> None:
    if B < 2:
        msg = f'Need at least 2 bootstrap replicates, got B={B}'
        raise ValueError(msg)


def select_dimension(
    data: Dataset,
    estimator: BaseEstimator | ItmConfig,
    B: int = DEFAULT_B,
    seed: int = DEFAULT_SEED,
    dims: Iterable[int] | None = None,
    window: int = 3,
    workers: int = 1,
) -> SelectionTrace:
    """
    .. admonition:: select dimension

        :param data: The sample.
        :param estimator: Estimator, an ``ItmConfig`` is wrapped in an
                          ``ItmEstimator``.
        :param B: Bootstrap replicates, at least 2.
        :param seed: Seed for the resamples.
        :param dims: Candidate dimensions, ``1, ..., p`` if ``None``.
        :param window: Moving average width for the valley rule.
        :param workers: Threads running bootstrap replicates.
        :returns: The trace with the valley point as the chosen dimension.
        :raises ResampleFailure: If a replicate stays singular after
                                 ``MAX_REDRAWS`` redraws.

    """
    _check_b(B)
    est = _as_estimator(estimator)
    candidates = tuple(dims) if dims is not None else tuple(range(1, data.p + 1))
    means = _mean_distances(data, est, candidates, B, seed, workers)
    valley, peak, note = valley_point(means, window)
    if note:
        logger.warning('Dimension trace of %s has %s, using the overall minimum', est.label, note)
    return SelectionTrace(
        candidates=tuple(float(d) for d in candidates),
        mean_distance=tuple(float(v) for v in means),
        B=B,
        chosen=float(candidates[valley]),
        seed=seed,
        target='d',
        peak=float(candidates[peak]),
        notes=(note,) if note else (),
    )


def select_tuning(
    data: Dataset,
    estimator: BaseEstimator | ItmConfig,
    target: TuningTarget | str,
    grid: Sequence[float],
    d: int,
    B: int = DEFAULT_B,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> SelectionTrace:
    """
    .. admonition:: select tuning

        :param data: The sample.
        :param estimator: Estimator with the tuning parameter.
        :param target: Name of the tuning parameter.
        :param grid: Positive candidate values.
        :param d: Fixed dimension.
        :param B: Bootstrap replicates, at least 2.
        :param seed: Seed for the resamples, shared by all grid values.
        :param workers: Threads running bootstrap replicates.
        :returns: The trace with the minimizing grid value as chosen, a
                  value whose estimator fails on the full sample gets
                  ``D̄ = 1``.

    """
    _check_b(B)
    if not grid:
        msg = 'Tuning grid is empty'
        raise ValueError(msg)
    if any(value <= 0.0 for value in grid):
        msg = 'Tuning grid values must be positive'
        raise ValueError(msg)
    name = str(target)
    est = _as_estimator(estimator)
    means: list[float] = []
    notes: list[str] = []
    for value in grid:
        tuned = est.with_param(name, value)
        try:
            means.append(float(_mean_distances(data, tuned, (d,), B, seed, workers)[0]))
        except ResampleFailure:
            raise
        except DimensionReductionError as err:
            logger.warning('%s=%g failed on the full sample: %s', name, value, err)
            notes.append(f'{name}={value:g}: {type(err).__name__}')
            means.append(1.0)
    best = int(np.argmin(means))
    return SelectionTrace(
        candidates=tuple(float(v) for v in grid),
        mean_distance=tuple(means),
        B=B,
        chosen=float(grid[best]),
        seed=seed,
        target=name,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class TuningResult:
    """
    .. admonition:: tuning result

        :param cfg: Configuration with every selected value filled in.
        :param d: Dimension chosen in the first stage.
        :param traces: Trace of every stage that ran, keyed by target.

    """

    cfg: ItmConfig
    d: int
    traces: Mapping[str, SelectionTrace]

    def to_dict(self) -> dict[str, Any]:
        return {
            'd': self.d,
            'sw2': self.cfg.sw2,
            'st2': self.cfg.st2,
            'h': self.cfg.h,
            'traces': {key: trace.to_dict() for key, trace in self.traces.items()},
        }


def tune_protocol(
    data: Dataset,
    cfg: ItmConfig | None = None,
    B: int = DEFAULT_B,
    seed: int = DEFAULT_SEED,
    sw2_grid: Sequence[float] = SW2_GRID,
    st2_grid: Sequence[float] = ST2_GRID,
    h_grid: Sequence[float] = H_GRID,
    window: int = 3,
    workers: int = 1,
) -> TuningResult:
    """
    .. admonition:: tune protocol

        Coordinate wise selection in four stages.

        1. the dimension with ``σu² = 0.1`` and ``σv² = 1``
        2. ``σu²`` at that dimension
        3. ``σv²``, central subspace only
        4. the bandwidth ``h``, kernel and elliptic densities only

        :param data: The sample.
        :param cfg: Recipe and starting values, the defaults if ``None``.
        :returns: The final configuration, dimension and stage traces.

    """
    cfg = replace(cfg or ItmConfig(), sw2=0.1, st2=1.0)
    traces: dict[str, SelectionTrace] = {}

    traces['d'] = select_dimension(data, cfg, B, seed, window=window, workers=workers)
    d = int(traces['d'].chosen)
    logger.info('Tuning stage d: chose %d', d)

    stages: list[tuple[TuningTarget, Sequence[float]]] = [(TuningTarget.SW2, sw2_grid)]
    if cfg.space is Space.PDF:
        stages.append((TuningTarget.ST2, st2_grid))
    if cfg.density is not Density.NORMAL:
        stages.append((TuningTarget.H, h_grid))

    for target, grid in stages:
        trace = select_tuning(data, cfg, target, grid, d, B, seed, workers)
        traces[target.value] = trace
        cfg = cfg.with_param(target.value, trace.chosen)
        logger.info('Tuning stage %s: chose %g', target.value, trace.chosen)

    return TuningResult(cfg, d, traces)
