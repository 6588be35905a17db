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
Synthetic Models
----------------

.. admonition:: Generators and reference implementations

    Samples from ``Y = g(BᵀX) + σε`` with a known basis ``B``, a naive
    double loop reference for the candidate matrices, and a small harness
    measuring subspace recovery over many seeds.

    +-----------------------+-------------------------------------+-----+
    | model                 | ``g(t)``                            | d   |
    +=======================+=====================================+=====+
    | linear                | ``t1``                              | 1   |
    +-----------------------+-------------------------------------+-----+
    | cubic_single_index    | ``t1³``                             | 1   |
    +-----------------------+-------------------------------------+-----+
    | double_index          | ``t1³ + |t2|``                      | 2   |
    +-----------------------+-------------------------------------+-----+
    | sparse_support        | ``(√2 t1)³``                        | 1   |
    +-----------------------+-------------------------------------+-----+
    | rational_double_index | ``t1 / (0.5 + (t2 + 1.5)²)``        | 2   |
    +-----------------------+-------------------------------------+-----+

    The default bases are ``e1`` for the single index models, ``(e1, e2)``
    for the double index models and ``(e1 + e2)/√2`` for the sparse model,
    which makes its response ``(x1 + x2)³``.

"""

import logging
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import StrEnum
from os import PathLike

import numpy as np
import pandas as pd
from pythonic_fp.fptools.function import partial

from .data_model import CandidateMatrix, Dataset, FloatArray, StandardizedSample
from .density_scores import ScoreField
from .estimators import BaseEstimator
from .estimators.itm_kernels import ItmConfig, pair_kernel
from .subspace import full_rank, trace_correlation

__all__ = [
    'Model',
    'XDist',
    'SynthSpec',
    'SyntheticSample',
    'generate',
    'oracle_candidate',
    'write_csv',
    'RecoveryReport',
    'recovery_benchmark',
]

logger = logging.getLogger(__name__)


class Model(StrEnum):
    LINEAR = 'linear'
    CUBIC_SINGLE_INDEX = 'cubic_single_index'
    DOUBLE_INDEX = 'double_index'
    SPARSE_SUPPORT = 'sparse_support'
    RATIONAL_DOUBLE_INDEX = 'rational_double_index'

    @property
    def d(self) -> int:
        return 2 if self in (Model.DOUBLE_INDEX, Model.RATIONAL_DOUBLE_INDEX) else 1


class XDist(StrEnum):
    NORMAL = 'normal'
    ELLIPTIC_T = 'elliptic_t'
    UNIFORM = 'uniform'


def _default_basis(model: Model, p: int) -> FloatArray:
    B = np.zeros((p, model.d))
    if model is Model.SPARSE_SUPPORT:
        B[:2, 0] = 1.0 / np.sqrt(2.0)
    else:
        B[np.arange(model.d), np.arange(model.d)] = 1.0
    return B


@dataclass(frozen=True, eq=False)
class SynthSpec:
    """
    .. admonition:: synthetic model

        :param n: Sample size.
        :param p: Number of predictors.
        :param model: Link function.
        :param q: Number of response columns, each with its own noise.
        :param true_basis: ``p×d`` basis, the model default if ``None``.
        :param noise_sd: Noise standard deviation ``σ``.
        :param x_dist: Predictor distribution, every one with identity
                       covariance.
        :param seed: Seed for ``numpy.random.default_rng``.
        :param basis: The validated ``p×d`` basis, set on construction.

    """

    n: int
    p: int
    model: Model = Model.LINEAR
    q: int = 1
    true_basis: FloatArray | None = None
    noise_sd: float = 0.1
    x_dist: XDist = XDist.NORMAL
    seed: int | None = 0
    basis: FloatArray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, 'model', Model(self.model))
        object.__setattr__(self, 'x_dist', XDist(self.x_dist))
        if self.n < 2 or self.p < 1 or self.q < 1:
            msg = f'Invalid sizes n={self.n}, p={self.p}, q={self.q}'
            raise ValueError(msg)
        if self.noise_sd < 0.0:
            msg = f'Noise standard deviation must be nonnegative, got {self.noise_sd}'
            raise ValueError(msg)
        if self.true_basis is None:
            if self.p < max(self.model.d, 2 if self.model is Model.SPARSE_SUPPORT else 1):
                msg = f'Model {self.model} needs more than p={self.p} predictors'
                raise ValueError(msg)
            B = _default_basis(self.model, self.p)
        else:
            B = np.array(self.true_basis, dtype=np.float64, ndmin=2)
            if B.shape[0] == 1 and self.p > 1:
                B = B.T
        if B.shape != (self.p, self.model.d):
            msg = f'True basis has shape {B.shape}, model {self.model} needs {(self.p, self.model.d)}'
            raise ValueError(msg)
        B = full_rank(B, 'true_basis')
        B.setflags(write=False)
        object.__setattr__(self, 'true_basis', B)
        object.__setattr__(self, 'basis', B)

    def reseeded(self, seed: int) -> 'SynthSpec':
        return replace(self, seed=seed)


@dataclass(frozen=True, eq=False)
class SyntheticSample:
    data: Dataset
    true_basis: FloatArray
    spec: SynthSpec


def _predictors(rng: np.random.Generator, n: int, p: int, x_dist: XDist) -> FloatArray:
    match x_dist:
        case XDist.NORMAL:
            return rng.standard_normal((n, p))
        case XDist.ELLIPTIC_T:
            df = 5.0
            radial = np.sqrt(rng.chisquare(df, size=n) / df)
            return rng.standard_normal((n, p)) / radial[:, np.newaxis] * np.sqrt((df - 2.0) / df)
        case XDist.UNIFORM:
            root3 = np.sqrt(3.0)
            return rng.uniform(-root3, root3, size=(n, p))


def _link(model: Model, T: FloatArray) -> FloatArray:
    t1 = T[:, 0]
    match model:
        case Model.LINEAR:
            return t1
        case Model.CUBIC_SINGLE_INDEX:
            return t1**3
        case Model.DOUBLE_INDEX:
            return t1**3 + np.abs(T[:, 1])
        case Model.SPARSE_SUPPORT:
            return (np.sqrt(2.0) * t1) ** 3
        case Model.RATIONAL_DOUBLE_INDEX:
            return t1 / (0.5 + (T[:, 1] + 1.5) ** 2)


def generate(spec: SynthSpec) -> SyntheticSample:
    """
    .. admonition:: generate

        :param spec: The model.
        :returns: Dataset and true basis, identical for identical specs.

    """
    rng = np.random.default_rng(spec.seed)
    X = _predictors(rng, spec.n, spec.p, spec.x_dist)
    signal = _link(spec.model, X @ spec.basis)
    Y = signal[:, np.newaxis] + spec.noise_sd * rng.standard_normal((spec.n, spec.q))
    return SyntheticSample(Dataset(X, Y), spec.basis, spec)


def oracle_candidate(sample: StandardizedSample, scores: ScoreField, cfg: ItmConfig) -> CandidateMatrix:
    """
    .. admonition:: oracle candidate

        Reference candidate matrix from the plain double loop over every
        pair of observations.

        :param sample: Standardized sample with a univariate response.
        :param scores: Scores of the whitened predictors.
        :param cfg: Recipe and tuning parameters.
        :returns: ``n⁻² Σᵢ Σⱼ Û(zᵢ, zⱼ) Îᵢ Îⱼ``.

    """
    kernel = pair_kernel(cfg.recipe)
    Z = sample.Z
    y = sample.response(cfg.raw_y)[:, 0]
    g, ind = scores.g, scores.indicator
    n, p = Z.shape
    M = np.zeros((p, p))
    for i in range(n):
        if not ind[i]:
            continue
        for j in range(n):
            if not ind[j]:
                continue
            M += kernel(Z[i], Z[j], y[i], y[j], g[i], g[j], cfg.sw2, cfg.st2)
    M /= n * n
    return CandidateMatrix((M + M.T) / 2, cfg.recipe, cfg.density, scores.diagnostics())


def write_csv(data: Dataset, path: str | PathLike[str]) -> None:
    """
    .. admonition:: write csv

        Predictor columns first, then the response columns, with enough
        digits to read back every value exactly.

    """
    frame = pd.DataFrame(
        np.hstack([data.X, data.Y]),
        columns=list(data.x_names) + list(data.y_names),
    )
    frame.to_csv(path, index=False, float_format='%.17g')


@dataclass(frozen=True)
class RecoveryReport:
    """
    .. admonition:: recovery report

        :param seeds: Seeds of the replications.
        :param correlations: Trace correlation with the true basis per seed.

    """

    seeds: tuple[int, ...]
    correlations: tuple[float, ...] = field(default=())

    @property
    def mean(self) -> float:
        return float(np.mean(self.correlations))

    @property
    def sd(self) -> float:
        return float(np.std(self.correlations, ddof=1)) if len(self.correlations) > 1 else 0.0


def _recovery(spec: SynthSpec, estimator: BaseEstimator, d: int, seed: int) -> float:
    sample = generate(spec.reseeded(seed))
    return trace_correlation(estimator.fit(sample.data, d), sample.true_basis)


def recovery_benchmark(
    spec: SynthSpec,
    estimator: BaseEstimator,
    seeds: Iterable[int],
    d: int | None = None,
    workers: int = 1,
) -> RecoveryReport:
    """
    .. admonition:: recovery benchmark

        :param spec: The model, its seed is replaced by each of ``seeds``.
        :param estimator: Estimator under test.
        :param seeds: Seeds of the replications.
        :param d: Dimension to estimate, the model dimension if ``None``.
        :param workers: Threads running replications.
        :returns: Per seed trace correlations, in seed order.

    """
    seeds = tuple(seeds)
    dim = spec.model.d if d is None else d
    run = partial(_recovery, spec, estimator, dim)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(run, seeds))
    else:
        values = [run(seed) for seed in seeds]
    report = RecoveryReport(seeds, tuple(values))
    logger.info('%s recovery over %d seeds: mean %.4f', estimator.label, len(seeds), report.mean)
    return report
