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
Integral Transformation Candidate Matrices
------------------------------------------

.. admonition:: Fourier and convolution candidate matrices

    With whitened predictors ``z``, scores ``g`` and ``u = z1 - z2`` every
    pair of observations contributes

    ``Û = w · [a I + (g1 - a u)(g2 + a u)ᵀ]``

    +--------+-------------------------------------------+-------------+
    | recipe | weight ``w``                              | ``a``       |
    +========+===========================================+=============+
    | FMM    | ``y1 y2 exp(-σu²‖u‖²/2)``                 | ``σu²``     |
    +--------+-------------------------------------------+-------------+
    | FMC    | ``exp(-σu²‖u‖²/2 - σv² v²/2)``            | ``σu²``     |
    +--------+-------------------------------------------+-------------+
    | CMM    | ``y1 y2 exp(-‖u‖²/(4σu²))``               | ``1/(2σu²)``|
    +--------+-------------------------------------------+-------------+
    | CMC    | ``exp(-‖u‖²/(4σu²) - v²/(4σv²))``         | ``1/(2σu²)``|
    +--------+-------------------------------------------+-------------+

    where ``v = y1 - y2``. The sample candidate matrix is
    ``M̂ = n⁻² Σᵢ Σⱼ Û(zᵢ, zⱼ) Îᵢ Îⱼ``, diagonal pairs included.

    .. note::

        With ``αᵢ = gᵢ - a zᵢ`` a pair term expands to
        ``w (a I + αᵢαⱼᵀ + a αᵢzᵢᵀ + a zⱼαⱼᵀ + a² zⱼzᵢᵀ)``. Summing the
        five pieces needs only ``n×n`` weights and ``n×p`` products, the
        weights are formed a block of rows at a time.

    .. important::

       **Contract:** reproducible accumulation

       - row blocks are reduced in index order whatever the worker count
       - the result is symmetrized once, at the end

"""

import logging
from concurrent.futures import ThreadPoolExecutor
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field, replace
from enum import StrEnum
from typing import Self

import numpy as np
import numpy.typing as npt
from pythonic_fp.fptools.function import compose, partial
from scipy.spatial.distance import cdist

from ..data_model import (
    CandidateMatrix,
    Dataset,
    FloatArray,
    Recipe,
    StandardizedSample,
    standardize,
)
from ..density_scores import Density, ScoreField, score_field
from ..errors import AllPointsTrimmed
from ..subspace import SubspaceBasis, extract_basis
from . import BaseEstimator

__all__ = [
    'Space',
    'Method',
    'ItmConfig',
    'pair_kernel_fmm',
    'pair_kernel_fmc',
    'pair_kernel_cmm',
    'pair_kernel_cmc',
    'pair_kernel',
    'build_candidate',
    'ItmEstimator',
]

logger = logging.getLogger(__name__)

BLOCK_ROWS = 256


class Space(StrEnum):
    MEAN = 'mean'
    PDF = 'pdf'


class Method(StrEnum):
    FM = 'FM'
    CM = 'CM'


@dataclass(frozen=True)
class ItmConfig:
    """
    .. admonition:: ITM configuration

        :param space: ``mean`` targets the central mean subspace, ``pdf``
                      the central subspace.
        :param method: ``FM`` Fourier or ``CM`` convolution weights.
        :param sw2: Predictor tuning parameter ``σu²``.
        :param st2: Response tuning parameter ``σv²``, central subspace only.
        :param density: Predictor density assumption.
        :param h: Bandwidth for the kernel and elliptic assumptions.
        :param threshold: Trimming threshold, ``None`` for the default.
        :param raw_y: Use the response as given instead of standardized.
        :raises ValueError: If a tuning parameter is not positive.

    """

    space: Space = Space.MEAN
    method: Method = Method.FM
    sw2: float = 0.1
    st2: float = 1.0
    density: Density = Density.NORMAL
    h: float = 1.0
    threshold: float | None = None
    raw_y: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, 'space', Space(self.space))
        object.__setattr__(self, 'method', Method(self.method))
        object.__setattr__(self, 'density', Density(self.density))
        for name in ('sw2', 'st2', 'h'):
            if not getattr(self, name) > 0.0:
                msg = f'{name} must be positive, got {getattr(self, name)}'
                raise ValueError(msg)

    @property
    def recipe(self) -> Recipe:
        return Recipe(f'{self.method}{"M" if self.space is Space.MEAN else "C"}')

    def with_param(self, name: str, value: float) -> Self:
        if name not in ('sw2', 'st2', 'h'):
            msg = f'Unknown ITM tuning parameter {name!r}'
            raise ValueError(msg)
        return replace(self, **{name: float(value)})


def _coefficient(recipe: Recipe, sw2: float) -> float:
    return sw2 if recipe in (Recipe.FMM, Recipe.FMC) else 1.0 / (2.0 * sw2)


def _log_weight(recipe: Recipe, sq_u: npt.ArrayLike, v: npt.ArrayLike, sw2: float, st2: float) -> FloatArray:
    sq_u = np.asarray(sq_u, dtype=np.float64)
    v2 = np.square(np.asarray(v, dtype=np.float64))
    match recipe:
        case Recipe.FMM:
            return -0.5 * sw2 * sq_u
        case Recipe.FMC:
            return -0.5 * sw2 * sq_u - 0.5 * st2 * v2
        case Recipe.CMM:
            return -sq_u / (4.0 * sw2)
        case Recipe.CMC:
            return -sq_u / (4.0 * sw2) - v2 / (4.0 * st2)
        case _:
            msg = f'{recipe} is not a pairwise kernel recipe'
            raise ValueError(msg)


def _pair(
    recipe: Recipe,
    z1: npt.ArrayLike,
    z2: npt.ArrayLike,
    y1: float,
    y2: float,
    g1: npt.ArrayLike,
    g2: npt.ArrayLike,
    sw2: float,
    st2: float,
) -> FloatArray:
    z1, z2 = np.atleast_1d(np.asarray(z1, dtype=np.float64)), np.atleast_1d(np.asarray(z2, dtype=np.float64))
    g1, g2 = np.atleast_1d(np.asarray(g1, dtype=np.float64)), np.atleast_1d(np.asarray(g2, dtype=np.float64))
    u = z1 - z2
    a = _coefficient(recipe, sw2)
    w = float(np.exp(_log_weight(recipe, u @ u, y1 - y2, sw2, st2)))
    if recipe in (Recipe.FMM, Recipe.CMM):
        w *= y1 * y2
    return w * (a * np.eye(u.size) + np.outer(g1 - a * u, g2 + a * u))


type PairKernel = Callable[
    [npt.ArrayLike, npt.ArrayLike, float, float, npt.ArrayLike, npt.ArrayLike, float, float],
    FloatArray,
]


def pair_kernel_fmm(
    z1: npt.ArrayLike,
    z2: npt.ArrayLike,
    y1: float,
    y2: float,
    g1: npt.ArrayLike,
    g2: npt.ArrayLike,
    sw2: float,
    st2: float = 1.0,
) -> FloatArray:
    """
    .. admonition:: FMM pair kernel

        :param z1: First whitened predictor.
        :param z2: Second whitened predictor.
        :param y1: First response.
        :param y2: Second response.
        :param g1: Score at ``z1``.
        :param g2: Score at ``z2``.
        :param sw2: Predictor tuning parameter ``σu²``.
        :param st2: Unused, kept so all four kernels share a signature.
        :returns: ``y1 y2 exp(-σu²‖u‖²/2) [σu² I + (g1 - σu² u)(g2 + σu² u)ᵀ]``.

    """
    return _pair(Recipe.FMM, z1, z2, y1, y2, g1, g2, sw2, st2)


def pair_kernel_fmc(
    z1: npt.ArrayLike,
    z2: npt.ArrayLike,
    y1: float,
    y2: float,
    g1: npt.ArrayLike,
    g2: npt.ArrayLike,
    sw2: float,
    st2: float = 1.0,
) -> FloatArray:
    """FMC pair kernel, the response enters only through ``v = y1 - y2``."""
    return _pair(Recipe.FMC, z1, z2, y1, y2, g1, g2, sw2, st2)


def pair_kernel_cmm(
    z1: npt.ArrayLike,
    z2: npt.ArrayLike,
    y1: float,
    y2: float,
    g1: npt.ArrayLike,
    g2: npt.ArrayLike,
    sw2: float,
    st2: float = 1.0,
) -> FloatArray:
    return _pair(Recipe.CMM, z1, z2, y1, y2, g1, g2, sw2, st2)


def pair_kernel_cmc(
    z1: npt.ArrayLike,
    z2: npt.ArrayLike,
    y1: float,
    y2: float,
    g1: npt.ArrayLike,
    g2: npt.ArrayLike,
    sw2: float,
    st2: float = 1.0,
) -> FloatArray:
    return _pair(Recipe.CMC, z1, z2, y1, y2, g1, g2, sw2, st2)


_PAIR_KERNELS: dict[Recipe, PairKernel] = {
    Recipe.FMM: pair_kernel_fmm,
    Recipe.FMC: pair_kernel_fmc,
    Recipe.CMM: pair_kernel_cmm,
    Recipe.CMC: pair_kernel_cmc,
}


def pair_kernel(recipe: Recipe) -> PairKernel:
    """
    .. admonition:: pair kernel

        :param recipe: One of the four pairwise recipes.
        :returns: The scalar pair kernel implementing it.
        :raises KeyError: For the non pairwise recipes.

    """
    return _PAIR_KERNELS[Recipe(recipe)]


@dataclass(frozen=True, eq=False)
class _Block:
    total: float
    aa: FloatArray
    az: FloatArray
    zz: FloatArray
    col: FloatArray


def _block_sums(
    recipe: Recipe,
    Z: FloatArray,
    A: FloatArray,
    y: FloatArray,
    ind: FloatArray,
    cfg: ItmConfig,
    rows: slice,
) -> _Block:
    a = _coefficient(recipe, cfg.sw2)
    sq = cdist(Z[rows], Z, 'sqeuclidean')
    v = y[rows, np.newaxis] - y[np.newaxis, :]
    W = np.exp(_log_weight(recipe, sq, v, cfg.sw2, cfg.st2))
    W *= ind[rows, np.newaxis] * ind[np.newaxis, :]
    if recipe in (Recipe.FMM, Recipe.CMM):
        W *= y[rows, np.newaxis] * y[np.newaxis, :]
    r = W.sum(axis=1)
    return _Block(
        total=float(r.sum()),
        aa=A[rows].T @ (W @ A),
        az=a * (A[rows].T @ (r[:, np.newaxis] * Z[rows])),
        zz=a * a * ((W @ Z).T @ Z[rows]),
        col=W.sum(axis=0),
    )


def build_candidate(
    sample: StandardizedSample,
    scores: ScoreField,
    cfg: ItmConfig,
    *,
    block_rows: int = BLOCK_ROWS,
    workers: int = 1,
) -> CandidateMatrix:
    """
    .. admonition:: build candidate

        :param sample: Standardized sample with a univariate response.
        :param scores: Scores of the whitened predictors.
        :param cfg: Recipe and tuning parameters.
        :param block_rows: Rows of the weight matrix formed at a time.
        :param workers: Threads evaluating row blocks.
        :returns: The candidate matrix ``M̂``.
        :raises ValueError: If the density assumptions disagree or the
                            response is not univariate.
        :raises AllPointsTrimmed: If every indicator is zero.

    """
    if scores.assumption is not cfg.density:
        msg = f'Scores assume {scores.assumption}, configuration assumes {cfg.density}'
        raise ValueError(msg)
    Yr = sample.response(cfg.raw_y)
    if Yr.shape[1] != 1:
        msg = f'Candidate matrices need a univariate response, got q={Yr.shape[1]}'
        raise ValueError(msg)
    ind = np.asarray(scores.indicator, dtype=np.float64)
    if not np.any(ind):
        msg = 'Every point was trimmed by the low density indicator'
        raise AllPointsTrimmed(msg)

    recipe = cfg.recipe
    Z = np.asarray(sample.Z, dtype=np.float64)
    y = Yr[:, 0]
    n, p = Z.shape
    a = _coefficient(recipe, cfg.sw2)
    A = scores.g - a * Z

    blocks = [slice(lo, min(lo + block_rows, n)) for lo in range(0, n, block_rows)]
    run = partial(_block_sums, recipe, Z, A, y, ind, cfg)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(rows) for rows in blocks]

    total, M, col = 0.0, np.zeros((p, p)), np.zeros(n)
    for part in parts:
        total += part.total
        M += part.aa + part.az + part.zz
        col += part.col
    M += a * (Z.T @ (col[:, np.newaxis] * A))
    M += a * total * np.eye(p)
    M /= n * n

    if scores.trimmed:
        logger.info('%d of %d points trimmed from the candidate matrix', scores.trimmed, n)
    return CandidateMatrix(
        M=(M + M.T) / 2,
        recipe=recipe,
        density=cfg.density,
        diagnostics=scores.diagnostics(),
    )


def _predictors(sample: StandardizedSample) -> FloatArray:
    return sample.Z


@dataclass(frozen=True)
class ItmEstimator(BaseEstimator):
    """
    .. admonition:: ITM estimator

        Standardize, estimate scores, build the candidate matrix and keep
        its leading eigenvectors.

        :param cfg: Recipe and tuning parameters.
        :param workers: Threads used for the pairwise sums.

    """

    cfg: ItmConfig = field(default_factory=ItmConfig)
    workers: int = 1

    @property
    def label(self) -> str:
        return f'{self.cfg.method}-{self.cfg.space}'

    def candidate(self, data: Dataset) -> tuple[CandidateMatrix, StandardizedSample]:
        """
        .. admonition:: candidate

            :param data: The sample.
            :returns: The candidate matrix and the standardized sample.

        """
        cfg = self.cfg
        sample = standardize(data, standardize_y=True)
        scores = compose(_predictors, partial(score_field, cfg.density, cfg.h, cfg.threshold))
        M = build_candidate(sample, scores(sample), cfg, workers=self.workers)
        return M, sample

    def fit(self, data: Dataset, d: int) -> SubspaceBasis:
        return self.fit_path(data, (d,))[d]

    def fit_path(self, data: Dataset, dims: Iterable[int]) -> dict[int, SubspaceBasis]:
        M, sample = self.candidate(data)
        return {
            d: extract_basis(M.M, d, sample.sigma_inv_sqrt, self.label).with_diagnostics(
                *M.diagnostics
            )
            for d in dims
        }

    def with_param(self, name: str, value: float) -> Self:
        return replace(self, cfg=self.cfg.with_param(name, value))
