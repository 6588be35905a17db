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
Iterative Hessian Transformation
--------------------------------

.. admonition:: COZY vectors

    With whitened predictors ``z`` the moments

    - ``Γ̂_yz = n⁻¹ Σ yᵢ zᵢ``
    - ``Σ̂_yzz = n⁻¹ Σ yᵢ zᵢ zᵢᵀ``

    generate the Krylov matrix ``M̂ = (Γ̂_yz, Σ̂_yzz Γ̂_yz, ..., Σ̂_yzz^{p-1} Γ̂_yz)``
    of COZY vectors. The leading eigenvectors of ``Ψ̂ = M̂ M̂ᵀ``, back
    transformed by ``Σ̂^{-1/2}``, estimate the central mean subspace.

    .. caution::

       Raw matrix powers overflow or underflow once ``p`` gets into the
       twenties. By default every column is rescaled to unit length before
       the next power is taken, which leaves the Krylov spaces unchanged.

"""

import logging
from collections.abc import Iterable
from dataclasses import dataclass, replace

import numpy as np
import numpy.typing as npt

from ..data_model import CandidateMatrix, Dataset, FloatArray, Recipe, StandardizedSample, standardize
from ..errors import ZeroCozy
from ..subspace import SubspaceBasis, extract_basis
from . import BaseEstimator

__all__ = [
    'ZERO_COZY_TOL',
    'IhtState',
    'iht_moments',
    'cozy_matrix',
    'iht_estimate',
    'IhtEstimator',
]

logger = logging.getLogger(__name__)

ZERO_COZY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class IhtState:
    """
    .. admonition:: IHT state

        :param gamma_yz: First COZY vector ``Γ̂_yz``.
        :param sigma_yzz: Response weighted second moment ``Σ̂_yzz``.
        :param M: COZY matrix, ``None`` until built.
        :param Psi: ``M̂ M̂ᵀ``, ``None`` until built.

    """

    gamma_yz: FloatArray
    sigma_yzz: FloatArray
    M: FloatArray | None = None
    Psi: FloatArray | None = None


def _response(sample: StandardizedSample, y: npt.ArrayLike | None) -> FloatArray:
    if y is None:
        Y = sample.response(raw=True)
        if Y.shape[1] != 1:
            msg = f'IHT needs a univariate response, got q={Y.shape[1]}'
            raise ValueError(msg)
        return Y[:, 0]
    yv = np.asarray(y, dtype=np.float64).reshape(-1)
    if yv.size != sample.n:
        msg = f'Response has {yv.size} entries, sample has {sample.n} rows'
        raise ValueError(msg)
    return yv


def iht_moments(sample: StandardizedSample, y: npt.ArrayLike | None = None) -> IhtState:
    """
    .. admonition:: IHT moments

        :param sample: Standardized sample.
        :param y: Univariate response, the raw sample response when ``None``.
        :returns: State holding ``Γ̂_yz`` and ``Σ̂_yzz`` only.

    """
    yv = _response(sample, y)
    Z = sample.Z
    n = sample.n
    return IhtState(
        gamma_yz=Z.T @ yv / n,
        sigma_yzz=(Z * yv[:, np.newaxis]).T @ Z / n,
    )


def cozy_matrix(state: IhtState, normalize: bool = True) -> IhtState:
    """
    .. admonition:: COZY matrix

        :param state: State with the moments.
        :param normalize: Rescale each column to unit length before taking
                          the next power.
        :returns: State with ``M`` and ``Psi`` filled in.
        :raises ZeroCozy: If ``‖Γ̂_yz‖ < ZERO_COZY_TOL``.

    """
    gamma = state.gamma_yz
    S = state.sigma_yzz
    if (norm := float(np.linalg.norm(gamma))) < ZERO_COZY_TOL:
        msg = f'First COZY vector vanishes, norm {norm:.3g}'
        raise ZeroCozy(msg)
    p = gamma.size
    M = np.zeros((p, p))
    M[:, 0] = gamma / norm if normalize else gamma
    for j in range(1, p):
        col = S @ M[:, j - 1]
        if normalize:
            if (col_norm := float(np.linalg.norm(col))) < ZERO_COZY_TOL:
                break
            col = col / col_norm
        M[:, j] = col
    Psi = M @ M.T
    return replace(state, M=M, Psi=(Psi + Psi.T) / 2)


def iht_estimate(
    sample: StandardizedSample,
    y: npt.ArrayLike | None,
    d: int,
    normalize: bool = True,
) -> SubspaceBasis:
    """
    .. admonition:: IHT estimate

        :param sample: Standardized sample.
        :param y: Univariate response, the raw sample response when ``None``.
        :param d: Dimension.
        :param normalize: Normalize the COZY columns.
        :returns: Leading ``d`` eigenvectors of ``Ψ̂`` in the original scale.
        :raises ZeroCozy: If the first COZY vector vanishes.
        :raises DimensionOutOfRange: Unless ``1 <= d <= p``.

    """
    state = cozy_matrix(iht_moments(sample, y), normalize)
    psi = CandidateMatrix(state.Psi, Recipe.IHT_PSI)
    return extract_basis(psi.M, d, sample.sigma_inv_sqrt, 'iht')


@dataclass(frozen=True)
class IhtEstimator(BaseEstimator):
    """
    .. admonition:: IHT estimator

        :param standardize_y: Standardize the response before the moments,
                              by default the response is used as given.
        :param normalize: Normalize the COZY columns.

    """

    standardize_y: bool = False
    normalize: bool = True

    @property
    def label(self) -> str:
        return 'iht'

    def _sample(self, data: Dataset) -> tuple[StandardizedSample, FloatArray]:
        if data.q != 1:
            msg = f'IHT needs a univariate response, got q={data.q}'
            raise ValueError(msg)
        sample = standardize(data, standardize_y=True)
        return sample, sample.response(raw=not self.standardize_y)[:, 0]

    def fit(self, data: Dataset, d: int) -> SubspaceBasis:
        sample, y = self._sample(data)
        return iht_estimate(sample, y, d, self.normalize)

    def fit_path(self, data: Dataset, dims: Iterable[int]) -> dict[int, SubspaceBasis]:
        sample, y = self._sample(data)
        state = cozy_matrix(iht_moments(sample, y), self.normalize)
        return {d: extract_basis(state.Psi, d, sample.sigma_inv_sqrt, self.label) for d in dims}

