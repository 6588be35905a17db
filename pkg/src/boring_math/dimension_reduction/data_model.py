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
Data Model
----------

.. admonition:: Datasets and their standardization

    A ``Dataset`` pairs an ``n×p`` predictor matrix with an ``n×q``
    response matrix. Standardizing it produces a ``StandardizedSample``
    holding the whitened predictors ``Z = Σ̂^{-1/2}(x - x̄)`` together with
    everything needed to map estimates back to the original scale.

    .. important::

       **Contract:** conventions shared by every estimator

       - sample covariances use the divisor ``n - 1``
       - an eigenvalue below ``RANK_TOL`` times the largest one is singular
       - ``Σ̂^{-1/2}`` is the symmetric root from an eigendecomposition

    Both types are immutable, their arrays are marked read only.

"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING, Self

import numpy as np
import numpy.typing as npt
from scipy import linalg

from .errors import SingularCovariance

if TYPE_CHECKING:
    from .density_scores import Density

__all__ = [
    'FloatArray',
    'RANK_TOL',
    'Dataset',
    'StandardizedSample',
    'Recipe',
    'CandidateMatrix',
    'sample_covariance',
    'inverse_sqrt',
    'standardize',
    'scale_columns',
]

logger = logging.getLogger(__name__)

type FloatArray = npt.NDArray[np.float64]

RANK_TOL = 1e-10


def _frozen(a: npt.ArrayLike, *, ndmin: int = 2) -> FloatArray:
    arr = np.array(a, dtype=np.float64, ndmin=ndmin, copy=True)
    arr.flags.writeable = False
    return arr


def _column_matrix(a: npt.ArrayLike) -> FloatArray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, np.newaxis]
    if arr.ndim != 2:
        msg = f'Expected a vector or a matrix, got {arr.ndim} dimensions'
        raise ValueError(msg)
    return _frozen(arr)


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    .. admonition:: dataset

        Predictors ``X`` (``n×p``) paired with responses ``Y`` (``n×q``).

        :param X: Predictor matrix, a vector is taken as one column.
        :param Y: Response matrix, a vector is taken as one column.
        :param x_names: Optional predictor labels, default ``x1, x2, ...``.
        :param y_names: Optional response labels, default ``y1, y2, ...``.
        :raises ValueError: If ``n < 2``, row counts differ, an entry is
                            not finite or the label counts are wrong.

    """

    X: FloatArray
    Y: FloatArray
    x_names: tuple[str, ...] = ()
    y_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        X = _column_matrix(self.X)
        Y = _column_matrix(self.Y)
        if (n := X.shape[0]) != Y.shape[0]:
            msg = f'X has {n} rows but Y has {Y.shape[0]}'
            raise ValueError(msg)
        if n < 2:
            msg = f'A dataset needs at least 2 rows, got {n}'
            raise ValueError(msg)
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            msg = 'Dataset entries must all be finite'
            raise ValueError(msg)
        x_names = tuple(self.x_names) or tuple(f'x{j + 1}' for j in range(X.shape[1]))
        y_names = tuple(self.y_names) or tuple(f'y{j + 1}' for j in range(Y.shape[1]))
        if len(x_names) != X.shape[1] or len(y_names) != Y.shape[1]:
            msg = 'Number of column labels does not match the data'
            raise ValueError(msg)
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'Y', Y)
        object.__setattr__(self, 'x_names', x_names)
        object.__setattr__(self, 'y_names', y_names)

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def p(self) -> int:
        return int(self.X.shape[1])

    @property
    def q(self) -> int:
        return int(self.Y.shape[1])

    def take(self, rows: Sequence[int] | npt.NDArray[np.intp]) -> Self:
        """
        .. admonition:: take

            :param rows: Row indices, repeats allowed.
            :returns: A new dataset built from the selected rows.

        """
        idx = np.asarray(rows, dtype=np.intp)
        return type(self)(self.X[idx], self.Y[idx], self.x_names, self.y_names)


@dataclass(frozen=True, eq=False)
class StandardizedSample:
    """
    .. admonition:: standardized sample

        :param Z: Whitened predictors, ``n×p``.
        :param y_std: Responses after optional standardization, ``n×q``.
        :param y_raw: Responses as given, ``n×q``.
        :param sigma_inv_sqrt: Symmetric ``Σ̂^{-1/2}``.
        :param sigma: Sample covariance ``Σ̂`` of the predictors.
        :param x_mean: Predictor means.
        :param y_mean: Response means, zero when not standardized.
        :param y_scale: Response scales, one when not standardized.

    """

    Z: FloatArray
    y_std: FloatArray
    y_raw: FloatArray
    sigma_inv_sqrt: FloatArray
    sigma: FloatArray
    x_mean: FloatArray
    y_mean: FloatArray = field(default_factory=lambda: _frozen([0.0], ndmin=1))
    y_scale: FloatArray = field(default_factory=lambda: _frozen([1.0], ndmin=1))

    @classmethod
    def whitened(cls, Z: npt.ArrayLike, Y: npt.ArrayLike) -> Self:
        """
        .. admonition:: whitened

            Wrap predictors which are already whitened, no transformation
            is applied and the back transform is the identity.

            :param Z: Whitened predictors, ``n×p``.
            :param Y: Responses, used both as raw and standardized.
            :returns: The sample.

        """
        Zm = _column_matrix(Z)
        Ym = _column_matrix(Y)
        p, q = Zm.shape[1], Ym.shape[1]
        return cls(
            Z=Zm,
            y_std=Ym,
            y_raw=Ym,
            sigma_inv_sqrt=_frozen(np.eye(p)),
            sigma=_frozen(np.eye(p)),
            x_mean=_frozen(np.zeros(p), ndmin=1),
            y_mean=_frozen(np.zeros(q), ndmin=1),
            y_scale=_frozen(np.ones(q), ndmin=1),
        )

    @property
    def n(self) -> int:
        return int(self.Z.shape[0])

    @property
    def p(self) -> int:
        return int(self.Z.shape[1])

    def response(self, raw: bool = False) -> FloatArray:
        """
        .. admonition:: response

            :param raw: Return the responses as given instead of standardized.
            :returns: The ``n×q`` response matrix.

        """
        return self.y_raw if raw else self.y_std


class Recipe(StrEnum):
    FMM = 'FMM'
    FMC = 'FMC'
    CMM = 'CMM'
    CMC = 'CMC'
    IHT_PSI = 'IHT_PSI'
    INVFM_V = 'INVFM_V'


@dataclass(frozen=True, eq=False)
class CandidateMatrix:
    """
    .. admonition:: candidate matrix

        Symmetric nonnegative definite ``p×p`` matrix whose leading
        eigenvectors span the targeted subspace in whitened coordinates.

        :param M: The matrix.
        :param recipe: How it was built.
        :param density: Predictor density assumption, where applicable.
        :param diagnostics: Warnings collected while building it.
        :raises ValueError: If ``M`` is not symmetric within ``1e-8`` or has
                            an eigenvalue below ``-1e-8`` times the largest
                            eigenvalue magnitude.

    """

    M: FloatArray
    recipe: Recipe
    density: 'Density | None' = None
    diagnostics: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        M = np.atleast_2d(np.asarray(self.M, dtype=np.float64))
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            msg = f'Candidate matrix must be square, got shape {M.shape}'
            raise ValueError(msg)
        scale = float(np.max(np.abs(M))) if M.size else 0.0
        if np.max(np.abs(M - M.T)) > 1e-8 * max(scale, 1.0):
            msg = 'Candidate matrix is not symmetric'
            raise ValueError(msg)
        lam = linalg.eigvalsh((M + M.T) / 2)
        if lam[0] < -1e-8 * max(abs(float(lam[0])), abs(float(lam[-1]))):
            msg = f'Candidate matrix is not nonnegative definite, eigenvalue {lam[0]:.6g}'
            raise ValueError(msg)
        object.__setattr__(self, 'M', _frozen(M))
        object.__setattr__(self, 'recipe', Recipe(self.recipe))

    @property
    def p(self) -> int:
        return int(self.M.shape[0])


def sample_covariance(X: npt.ArrayLike) -> FloatArray:
    """
    .. admonition:: sample covariance

        :param X: Data matrix, rows are observations.
        :returns: The ``p×p`` covariance with divisor ``n - 1``.

    """
    return np.atleast_2d(np.cov(np.asarray(X, dtype=np.float64), rowvar=False, ddof=1))


def inverse_sqrt(S: npt.ArrayLike) -> FloatArray:
    """
    .. admonition:: inverse square root

        Symmetric inverse square root ``V diag(λ^{-1/2}) Vᵀ`` computed from
        the spectral decomposition ``S = V diag(λ) Vᵀ``.

        :param S: Symmetric positive definite matrix.
        :returns: The symmetric matrix ``R`` with ``R S R = I``.
        :raises ValueError: If ``S`` is not square and symmetric.
        :raises SingularCovariance: If an eigenvalue is below the rank tolerance.

    """
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        msg = f'Expected a square matrix, got shape {S.shape}'
        raise ValueError(msg)
    scale = max(float(np.max(np.abs(S))), 1.0)
    if np.max(np.abs(S - S.T)) > 1e-8 * scale:
        msg = 'Matrix is not symmetric'
        raise ValueError(msg)
    lam, V = linalg.eigh((S + S.T) / 2)
    threshold = RANK_TOL * max(float(lam[-1]), 0.0)
    if lam[-1] <= 0.0 or lam[0] < threshold:
        raise SingularCovariance(float(lam[0]), threshold)
    R = (V * lam ** -0.5) @ V.T
    return (R + R.T) / 2


def scale_columns(X: npt.ArrayLike) -> FloatArray:
    """
    .. admonition:: scale columns

        :param X: Data matrix.
        :returns: Columns centered and divided by their sample standard
                  deviation, constant columns are only centered.

    """
    X = np.asarray(X, dtype=np.float64)
    sd = X.std(axis=0, ddof=1)
    sd = np.where(sd > 0.0, sd, 1.0)
    return (X - X.mean(axis=0)) / sd


def standardize(
    data: Dataset,
    standardize_y: bool = True,
    scale_x: bool = True,
) -> StandardizedSample:
    """
    .. admonition:: standardize

        :param data: The sample.
        :param standardize_y: Center each response column and divide it by
                              its sample standard deviation.
        :param scale_x: Whiten the predictors, when false they are only
                        centered and the back transform is the identity.
        :returns: The standardized sample.
        :raises SingularCovariance: If the predictor covariance is singular.

    """
    X = data.X
    x_mean = X.mean(axis=0)
    sigma = sample_covariance(X)
    if scale_x:
        root = inverse_sqrt(sigma)
    else:
        root = np.eye(data.p)
    Z = (X - x_mean) @ root

    Y = data.Y
    if standardize_y:
        y_mean = Y.mean(axis=0)
        y_scale = Y.std(axis=0, ddof=1)
        if np.any(constant := y_scale <= 0.0):
            logger.warning(
                'Constant response column(s) %s left unscaled',
                [data.y_names[j] for j in np.flatnonzero(constant)],
            )
            y_scale = np.where(constant, 1.0, y_scale)
        y_std = (Y - y_mean) / y_scale
    else:
        y_mean = np.zeros(data.q)
        y_scale = np.ones(data.q)
        y_std = Y

    return StandardizedSample(
        Z=_frozen(Z),
        y_std=_frozen(y_std),
        y_raw=_frozen(Y),
        sigma_inv_sqrt=_frozen(root),
        sigma=_frozen(sigma),
        x_mean=_frozen(x_mean, ndmin=1),
        y_mean=_frozen(y_mean, ndmin=1),
        y_scale=_frozen(y_scale, ndmin=1),
    )
