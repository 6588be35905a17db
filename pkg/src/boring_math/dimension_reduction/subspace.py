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
Subspaces
---------

.. admonition:: Spectral extraction and subspace distance

    Every spectral estimator ends the same way. Take the leading ``d``
    eigenvectors ``ê_k`` of a symmetric candidate matrix built on
    whitened predictors, then back transform them to the original
    predictor scale as ``Σ̂^{-1/2} ê_k``.

    Estimated subspaces are compared with the trace correlation
    ``γ = sqrt(tr(P_A P_B)/d)``, the distance used throughout is
    ``1 - γ``.

    .. important::

       **Contract:** reproducible bases

       - eigenvalues are returned in descending order, ties keep index order
       - each eigenvector has its largest magnitude component positive

"""

from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from scipy import linalg

from .data_model import RANK_TOL, FloatArray
from .errors import DimensionOutOfRange, RankDeficientBasis

__all__ = [
    'SubspaceBasis',
    'fix_signs',
    'extract_basis',
    'full_rank',
    'projector',
    'trace_correlation',
    'subspace_distance',
]


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """
    .. admonition:: subspace basis

        :param B: Directions in the original predictor scale, ``p×d``.
        :param eigvals: Leading eigenvalues, descending.
        :param full_spectrum: All ``p`` eigenvalues, descending.
        :param whitened: Orthonormal basis in whitened coordinates, if any.
        :param method: Label of the estimator which produced the basis.
        :param diagnostics: Warnings collected while estimating.

    """

    B: FloatArray
    eigvals: FloatArray
    full_spectrum: FloatArray
    whitened: FloatArray | None = None
    method: str = ''
    diagnostics: tuple[str, ...] = field(default=())

    @property
    def p(self) -> int:
        return int(self.B.shape[0])

    @property
    def d(self) -> int:
        return int(self.B.shape[1])

    def unit_columns(self) -> FloatArray:
        """
        .. admonition:: unit columns

            :returns: ``B`` with every column scaled to unit length.

        """
        norms = np.linalg.norm(self.B, axis=0)
        return self.B / np.where(norms > 0.0, norms, 1.0)

    def reduce(self, X: npt.ArrayLike) -> FloatArray:
        """
        .. admonition:: reduce

            :param X: Predictors in the original scale, ``m×p``.
            :returns: The sufficient predictors ``X B``, ``m×d``.

        """
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.p:
            msg = f'Expected {self.p} predictor columns, got {X.shape[1]}'
            raise ValueError(msg)
        return X @ self.B

    def with_diagnostics(self, *notes: str) -> 'SubspaceBasis':
        return SubspaceBasis(
            self.B,
            self.eigvals,
            self.full_spectrum,
            self.whitened,
            self.method,
            self.diagnostics + tuple(notes),
        )


def fix_signs(E: npt.ArrayLike) -> FloatArray:
    """
    .. admonition:: fix signs

        :param E: Matrix whose columns have an arbitrary sign.
        :returns: Copy with the largest magnitude entry of every column
                  positive, the first such entry on ties.

    """
    E = np.array(E, dtype=np.float64, ndmin=2)
    pivots = np.argmax(np.abs(E), axis=0)
    signs = np.sign(E[pivots, np.arange(E.shape[1])])
    return E * np.where(signs == 0.0, 1.0, signs)


def extract_basis(
    M: npt.ArrayLike,
    d: int,
    sigma_inv_sqrt: npt.ArrayLike | None = None,
    method: str = '',
) -> SubspaceBasis:
    """
    .. admonition:: extract basis

        :param M: Symmetric ``p×p`` candidate matrix.
        :param d: Number of leading directions.
        :param sigma_inv_sqrt: Back transform ``Σ̂^{-1/2}``, identity if ``None``.
        :param method: Label stored on the basis.
        :returns: The leading ``d`` dimensional eigenspace of ``M``.
        :raises DimensionOutOfRange: Unless ``1 <= d <= p``.

    """
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    p = M.shape[0]
    if not 1 <= d <= p:
        raise DimensionOutOfRange(d, p)
    lam, E = linalg.eigh((M + M.T) / 2)
    order = np.argsort(-lam, kind='stable')
    lam, E = lam[order], fix_signs(E[:, order])
    E_d = E[:, :d]
    root = np.eye(p) if sigma_inv_sqrt is None else np.asarray(sigma_inv_sqrt, dtype=np.float64)
    return SubspaceBasis(
        B=root @ E_d,
        eigvals=lam[:d].copy(),
        full_spectrum=lam,
        whitened=E_d,
        method=method,
    )


def full_rank(A: FloatArray, label: str) -> FloatArray:
    s = linalg.svdvals(A)
    if s.size == 0 or s[0] <= 0.0 or s[-1] < RANK_TOL * s[0]:
        msg = f'Basis {label} is not of full column rank'
        raise RankDeficientBasis(msg)
    return A


def projector(A: npt.ArrayLike) -> FloatArray:
    """
    .. admonition:: projector

        :param A: Basis, ``p×d``.
        :returns: Orthogonal projector ``A (AᵀA)⁺ Aᵀ`` onto its span.

    """
    A = _as_basis(A)
    return A @ linalg.pinvh(A.T @ A) @ A.T


def _as_basis(A: npt.ArrayLike) -> FloatArray:
    arr = np.asarray(A, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, np.newaxis]
    return arr


def trace_correlation(
    A: npt.ArrayLike | SubspaceBasis,
    B: npt.ArrayLike | SubspaceBasis,
    d: int | None = None,
) -> float:
    """
    .. admonition:: trace correlation

        :param A: First basis, ``p×d1``, a vector is one direction.
        :param B: Second basis, ``p×d2``.
        :param d: Normalizing dimension, ``max(d1, d2)`` when ``None``.
        :returns: ``sqrt(tr(P_A P_B)/d)`` clipped to ``[0, 1]``.
        :raises RankDeficientBasis: If either basis lacks full column rank.

    """
    a = full_rank(_as_basis(A.B if isinstance(A, SubspaceBasis) else A), 'A')
    b = full_rank(_as_basis(B.B if isinstance(B, SubspaceBasis) else B), 'B')
    if a.shape[0] != b.shape[0]:
        msg = f'Bases live in different spaces, p={a.shape[0]} and p={b.shape[0]}'
        raise ValueError(msg)
    if d is None:
        d = max(a.shape[1], b.shape[1])
    overlap = float(np.sum(projector(a) * projector(b)))
    return float(np.clip(np.sqrt(max(overlap, 0.0) / d), 0.0, 1.0))


def subspace_distance(
    A: npt.ArrayLike | SubspaceBasis,
    B: npt.ArrayLike | SubspaceBasis,
    d: int | None = None,
) -> float:
    """
    .. admonition:: subspace distance

        :returns: ``1 - trace_correlation(A, B, d)``.

    """
    return 1.0 - trace_correlation(A, B, d)
