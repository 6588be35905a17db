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
Minimum Discrepancy Estimators
------------------------------

.. admonition:: Quadratic discrepancy functions

    For frequencies ``ω_1, ..., ω_k`` let

    ``ξ̂_r = Σ̂⁻¹ [n⁻¹ Σⱼ exp(i ω_rᵀyⱼ) xⱼ - (n⁻¹ Σⱼ exp(i ω_rᵀyⱼ)) x̄]``

    with real and imaginary parts interleaved as the ``2k`` columns of
    ``ξ̂``. For ``Γ`` with orthonormal columns the estimators minimize the
    quadratic discrepancy function

    ``F(Γ, C) = vec(ξ̂ - ΓC)ᵀ V vec(ξ̂ - ΓC)``

    and differ only in the inner product ``V``:

    +----------+-------------------------------------------------------+
    | kind     | ``V``                                                 |
    +==========+=======================================================+
    | FT-IRE   | inverse covariance ``Σ̂_ξ⁻¹`` of ``vec(ξ̂)``            |
    +----------+-------------------------------------------------------+
    | FT-DIRE  | block diagonal, one ``Σ̂_ξ`` block per frequency group |
    +----------+-------------------------------------------------------+
    | FT-SIRE  | ``I_{2k} ⊗ Σ̂``                                        |
    +----------+-------------------------------------------------------+
    | FT-RIRE  | ``G̃⁻¹``, residuals replaced by centered features      |
    +----------+-------------------------------------------------------+
    | FT-DRIRE | block diagonal ``G̃_l⁻¹``                              |
    +----------+-------------------------------------------------------+

    The minimization alternates between a generalized least squares
    update of ``C`` and column by column updates of ``Γ``, each
    constrained to the orthogonal complement of the other columns.

    .. important::

       **Contract:** monotone descent

       - every partial update solves its subproblem exactly
       - the objective recorded after each sweep never increases

"""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
import numpy.typing as npt
from scipy import linalg

from ..data_model import Dataset, FloatArray, standardize
from ..errors import DimensionOutOfRange
from ..subspace import SubspaceBasis, fix_signs
from . import BaseEstimator
from .invfm import FourierDesign, fourier_features, invfm_estimate

__all__ = [
    'QDF_TOL',
    'QDF_MAX_ITER',
    'RIDGE_DELTA',
    'XireKind',
    'XiEstimate',
    'xi_hat',
    'InnerProduct',
    'build_inner_product',
    'QdfSolution',
    'qdf_objective',
    'minimize_qdf',
    'fm_xire',
    'XireEstimator',
]

logger = logging.getLogger(__name__)

QDF_TOL = 1e-6
QDF_MAX_ITER = 500
RIDGE_DELTA = 1e-6


class XireKind(StrEnum):
    IRE = 'FT-IRE'
    DIRE = 'FT-DIRE'
    SIRE = 'FT-SIRE'
    RIRE = 'FT-RIRE'
    DRIRE = 'FT-DRIRE'


@dataclass(frozen=True, eq=False)
class XiEstimate:
    """
    .. admonition:: ξ estimate

        :param xi_hat: ``p×2k``, real and imaginary parts interleaved.
        :param residuals: ``n×2k`` least squares residuals ``ε̂``.
        :param sigma_hat: Predictor covariance ``Σ̂``.
        :param design: Frequencies.
        :param U: Per-sample ``Σ̂^{-1/2} zⱼ`` as rows, ``n×p``.
        :param centered: Centered Fourier features ``e - ē``, ``n×2k``.

    """

    xi_hat: FloatArray
    residuals: FloatArray
    sigma_hat: FloatArray
    design: FourierDesign
    U: FloatArray
    centered: FloatArray

    @property
    def p(self) -> int:
        return int(self.xi_hat.shape[0])

    @property
    def k(self) -> int:
        return int(self.xi_hat.shape[1]) // 2

    @property
    def n(self) -> int:
        return int(self.U.shape[0])


def xi_hat(data: Dataset, design: FourierDesign, scale_y: bool = True) -> XiEstimate:
    """
    .. admonition:: ξ hat

        :param data: The sample.
        :param design: Frequencies, ``q×k``.
        :param scale_y: Scale each response column to unit variance first.
        :returns: ``ξ̂`` with the residuals of the least squares fit of the
                  Fourier features on the whitened predictors.
        :raises SingularCovariance: If ``Σ̂`` is singular.

    """
    if design.q != data.q:
        msg = f'Design has response dimension {design.q}, data has {data.q}'
        raise ValueError(msg)
    sample = standardize(data, standardize_y=scale_y)
    F = fourier_features(sample.response(raw=not scale_y), design.W)
    Z = sample.Z
    root = sample.sigma_inv_sqrt
    Omega = Z.T @ F / sample.n
    centered = F - F.mean(axis=0)
    return XiEstimate(
        xi_hat=root @ Omega,
        residuals=centered - Z @ Omega,
        sigma_hat=sample.sigma,
        design=design,
        U=Z @ root,
        centered=centered,
    )


@dataclass(frozen=True, eq=False)
class InnerProduct:
    """
    .. admonition:: inner product

        :param kind: Estimator the inner product belongs to.
        :param V: Symmetric ``2kp×2kp`` matrix.
        :param blocks: Frequency group sizes, empty for undivided kinds.
        :param ridge: Ridge ``δ`` used when a covariance was singular.
        :param G: Covariance ``V`` was built from, ``None`` for FT-SIRE.

    """

    kind: XireKind
    V: FloatArray
    blocks: tuple[int, ...] = ()
    ridge: float = 0.0
    G: FloatArray | None = None

    def diagnostics(self) -> tuple[str, ...]:
        if self.ridge > 0.0:
            return (f'SingularInnerProduct: ridge delta {self.ridge:g} added for {self.kind}',)
        return ()


def _sample_vectors(left: FloatArray, U: FloatArray) -> FloatArray:
    n = U.shape[0]
    # column major vec of uⱼ leftⱼᵀ
    return (left[:, :, np.newaxis] * U[:, np.newaxis, :]).reshape(n, -1)


def _covariance(K: FloatArray) -> FloatArray:
    Kc = K - K.mean(axis=0)
    S = Kc.T @ Kc / K.shape[0]
    return (S + S.T) / 2


def _inverse(S: FloatArray) -> tuple[FloatArray, float]:
    eye = np.eye(S.shape[0])
    try:
        return linalg.cho_solve(linalg.cho_factor(S), eye), 0.0
    except linalg.LinAlgError:
        pass
    bump = RIDGE_DELTA * max(float(np.trace(S)), np.finfo(np.float64).tiny) / S.shape[0]
    try:
        inv = linalg.cho_solve(linalg.cho_factor(S + bump * eye), eye)
    except linalg.LinAlgError:
        inv = linalg.pinvh(S + bump * eye)
    return inv, RIDGE_DELTA


def _block_slices(blocks: Sequence[int], p: int) -> list[slice]:
    slices, lo = [], 0
    for size in blocks:
        hi = lo + 2 * size * p
        slices.append(slice(lo, hi))
        lo = hi
    return slices


def build_inner_product(
    xi: XiEstimate,
    kind: XireKind | str,
    blocks: Sequence[int] | None = None,
) -> InnerProduct:
    """
    .. admonition:: build inner product

        :param xi: The ``ξ̂`` estimate.
        :param kind: Estimator.
        :param blocks: Sizes of consecutive frequency groups for FT-DIRE and
                       FT-DRIRE, every frequency its own group if ``None``.
        :returns: The inner product matrix ``V``.
        :raises ValueError: If the block sizes do not sum to ``k``.

    """
    kind = XireKind(kind)
    p, k = xi.p, xi.k
    if kind is XireKind.SIRE:
        V = np.kron(np.eye(2 * k), xi.sigma_hat)
        return InnerProduct(kind, (V + V.T) / 2)

    left = xi.centered if kind in (XireKind.RIRE, XireKind.DRIRE) else xi.residuals
    G = _covariance(_sample_vectors(left, xi.U))

    if kind in (XireKind.IRE, XireKind.RIRE):
        V, ridge = _inverse(G)
        group: tuple[int, ...] = ()
    else:
        group = tuple(blocks) if blocks is not None else (1,) * k
        if any(size < 1 for size in group) or sum(group) != k:
            msg = f'Block sizes {group} must be positive and sum to k={k}'
            raise ValueError(msg)
        V, ridge = np.zeros_like(G), 0.0
        for rows in _block_slices(group, p):
            inv, delta = _inverse(G[rows, rows])
            V[rows, rows] = inv
            ridge = max(ridge, delta)

    ip = InnerProduct(kind, (V + V.T) / 2, group, ridge, G)
    for note in ip.diagnostics():
        logger.warning(note)
    return ip


@dataclass(frozen=True, eq=False)
class QdfSolution:
    """
    .. admonition:: QDF solution

        :param Gamma: ``p×d`` with orthonormal columns.
        :param C: ``d×2k`` coefficients.
        :param objective: Final value of ``F(Γ, C)``.
        :param objectives: Objective after the start and after every sweep.
        :param iterations: Sweeps taken.
        :param converged: Whether the stopping rule was met.

    """

    Gamma: FloatArray
    C: FloatArray
    objective: float
    objectives: tuple[float, ...] = field(default=())
    iterations: int = 0
    converged: bool = True

    def diagnostics(self) -> tuple[str, ...]:
        if self.converged:
            return ()
        return (f'NonConvergence: QDF stopped after {self.iterations} sweeps',)


def _matrices(xi: XiEstimate | npt.ArrayLike, V: InnerProduct | npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
    X = xi.xi_hat if isinstance(xi, XiEstimate) else np.array(xi, dtype=np.float64, ndmin=2)
    Vm = V.V if isinstance(V, InnerProduct) else np.asarray(V, dtype=np.float64)
    if Vm.shape != (X.size, X.size):
        msg = f'Inner product has shape {Vm.shape}, expected {(X.size, X.size)}'
        raise ValueError(msg)
    return X, Vm


def qdf_objective(
    xi: XiEstimate | npt.ArrayLike,
    V: InnerProduct | npt.ArrayLike,
    Gamma: npt.ArrayLike,
    C: npt.ArrayLike,
) -> float:
    """
    .. admonition:: QDF objective

        :returns: ``vec(ξ̂ - ΓC)ᵀ V vec(ξ̂ - ΓC)``.

    """
    X, Vm = _matrices(xi, V)
    r = (X - np.asarray(Gamma) @ np.asarray(C)).reshape(-1, order='F')
    return float(r @ Vm @ r)


def _c_update(V4: FloatArray, Vx: FloatArray, Gamma: FloatArray) -> FloatArray:
    two_k, _, _, _ = V4.shape
    d = Gamma.shape[1]
    H = np.einsum('ik,aibj,jl->akbl', Gamma, V4, Gamma).reshape(two_k * d, two_k * d)
    rhs = (Vx @ Gamma).reshape(-1)
    vec_c = linalg.lstsq((H + H.T) / 2, rhs)[0]
    return vec_c.reshape(two_k, d).T


def _column_update(
    x: FloatArray,
    Vm: FloatArray,
    V4: FloatArray,
    Gamma: FloatArray,
    C: FloatArray,
    col: int,
) -> FloatArray | None:
    p, d = Gamma.shape
    two_k = C.shape[1]
    others = np.delete(Gamma, col, axis=1)
    Q = np.eye(p) - others @ others.T
    c = C[col]
    rest = np.delete(C, col, axis=0)
    alpha = x - (others @ rest).reshape(-1, order='F')
    Va = (Vm @ alpha).reshape(two_k, p)
    A = np.einsum('a,aibj,b->ij', c, V4, c)
    rhs = Q @ (c @ Va)
    b = Q @ linalg.pinvh(Q @ ((A + A.T) / 2) @ Q) @ rhs
    b = Q @ b
    if (norm := float(np.linalg.norm(b))) <= np.finfo(np.float64).eps:
        return None
    b /= norm
    if float(b @ Gamma[:, col]) < 0.0:
        b = -b
    return b


def minimize_qdf(
    xi: XiEstimate | npt.ArrayLike,
    V: InnerProduct | npt.ArrayLike,
    d: int,
    init: npt.ArrayLike | None = None,
    max_iter: int = QDF_MAX_ITER,
    tol: float = QDF_TOL,
) -> QdfSolution:
    """
    .. admonition:: minimize QDF

        :param xi: ``ξ̂`` or an estimate holding it, ``p×2k``.
        :param V: Inner product, ``2kp×2kp``.
        :param d: Dimension.
        :param init: Starting ``Γ``, orthonormalized, the first ``d``
                     coordinate vectors if ``None``.
        :param max_iter: Sweep cap.
        :param tol: Stop when ``max(‖ΔΓ‖², ‖ΔC‖²) < tol``.
        :returns: The last iterate, flagged when the cap was hit.
        :raises DimensionOutOfRange: Unless ``1 <= d <= p``.

    """
    X, Vm = _matrices(xi, V)
    p, two_k = X.shape
    if not 1 <= d <= p:
        raise DimensionOutOfRange(d, p)
    if init is None:
        Gamma = np.eye(p)[:, :d].copy()
    else:
        start = np.array(init, dtype=np.float64, ndmin=2)
        if start.shape != (p, d):
            msg = f'Initial Gamma has shape {start.shape}, expected {(p, d)}'
            raise ValueError(msg)
        Gamma = linalg.qr(start, mode='economic')[0]

    x = X.reshape(-1, order='F')
    V4 = Vm.reshape(two_k, p, two_k, p)
    Vx = (Vm @ x).reshape(two_k, p)
    C = _c_update(V4, Vx, Gamma)
    objectives = [qdf_objective(X, Vm, Gamma, C)]

    converged = False
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        prev_gamma, prev_c = Gamma.copy(), C.copy()
        for col in range(d):
            if (b := _column_update(x, Vm, V4, Gamma, C, col)) is not None:
                Gamma[:, col] = b
                C = _c_update(V4, Vx, Gamma)
        objectives.append(qdf_objective(X, Vm, Gamma, C))
        change = max(
            float(np.sum((Gamma - prev_gamma) ** 2)),
            float(np.sum((C - prev_c) ** 2)),
        )
        if change < tol:
            converged = True
            break

    solution = QdfSolution(Gamma, C, objectives[-1], tuple(objectives), sweeps, converged)
    for note in solution.diagnostics():
        logger.warning(note)
    return solution


def _rotate(solution: QdfSolution, xi: FloatArray, kind: XireKind, notes: Iterable[str]) -> SubspaceBasis:
    p, d = solution.Gamma.shape
    U, s, _ = linalg.svd(solution.Gamma @ solution.C, full_matrices=False)
    Gamma = fix_signs(U[:, :d])
    spectrum = np.zeros(p)
    sv = linalg.svdvals(xi)
    spectrum[: min(p, sv.size)] = sv[:p] ** 2
    return SubspaceBasis(
        B=Gamma,
        eigvals=s[:d] ** 2,
        full_spectrum=spectrum,
        method=kind.value,
        diagnostics=tuple(notes),
    )


def fm_xire(
    data: Dataset,
    d: int,
    m: int = 10,
    kind: XireKind | str = XireKind.IRE,
    seed: int | None = 0,
    blocks: Sequence[int] | None = None,
    init: str = 'invfm',
    scale_y: bool = True,
    design: FourierDesign | None = None,
) -> SubspaceBasis:
    """
    .. admonition:: FT-xIRE

        :param data: The sample.
        :param d: Dimension.
        :param m: Number of frequencies drawn when no design is given.
        :param kind: Estimator of the family.
        :param seed: Seed for the frequencies.
        :param blocks: Frequency group sizes for the degenerate kinds.
        :param init: ``'invfm'`` to start from the inverse Fourier estimate,
                     ``'identity'`` for the coordinate vectors.
        :param scale_y: Scale each response column to unit variance first.
        :param design: Fixed frequencies, overrides ``m`` and ``seed``.
        :returns: Orthonormal basis, columns ordered by the singular values
                  of ``ΓC``.
        :raises DimensionOutOfRange: Unless ``1 <= d <= p``.

    """
    kind = XireKind(kind)
    if design is None:
        design = FourierDesign.gaussian(data.q, m, seed)
    match init:
        case 'invfm':
            B = invfm_estimate(data, d, design, scale_y=scale_y).basis.B
            start: FloatArray | None = linalg.qr(B, mode='economic')[0]
        case 'identity':
            start = None
        case _:
            msg = f'Unknown initialization {init!r}'
            raise ValueError(msg)
    xi = xi_hat(data, design, scale_y)
    ip = build_inner_product(xi, kind, blocks)
    solution = minimize_qdf(xi, ip, d, start)
    return _rotate(solution, xi.xi_hat, kind, ip.diagnostics() + solution.diagnostics())


@dataclass(frozen=True)
class XireEstimator(BaseEstimator):
    """
    .. admonition:: FT-xIRE estimator

        :param kind: Estimator of the family.
        :param m: Number of frequencies.
        :param seed: Seed for the frequencies.
        :param blocks: Frequency group sizes for the degenerate kinds.
        :param init: ``'invfm'`` or ``'identity'``.
        :param scale_y: Scale each response column to unit variance first.

    """

    kind: XireKind = XireKind.IRE
    m: int = 10
    seed: int | None = 0
    blocks: tuple[int, ...] | None = None
    init: str = 'invfm'
    scale_y: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, 'kind', XireKind(self.kind))
        if self.blocks is not None:
            object.__setattr__(self, 'blocks', tuple(self.blocks))

    @property
    def label(self) -> str:
        return self.kind.value

    def fit(self, data: Dataset, d: int) -> SubspaceBasis:
        return fm_xire(data, d, self.m, self.kind, self.seed, self.blocks, self.init, self.scale_y)
