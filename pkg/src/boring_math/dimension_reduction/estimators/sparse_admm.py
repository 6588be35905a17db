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
Sparse Fourier Inverse Regression
---------------------------------

.. admonition:: Penalized discrepancy

    With ``Ξ̂ = Σ̂ ξ̂``, the covariance between the predictors and the
    Fourier features of the response, and ``C Cᵀ = I_d`` the sparse
    estimator minimizes

    ``L(Γ, C) = ½ tr(Γᵀ Σ̂ Γ) - tr(Γᵀ Ξ̂ Cᵀ) + λ Σⱼ wⱼ ‖Γⱼ‖``

    which is the FT-SIRE discrepancy up to a constant plus a coordinate
    independent group penalty on the rows of ``Γ``. No inverse of ``Σ̂`` is
    needed, so ``p`` may exceed ``n``.

    - **Γ given C:** ADMM splitting ``Γ = A``, the ``A`` update soft
      thresholds whole rows.
    - **C given Γ:** orthogonal Procrustes, ``C = W₂W₁ᵀ`` from the singular
      value decomposition ``Ξ̂ᵀΓ = W₁ D W₂ᵀ``.
    - **Iterated ADMM:** alternate both updates with equal weights, then
      reweight ``wⱼ = ‖Γⱼ‖^{-1/2}`` and run again.

    .. important::

       **Contract:** exact zeros

       - the returned ``Γ`` is the thresholded ADMM copy ``A``
       - rows outside the active set are exactly zero

"""

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Self

import numpy as np
import numpy.typing as npt
from pythonic_fp.fptools.function import partial
from scipy import linalg

from ..data_model import Dataset, FloatArray
from ..errors import DimensionOutOfRange
from ..subspace import SubspaceBasis
from . import BaseEstimator
from .invfm import FourierDesign, fourier_features

__all__ = [
    'WEIGHT_CAP',
    'RANK_COLLAPSE_TOL',
    'AdmmConfig',
    'AdmmProblem',
    'AdmmState',
    'SparseSolution',
    'LambdaPath',
    'row_soft_threshold',
    'soft_threshold_covariance',
    'admm_gamma_update',
    'admm_c_update',
    'penalized_objective',
    'cross_validate_lambda',
    'admmft',
    'SparseEstimator',
]

logger = logging.getLogger(__name__)

WEIGHT_CAP = 1e8
RANK_COLLAPSE_TOL = 1e-12


@dataclass(frozen=True)
class AdmmConfig:
    """
    .. admonition:: ADMM configuration

        :param lam: Penalty ``λ``, chosen by cross validation when ``None``.
        :param rho: ADMM parameter ``ρ``.
        :param weights: Initial row weights, all ones when ``None``.
        :param eps: Tolerance for the ADMM residuals and the outer loop.
        :param no_b: ADMM rounds, each of ``inner_iter`` iterations.
        :param no_c: Outer ``C``/``Γ`` sweeps per weighting pass.
        :param no_w: Weighting passes, the first with the initial weights.
        :param inner_iter: ADMM iterations per round.
        :param sparse_cov: Soft threshold the off diagonal entries of ``Σ̂``.
        :param scale_x: Scale each predictor to unit variance first.
        :param scale_y: Scale each response column to unit variance first.

    """

    lam: float | None = None
    rho: float = 1.0
    weights: tuple[float, ...] | None = None
    eps: float = 1e-6
    no_b: int = 5
    no_c: int = 20
    no_w: int = 2
    inner_iter: int = 200
    sparse_cov: bool = False
    scale_x: bool = True
    scale_y: bool = True

    def __post_init__(self) -> None:
        if self.lam is not None and self.lam < 0.0:
            msg = f'Penalty must be nonnegative, got {self.lam}'
            raise ValueError(msg)
        if self.rho <= 0.0:
            msg = f'ADMM parameter rho must be positive, got {self.rho}'
            raise ValueError(msg)
        if self.weights is not None and any(w < 0.0 for w in self.weights):
            msg = 'Row weights must be nonnegative'
            raise ValueError(msg)
        if min(self.no_b, self.no_c, self.no_w, self.inner_iter) < 1:
            msg = 'Iteration caps must be positive'
            raise ValueError(msg)
        if self.eps <= 0.0:
            msg = f'Tolerance must be positive, got {self.eps}'
            raise ValueError(msg)

    @property
    def inner_cap(self) -> int:
        return self.no_b * self.inner_iter


def row_soft_threshold(v: npt.ArrayLike, t: float) -> FloatArray:
    """
    .. admonition:: row soft threshold

        :param v: Vector.
        :param t: Nonnegative threshold.
        :returns: ``max(1 - t/‖v‖, 0) v``, the zero vector when ``‖v‖ <= t``.

    """
    v = np.array(v, dtype=np.float64)
    if t <= 0.0:
        return v
    if (norm := float(np.linalg.norm(v))) <= t:
        return np.zeros_like(v)
    return (1.0 - t / norm) * v


def _shrink_rows(M: FloatArray, t: FloatArray) -> FloatArray:
    norms = np.linalg.norm(M, axis=1)
    keep = norms > t
    factor = np.zeros_like(norms)
    factor[keep] = 1.0 - t[keep] / norms[keep]
    return M * factor[:, np.newaxis]


def soft_threshold_covariance(S: npt.ArrayLike, n: int) -> FloatArray:
    """
    .. admonition:: soft threshold covariance

        :param S: Covariance matrix, ``p×p``.
        :param n: Sample size it was estimated from.
        :returns: Off diagonal entries soft thresholded at
                  ``2 sqrt(log p / n) max diag(S)``, diagonal untouched.

    """
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    p = S.shape[0]
    level = 2.0 * np.sqrt(np.log(p) / n) * float(np.max(np.diag(S)))
    T = np.sign(S) * np.maximum(np.abs(S) - level, 0.0)
    np.fill_diagonal(T, np.diag(S))
    return T


@dataclass(frozen=True, eq=False)
class AdmmProblem:
    """
    .. admonition:: ADMM problem

        :param sigma: Predictor covariance ``Σ̂``.
        :param Xi: ``Ξ̂``, ``p×2k``.
        :param rho: ADMM parameter the factorization belongs to.
        :param factor: Cholesky factor of ``Σ̂ + ρI``.

    """

    sigma: FloatArray
    Xi: FloatArray
    rho: float
    factor: tuple[FloatArray, bool]

    @classmethod
    def from_moments(cls, sigma: npt.ArrayLike, Xi: npt.ArrayLike, rho: float = 1.0) -> Self:
        S = np.atleast_2d(np.asarray(sigma, dtype=np.float64))
        X = np.atleast_2d(np.asarray(Xi, dtype=np.float64))
        return cls(S, X, rho, linalg.cho_factor(S + rho * np.eye(S.shape[0])))

    @classmethod
    def from_sample(cls, X: FloatArray, F: FloatArray, cfg: AdmmConfig) -> Self:
        """
        .. admonition:: from sample

            :param X: Predictors, ``n×p``.
            :param F: Fourier features of the responses, ``n×2k``.
            :param cfg: Configuration.
            :returns: Problem with ``Σ̂`` and ``Ξ̂`` of the sample.

        """
        sigma, Xi = _moments(X, F)
        if cfg.sparse_cov:
            sigma = soft_threshold_covariance(sigma, X.shape[0])
        return cls.from_moments(sigma, Xi, cfg.rho)

    @property
    def p(self) -> int:
        return int(self.Xi.shape[0])

    @property
    def k(self) -> int:
        return int(self.Xi.shape[1]) // 2

    @property
    def lambda_max(self) -> float:
        return float(np.max(np.linalg.norm(self.Xi, axis=1), initial=0.0))


def _moments(X: FloatArray, F: FloatArray) -> tuple[FloatArray, FloatArray]:
    Xc = X - X.mean(axis=0)
    Fc = F - F.mean(axis=0)
    n = X.shape[0]
    sigma = Xc.T @ Xc / (n - 1)
    return (sigma + sigma.T) / 2, Xc.T @ Fc / n


@dataclass(frozen=True, eq=False)
class AdmmState:
    """
    .. admonition:: ADMM state

        :param Gamma: Last ``Γ`` iterate.
        :param A: Row thresholded copy of ``Γ``.
        :param U: Scaled dual variable.
        :param iterations: Iterations taken.
        :param converged: Whether both residuals fell below ``eps``.
        :param primal: Final ``‖Γ - A‖_F``.
        :param dual: Final ``‖ρ ΔA‖_F``.

    """

    Gamma: FloatArray
    A: FloatArray
    U: FloatArray
    iterations: int = 0
    converged: bool = False
    primal: float = np.inf
    dual: float = np.inf


def admm_gamma_update(
    problem: AdmmProblem,
    C: npt.ArrayLike,
    cfg: AdmmConfig,
    state: AdmmState,
    weights: npt.ArrayLike | None = None,
) -> AdmmState:
    """
    .. admonition:: ADMM Γ update

        :param problem: ``Σ̂``, ``Ξ̂`` and the factorization of ``Σ̂ + ρI``.
        :param C: Current ``C``, ``d×2k``.
        :param cfg: Configuration, ``cfg.lam`` is the penalty.
        :param state: Warm start ``A`` and ``U``.
        :param weights: Row weights, ``cfg.weights`` or ones when ``None``.
        :returns: State after the residuals fell below ``eps`` or the
                  iteration cap was reached.

    """
    if problem.rho != cfg.rho:
        msg = f'Problem was factored for rho={problem.rho}, configuration has {cfg.rho}'
        raise ValueError(msg)
    rho = cfg.rho
    lam = cfg.lam or 0.0
    p = problem.p
    if weights is None:
        weights = cfg.weights if cfg.weights is not None else np.ones(p)
    t = lam * np.asarray(weights, dtype=np.float64) / rho
    B = problem.Xi @ np.asarray(C, dtype=np.float64).T
    A, U = state.A.copy(), state.U.copy()
    Gamma = state.Gamma
    primal = dual = np.inf
    converged = False
    it = 0
    for it in range(1, cfg.inner_cap + 1):
        Gamma = linalg.cho_solve(problem.factor, B + rho * (A - U))
        A_new = _shrink_rows(Gamma + U, t)
        U += Gamma - A_new
        primal = float(np.linalg.norm(Gamma - A_new))
        dual = float(np.linalg.norm(rho * (A - A_new)))
        A = A_new
        if primal < cfg.eps and dual < cfg.eps:
            converged = True
            break
    return AdmmState(Gamma, A, U, it, converged, primal, dual)


def admm_c_update(Xi: npt.ArrayLike, Gamma: npt.ArrayLike) -> tuple[FloatArray, bool]:
    """
    .. admonition:: ADMM C update

        :param Xi: ``Ξ̂``, ``p×2k``.
        :param Gamma: ``p×d``.
        :returns: ``C = W₂W₁ᵀ`` with ``C Cᵀ = I_d`` and whether a singular
                  value of ``Ξ̂ᵀΓ`` fell below ``RANK_COLLAPSE_TOL``.

    """
    M = np.asarray(Xi, dtype=np.float64).T @ np.asarray(Gamma, dtype=np.float64)
    W1, s, W2t = linalg.svd(M, full_matrices=False)
    return W2t.T @ W1.T, bool(s.size == 0 or s[-1] < RANK_COLLAPSE_TOL)


def penalized_objective(
    problem: AdmmProblem,
    Gamma: npt.ArrayLike,
    C: npt.ArrayLike,
    lam: float,
    weights: npt.ArrayLike,
) -> float:
    """
    .. admonition:: penalized objective

        :returns: ``½ tr(ΓᵀΣ̂Γ) - tr(ΓᵀΞ̂Cᵀ) + λ Σ wⱼ‖Γⱼ‖``.

    """
    G = np.asarray(Gamma, dtype=np.float64)
    fit = 0.5 * float(np.sum(G * (problem.sigma @ G))) - float(np.sum(G * (problem.Xi @ np.asarray(C).T)))
    penalty = float(np.asarray(weights, dtype=np.float64) @ np.linalg.norm(G, axis=1))
    return fit + lam * penalty


def _reweight(Gamma: FloatArray) -> FloatArray:
    norms = np.linalg.norm(Gamma, axis=1)
    w = np.full(norms.shape, WEIGHT_CAP)
    alive = norms > 0.0
    w[alive] = np.minimum(norms[alive] ** -0.5, WEIGHT_CAP)
    return w


@dataclass(frozen=True, eq=False)
class _Fit:
    Gamma: FloatArray
    C: FloatArray
    passes: tuple[tuple[float, ...], ...]
    converged: bool
    notes: tuple[str, ...]


def _iterated_admm(problem: AdmmProblem, d: int, lam: float, cfg: AdmmConfig) -> _Fit:
    p, k = problem.p, problem.k
    if not 1 <= d <= p:
        raise DimensionOutOfRange(d, p)
    if d > 2 * k:
        msg = f'Dimension d={d} exceeds the {2 * k} Fourier features'
        raise ValueError(msg)
    cfg = replace(cfg, lam=lam)
    weights = np.ones(p) if cfg.weights is None else np.asarray(cfg.weights, dtype=np.float64)
    if weights.shape != (p,):
        msg = f'Expected {p} row weights, got {weights.shape}'
        raise ValueError(msg)

    Gamma = linalg.svd(problem.Xi, full_matrices=False)[0][:, :d].copy()
    state = AdmmState(Gamma, Gamma.copy(), np.zeros_like(Gamma))
    passes: list[tuple[float, ...]] = []
    notes: list[str] = []
    converged = False
    collapsed = False
    for pass_no in range(cfg.no_w):
        C, flag = admm_c_update(problem.Xi, Gamma)
        collapsed |= flag
        L = penalized_objective(problem, Gamma, C, lam, weights)
        trace = [L]
        converged = False
        for _ in range(cfg.no_c):
            state = admm_gamma_update(problem, C, cfg, state, weights)
            Gamma = state.A
            C, flag = admm_c_update(problem.Xi, Gamma)
            collapsed |= flag
            L_new = penalized_objective(problem, Gamma, C, lam, weights)
            trace.append(L_new)
            done = abs(L - L_new) < cfg.eps
            L = L_new
            if done:
                converged = state.converged
                break
        passes.append(tuple(trace))
        if pass_no < cfg.no_w - 1:
            weights = _reweight(Gamma)

    if collapsed:
        notes.append('RankCollapse: a singular value of Xi^T Gamma vanished in a C update')
    if not converged:
        notes.append(f'NonConvergence: iterated ADMM hit its caps at lambda={lam:g}')
    for note in notes:
        logger.warning(note)
    return _Fit(Gamma, C, tuple(passes), converged, tuple(notes))


@dataclass(frozen=True, eq=False)
class LambdaPath:
    """
    .. admonition:: lambda path

        :param grid: Candidate penalties, increasing.
        :param scores: Mean held out score per candidate.
        :param chosen: Penalty with the smallest mean score.
        :param lambda_max: Smallest penalty zeroing every row at equal weights.
        :param folds: Number of folds.

    """

    grid: tuple[float, ...]
    scores: tuple[float, ...]
    chosen: float
    lambda_max: float
    folds: int

    def to_dict(self) -> dict[str, object]:
        return {
            'grid': list(self.grid),
            'scores': list(self.scores),
            'chosen': self.chosen,
            'lambda_max': self.lambda_max,
            'folds': self.folds,
        }


@dataclass(frozen=True, eq=False)
class SparseSolution:
    """
    .. admonition:: sparse solution

        :param Gamma: Row sparse ``p×d`` in the original predictor scale.
        :param C: ``d×2k`` with orthonormal rows.
        :param active_set: Indices of the nonzero rows of ``Gamma``.
        :param objective_trace: Penalized objective over the final pass.
        :param lam: Penalty used.
        :param converged: Whether the final pass met both stopping rules.
        :param diagnostics: Warnings collected while fitting.
        :param passes: Objective traces of every weighting pass.
        :param path: Cross validation path when ``λ`` was chosen by it.

    """

    Gamma: FloatArray
    C: FloatArray
    active_set: tuple[int, ...]
    objective_trace: tuple[float, ...]
    lam: float
    converged: bool = True
    diagnostics: tuple[str, ...] = field(default=())
    passes: tuple[tuple[float, ...], ...] = field(default=())
    path: LambdaPath | None = None


def _prepared(data: Dataset, design: FourierDesign, cfg: AdmmConfig) -> tuple[FloatArray, FloatArray, FloatArray]:
    if design.q != data.q:
        msg = f'Design has response dimension {design.q}, data has {data.q}'
        raise ValueError(msg)

    def unit_sd(M: FloatArray) -> FloatArray:
        sd = M.std(axis=0, ddof=1)
        return np.where(sd > 0.0, sd, 1.0)

    x_sd = unit_sd(data.X) if cfg.scale_x else np.ones(data.p)
    Y = data.Y / unit_sd(data.Y) if cfg.scale_y else data.Y
    return data.X / x_sd, fourier_features(Y, design.W), x_sd


def _fold_score(
    X: FloatArray,
    F: FloatArray,
    parts: Sequence[npt.NDArray[np.intp]],
    d: int,
    cfg: AdmmConfig,
    lam: float,
    fold: int,
) -> float:
    test = parts[fold]
    train = np.concatenate([part for j, part in enumerate(parts) if j != fold])
    fit = _iterated_admm(AdmmProblem.from_sample(X[train], F[train], cfg), d, lam, cfg)
    sigma_t, Xi_t = _moments(X[test], F[test])
    G = fit.Gamma
    return 0.5 * float(np.sum(G * (sigma_t @ G))) - float(np.sum(linalg.svdvals(Xi_t.T @ G)))


def cross_validate_lambda(
    data: Dataset,
    d: int = 1,
    m: int = 30,
    cfg: AdmmConfig | None = None,
    seed: int | None = 0,
    design: FourierDesign | None = None,
    folds: int = 5,
    n_lambda: int = 20,
    workers: int = 1,
) -> LambdaPath:
    """
    .. admonition:: cross validate lambda

        Score ``n_lambda`` log spaced penalties in ``[1e-3, 1] λ_max`` by
        the mean held out value of ``½ tr(ΓᵀΣ̂_tΓ) - ‖Ξ̂_tᵀΓ‖_*``, the
        discrepancy after optimizing ``C`` on the held out fold.

        :param data: The sample.
        :param d: Dimension.
        :param m: Number of frequencies drawn when no design is given.
        :param cfg: Configuration, ``cfg.lam`` is ignored.
        :param seed: Seed for the frequencies and the fold assignment.
        :param design: Fixed frequencies.
        :param folds: Number of folds.
        :param n_lambda: Grid size.
        :param workers: Threads fitting (penalty, fold) pairs.
        :returns: The path and the chosen penalty.

    """
    cfg = cfg or AdmmConfig()
    if folds < 2 or data.n < 2 * folds:
        msg = f'Need at least two folds of two rows, got {folds} folds for n={data.n}'
        raise ValueError(msg)
    if n_lambda < 1:
        msg = f'Grid size must be positive, got {n_lambda}'
        raise ValueError(msg)
    if design is None:
        design = FourierDesign.gaussian(data.q, m, seed)
    X, F, _ = _prepared(data, design, cfg)
    lam_max = AdmmProblem.from_sample(X, F, cfg).lambda_max
    grid = lam_max * np.logspace(-3.0, 0.0, n_lambda)

    rng = np.random.default_rng(seed)
    parts = np.array_split(rng.permutation(data.n), folds)
    lams = [float(lam) for lam in grid for _ in range(folds)]
    fold_ids = [fold for _ in grid for fold in range(folds)]
    run = partial(_fold_score, X, F, parts, d, cfg)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(run, lams, fold_ids))
    else:
        scores = [run(lam, fold) for lam, fold in zip(lams, fold_ids)]

    means = np.asarray(scores).reshape(len(grid), folds).mean(axis=1)
    chosen = float(grid[int(np.argmin(means))])
    logger.info('Cross validation chose lambda=%.4g of lambda_max=%.4g', chosen, lam_max)
    return LambdaPath(
        grid=tuple(float(lam) for lam in grid),
        scores=tuple(float(s) for s in means),
        chosen=chosen,
        lambda_max=lam_max,
        folds=folds,
    )


def admmft(
    data: Dataset,
    d: int = 1,
    m: int = 30,
    lam: float | None = None,
    cfg: AdmmConfig | None = None,
    seed: int | None = 0,
    design: FourierDesign | None = None,
    workers: int = 1,
) -> SparseSolution:
    """
    .. admonition:: admmft

        :param data: The sample, ``p`` may exceed ``n``.
        :param d: Dimension.
        :param m: Number of frequencies drawn when no design is given.
        :param lam: Penalty, overrides ``cfg.lam``; cross validated when
                    both are ``None``.
        :param cfg: Configuration.
        :param seed: Seed for the frequencies and the folds.
        :param design: Fixed frequencies.
        :param workers: Threads used by the cross validation.
        :returns: The row sparse solution.
        :raises DimensionOutOfRange: Unless ``1 <= d <= p``.

    """
    cfg = cfg or AdmmConfig()
    if design is None:
        design = FourierDesign.gaussian(data.q, m, seed)
    path = None
    if lam is None:
        lam = cfg.lam
    if lam is None:
        path = cross_validate_lambda(data, d, m, cfg, seed, design, workers=workers)
        lam = path.chosen
    X, F, x_sd = _prepared(data, design, cfg)
    fit = _iterated_admm(AdmmProblem.from_sample(X, F, cfg), d, lam, cfg)
    Gamma = fit.Gamma / x_sd[:, np.newaxis]
    active = tuple(int(j) for j in np.flatnonzero(np.linalg.norm(Gamma, axis=1) > 0.0))
    return SparseSolution(
        Gamma=Gamma,
        C=fit.C,
        active_set=active,
        objective_trace=fit.passes[-1],
        lam=float(lam),
        converged=fit.converged,
        diagnostics=fit.notes,
        passes=fit.passes,
        path=path,
    )


@dataclass(frozen=True)
class SparseEstimator(BaseEstimator):
    """
    .. admonition:: sparse estimator

        :param m: Number of frequencies.
        :param lam: Penalty, cross validated when ``None``.
        :param cfg: ADMM configuration.
        :param seed: Seed for the frequencies and the folds.
        :param workers: Threads used by the cross validation.

    """

    m: int = 30
    lam: float | None = None
    cfg: AdmmConfig = field(default_factory=AdmmConfig)
    seed: int | None = 0
    workers: int = 1

    @property
    def label(self) -> str:
        return 'admm'

    def fit(self, data: Dataset, d: int) -> SubspaceBasis:
        sol = admmft(data, d, self.m, self.lam, self.cfg, self.seed, workers=self.workers)
        s = linalg.svdvals(sol.Gamma)
        spectrum = np.zeros(data.p)
        spectrum[: s.size] = s**2
        return SubspaceBasis(
            B=sol.Gamma,
            eigvals=spectrum[:d].copy(),
            full_spectrum=spectrum,
            method=self.label,
            diagnostics=sol.diagnostics,
        )

    def with_param(self, name: str, value: float) -> Self:
        if name != 'lam':
            return super().with_param(name, value)
        return replace(self, lam=value)
