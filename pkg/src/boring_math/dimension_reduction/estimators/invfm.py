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
Inverse Fourier Method
----------------------

.. admonition:: Fourier transformation of the inverse regression

    For frequencies ``ω_1, ..., ω_k`` in response space the sample kernel

    ``ψ̂(ω) = n⁻¹ Σⱼ exp(i ωᵀyⱼ) zⱼ = â(ω) + i b̂(ω)``

    is computed for every frequency, the real and imaginary parts are
    interleaved as the columns of ``Ω̂`` (``p×2k``) and the leading
    eigenvectors of ``V̂ = Ω̂ Ω̂ᵀ``, back transformed by ``Σ̂^{-1/2}``,
    estimate the central subspace. Responses may be multivariate.

    **Dimension tests** of ``H₀: d = m`` use ``Λ̂_m = n Σ_{j>m} λ̂ⱼ``:

    - **weighted:** ``Λ̂_m`` against ``Σ_{j>m} n λ̂ⱼ χ²₁`` by Monte Carlo
    - **scaled:** ``Λ̂_m p*/tr(V̂)`` against ``χ²_{p*}``
    - **adjusted:** ``Λ̂_m s*/tr(V̂)`` against ``χ²_{s*}``

    where ``p* = (p-m)(2k-m)`` and ``s* = tr(V̂)²/tr(V̂²)``, so that
    ``1 <= s* <= rank(V̂)``.

    .. note::

        A kernel built from data also keeps its per-sample Fourier
        features. It then reports a fourth, **asymptotic** statistic:
        ``Λ̂_m`` against ``Σ ŵᵢ χ²₁`` where ``ŵᵢ`` are the eigenvalues of
        ``Ŵ``, the empirical covariance of the per-sample contributions to
        ``Ω̂`` projected on its trailing left and right singular vectors.

"""

import logging
from collections.abc import Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Self

import numpy as np
import numpy.typing as npt
from pythonic_fp.fptools.function import partial
from scipy import linalg, stats

from ..data_model import Dataset, FloatArray, StandardizedSample, standardize
from ..errors import InvalidM
from ..subspace import SubspaceBasis, extract_basis
from . import BaseEstimator

__all__ = [
    'DEGENERATE_TRACE',
    'MC_DRAWS',
    'FourierDesign',
    'fourier_features',
    'psi_hat',
    'InvfmKernel',
    'invfm_kernel',
    'InvfmResult',
    'invfm_estimate',
    'TestStatistic',
    'DimensionTestReport',
    'weighted_chi2_sf',
    'dimension_tests',
    'SequentialTestResult',
    'sequential_dimension_test',
    'InvfmEstimator',
]

logger = logging.getLogger(__name__)

DEGENERATE_TRACE = 1e-24
MC_DRAWS = 100_000
_MC_ENTRIES = 1 << 21


@dataclass(frozen=True, eq=False)
class FourierDesign:
    """
    .. admonition:: Fourier design

        :param W: Frequencies as the columns of a ``q×k`` matrix.
        :param seed: Seed the frequencies were drawn with, if any.

    """

    W: FloatArray
    seed: int | None = None

    def __post_init__(self) -> None:
        W = np.array(self.W, dtype=np.float64, ndmin=2)
        if W.shape[1] < 1:
            msg = 'A Fourier design needs at least one frequency'
            raise ValueError(msg)
        if not np.all(np.isfinite(W)):
            msg = 'Frequencies must be finite'
            raise ValueError(msg)
        W.setflags(write=False)
        object.__setattr__(self, 'W', W)

    @classmethod
    def gaussian(cls, q: int, k: int, seed: int | None = None, scale: float = 1.0) -> Self:
        """
        .. admonition:: gaussian

            :param q: Response dimension.
            :param k: Number of frequencies.
            :param seed: Seed for ``numpy.random.default_rng``.
            :param scale: Standard deviation of the frequency entries.
            :returns: Design with iid ``N(0, scale²)`` frequencies.

        """
        if scale <= 0.0:
            msg = f'Frequency scale must be positive, got {scale}'
            raise ValueError(msg)
        if k < 1:
            msg = f'Number of frequencies must be positive, got {k}'
            raise ValueError(msg)
        rng = np.random.default_rng(seed)
        return cls(scale * rng.standard_normal((q, k)), seed)

    @property
    def q(self) -> int:
        return int(self.W.shape[0])

    @property
    def k(self) -> int:
        return int(self.W.shape[1])


def fourier_features(Y: npt.ArrayLike, W: npt.ArrayLike) -> FloatArray:
    """
    .. admonition:: Fourier features

        :param Y: Responses, ``n×q``.
        :param W: Frequencies, ``q×k``.
        :returns: ``n×2k`` matrix with columns ``cos(ω_rᵀy)``, ``sin(ω_rᵀy)``
                  interleaved per frequency.

    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, np.newaxis]
    W = np.array(W, dtype=np.float64, ndmin=2)
    if W.shape[0] != Y.shape[1]:
        msg = f'Frequencies have dimension {W.shape[0]}, responses {Y.shape[1]}'
        raise ValueError(msg)
    T = Y @ W
    F = np.empty((T.shape[0], 2 * T.shape[1]))
    F[:, 0::2] = np.cos(T)
    F[:, 1::2] = np.sin(T)
    return F


def psi_hat(sample: StandardizedSample, Y: npt.ArrayLike, w: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """
    .. admonition:: psi hat

        :param sample: Standardized sample.
        :param Y: Responses, ``n×q``.
        :param w: Frequency, a ``q`` vector.
        :returns: ``n⁻¹ Σⱼ exp(i ωᵀyⱼ) zⱼ``.

    """
    F = fourier_features(Y, np.asarray(w, dtype=np.float64).reshape(-1, 1))
    e = F[:, 0] + 1j * F[:, 1]
    return (sample.Z.T @ e) / sample.n


@dataclass(frozen=True, eq=False)
class InvfmKernel:
    """
    .. admonition:: invFM kernel

        :param Omega: ``Ω̂``, ``p×2k`` with real and imaginary parts interleaved.
        :param V: ``V̂ = Ω̂ Ω̂ᵀ``.
        :param trace_v: ``tr(V̂)``.
        :param Z: Whitened predictors the kernel was built from, if kept.
        :param F: Fourier features of the responses, if kept.

    """

    Omega: FloatArray
    V: FloatArray
    trace_v: float
    Z: FloatArray | None = None
    F: FloatArray | None = None

    def __post_init__(self) -> None:
        V = self.V
        scale = max(1.0, float(np.max(np.abs(V), initial=0.0)))
        if float(np.max(np.abs(V - V.T), initial=0.0)) > 1e-10 * scale:
            msg = 'Kernel V is not symmetric'
            raise ValueError(msg)

    @classmethod
    def from_omega(cls, Omega: npt.ArrayLike) -> Self:
        """
        .. admonition:: from omega

            :param Omega: ``p×2k`` matrix.
            :returns: Kernel without per-sample data.

        """
        Om = np.array(Omega, dtype=np.float64, ndmin=2)
        if Om.shape[1] % 2:
            msg = f'Omega needs an even number of columns, got {Om.shape[1]}'
            raise ValueError(msg)
        V = Om @ Om.T
        V = (V + V.T) / 2
        return cls(Om, V, float(np.trace(V)))

    @property
    def p(self) -> int:
        return int(self.Omega.shape[0])

    @property
    def k(self) -> int:
        return int(self.Omega.shape[1]) // 2

    @property
    def per_sample(self) -> bool:
        return self.Z is not None and self.F is not None

    @property
    def degenerate(self) -> bool:
        return self.trace_v < DEGENERATE_TRACE


def invfm_kernel(sample: StandardizedSample, Y: npt.ArrayLike, design: FourierDesign) -> InvfmKernel:
    """
    .. admonition:: invFM kernel

        :param sample: Standardized sample.
        :param Y: Responses, ``n×q``.
        :param design: Frequencies.
        :returns: The kernel, keeping the per-sample features.

    """
    F = fourier_features(Y, design.W)
    if F.shape[0] != sample.n:
        msg = f'Responses have {F.shape[0]} rows, sample has {sample.n}'
        raise ValueError(msg)
    Omega = sample.Z.T @ F / sample.n
    V = Omega @ Omega.T
    V = (V + V.T) / 2
    return InvfmKernel(Omega, V, float(np.trace(V)), sample.Z, F)


@dataclass(frozen=True, eq=False)
class InvfmResult:
    basis: SubspaceBasis
    kernel: InvfmKernel
    design: FourierDesign


def _fourier_sample(data: Dataset, scale_x: bool, scale_y: bool) -> tuple[StandardizedSample, FloatArray]:
    sample = standardize(data, standardize_y=scale_y, scale_x=scale_x)
    return sample, sample.response(raw=not scale_y)


def _kernel_basis(kernel: InvfmKernel, d: int, sample: StandardizedSample) -> SubspaceBasis:
    basis = extract_basis(kernel.V, d, sample.sigma_inv_sqrt, 'invfm')
    if kernel.degenerate:
        note = f'DegenerateKernel: tr(V) = {kernel.trace_v:.3g}, eigenvectors are arbitrary'
        logger.warning(note)
        basis = basis.with_diagnostics(note)
    return basis


def invfm_estimate(
    data: Dataset,
    d: int,
    design: FourierDesign,
    scale_x: bool = True,
    scale_y: bool = True,
) -> InvfmResult:
    """
    .. admonition:: invFM estimate

        :param data: The sample, the response may be multivariate.
        :param d: Dimension.
        :param design: Frequencies, ``q×k``.
        :param scale_x: Whiten the predictors, otherwise only center them.
        :param scale_y: Divide each response column by its standard deviation.
        :returns: Basis, kernel and design.
        :raises DimensionOutOfRange: Unless ``1 <= d <= p``.

    """
    if design.q != data.q:
        msg = f'Design has response dimension {design.q}, data has {data.q}'
        raise ValueError(msg)
    sample, Y = _fourier_sample(data, scale_x, scale_y)
    kernel = invfm_kernel(sample, Y, design)
    return InvfmResult(_kernel_basis(kernel, d, sample), kernel, design)


class TestStatistic(StrEnum):
    WEIGHTED = 'weighted'
    SCALED = 'scaled'
    ADJUSTED = 'adjusted'
    ASYMPTOTIC = 'asymptotic'


@dataclass(frozen=True)
class DimensionTestReport:
    """
    .. admonition:: dimension test report

        :param m: Hypothesized dimension.
        :param stats: Statistic per ``TestStatistic`` name.
        :param pvalues: p-value per ``TestStatistic`` name.
        :param dof: ``p_star`` and ``s_star``.
        :param asymptotic: Whether the asymptotic statistic was computed
                           from per-sample features.
        :param draws: Monte Carlo draws behind the weighted p-value.

    """

    m: int
    stats: Mapping[str, float]
    pvalues: Mapping[str, float]
    dof: Mapping[str, float]
    asymptotic: bool = False
    draws: int = 0

    def to_dict(self) -> dict[str, object]:
        return {
            'm': self.m,
            'stats': dict(self.stats),
            'pvalues': dict(self.pvalues),
            'dof': dict(self.dof),
            'asymptotic': self.asymptotic,
            'draws': self.draws,
        }


def _null_contributions(Z: FloatArray, F: FloatArray, Omega: FloatArray, m: int) -> FloatArray:
    U, _, Vt = linalg.svd(Omega, full_matrices=True)
    P = U[:, m:]
    R = Vt[m:, :].T
    Fc = F - F.mean(axis=0)
    a = Fc @ R
    b = Z @ P
    n = a.shape[0]
    # column major vec of b_j a_jᵀ
    return (a[:, :, np.newaxis] * b[:, np.newaxis, :]).reshape(n, -1)


def _null_weights(K: FloatArray) -> FloatArray:
    n, cols = K.shape
    Kc = K - K.mean(axis=0)
    if cols <= n:
        G = Kc.T @ Kc / n
    else:
        G = Kc @ Kc.T / n
    w = linalg.eigvalsh((G + G.T) / 2)
    return np.clip(w[::-1], 0.0, None)


def _exceedances(weights: FloatArray, stat: float, size: int, seed: np.random.SeedSequence) -> int:
    rng = np.random.Generator(np.random.Philox(seed))
    draws = rng.chisquare(1.0, size=(size, weights.size)) @ weights
    return int(np.count_nonzero(draws >= stat))


def weighted_chi2_sf(
    weights: npt.ArrayLike,
    stat: float,
    draws: int = MC_DRAWS,
    seed: int = 0,
    workers: int = 1,
) -> float:
    """
    .. admonition:: weighted chi-square survival function

        :param weights: Nonnegative weights ``wᵢ``.
        :param stat: Observed statistic.
        :param draws: Monte Carlo draws.
        :param seed: Seed, chunk ``c`` draws from spawned stream ``c``.
        :param workers: Threads drawing chunks.
        :returns: Monte Carlo estimate of ``P(Σ wᵢ χ²₁ ≥ stat)``.

    """
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    w = w[w > 0.0]
    if w.size == 0 or stat <= 0.0:
        return 1.0 if stat <= 0.0 else 0.0
    chunk = max(1, min(draws, _MC_ENTRIES // w.size))
    sizes = [min(chunk, draws - lo) for lo in range(0, draws, chunk)]
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    run = partial(_exceedances, w, stat)
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, sizes, streams))
    else:
        counts = [run(size, stream) for size, stream in zip(sizes, streams)]
    return sum(counts) / draws


def dimension_tests(
    kernel: InvfmKernel,
    n: int,
    m: int,
    draws: int = MC_DRAWS,
    seed: int = 0,
    workers: int = 1,
) -> DimensionTestReport:
    """
    .. admonition:: dimension tests

        :param kernel: invFM kernel.
        :param n: Sample size.
        :param m: Hypothesized dimension.
        :param draws: Monte Carlo draws for the weighted test.
        :param seed: Seed for the Monte Carlo draws.
        :param workers: Threads drawing Monte Carlo chunks.
        :returns: The statistics with p-values, the asymptotic one only for
                  kernels holding per-sample features.
        :raises InvalidM: Unless ``0 <= m < p`` and ``p* > 0``.

    """
    p, k = kernel.p, kernel.k
    if not 0 <= m < p:
        msg = f'Hypothesized dimension m={m} outside of 0 <= m < {p}'
        raise InvalidM(msg)
    if (p_star := (p - m) * (2 * k - m)) <= 0:
        msg = f'No degrees of freedom left, p*={p_star} for m={m}, k={k}'
        raise InvalidM(msg)

    lam = np.sort(np.clip(linalg.eigvalsh(kernel.V), 0.0, None))[::-1]
    Lambda = float(n * lam[m:].sum())

    tr_v = kernel.trace_v
    tr_v2 = float(np.sum(lam**2))
    s_star = tr_v**2 / tr_v2 if tr_v2 > 0.0 else 1.0
    if tr_v > 0.0:
        scaled = Lambda * p_star / tr_v
        adjusted = Lambda * s_star / tr_v
    else:
        scaled = adjusted = 0.0 if Lambda <= 0.0 else np.inf

    stats_ = {
        TestStatistic.WEIGHTED.value: Lambda,
        TestStatistic.SCALED.value: float(scaled),
        TestStatistic.ADJUSTED.value: float(adjusted),
    }
    pvalues = {
        TestStatistic.WEIGHTED.value: weighted_chi2_sf(n * lam[m:], Lambda, draws, seed, workers),
        TestStatistic.SCALED.value: float(stats.chi2.sf(scaled, p_star)),
        TestStatistic.ADJUSTED.value: float(stats.chi2.sf(adjusted, s_star)),
    }
    if kernel.Z is not None and kernel.F is not None:
        null_weights = _null_weights(_null_contributions(kernel.Z, kernel.F, kernel.Omega, m))
        stats_[TestStatistic.ASYMPTOTIC.value] = Lambda
        pvalues[TestStatistic.ASYMPTOTIC.value] = weighted_chi2_sf(null_weights, Lambda, draws, seed, workers)
    return DimensionTestReport(
        m=m,
        stats=stats_,
        pvalues={key: float(np.clip(val, 0.0, 1.0)) for key, val in pvalues.items()},
        dof={'p_star': float(p_star), 's_star': float(s_star)},
        asymptotic=kernel.per_sample,
        draws=draws,
    )


@dataclass(frozen=True)
class SequentialTestResult:
    """
    .. admonition:: sequential test result

        :param d: Estimated dimension, the first ``m`` not rejected.
        :param statistic: Statistic the decisions were based on.
        :param level: Significance level.
        :param reports: One report per tested ``m``.

    """

    d: int
    statistic: TestStatistic
    level: float
    reports: tuple[DimensionTestReport, ...] = field(default=())

    def to_dict(self) -> dict[str, object]:
        return {
            'd': self.d,
            'statistic': self.statistic.value,
            'level': self.level,
            'reports': [report.to_dict() for report in self.reports],
        }


def sequential_dimension_test(
    kernel: InvfmKernel,
    n: int,
    level: float = 0.05,
    statistic: TestStatistic | str = TestStatistic.SCALED,
    ms: Iterable[int] | None = None,
    draws: int = MC_DRAWS,
    seed: int = 0,
    workers: int = 1,
) -> SequentialTestResult:
    """
    .. admonition:: sequential dimension test

        Test ``m = 0, 1, ...`` until the statistic fails to reject.

        :param kernel: invFM kernel.
        :param n: Sample size.
        :param level: Significance level.
        :param statistic: Statistic the decision is based on.
        :param ms: Hypotheses to walk through, all testable ``m`` if ``None``.
        :param draws: Monte Carlo draws for the weighted test.
        :param seed: Seed for the Monte Carlo draws.
        :param workers: Threads drawing Monte Carlo chunks.
        :returns: The first non-rejected ``m``, or one past the last
                  hypothesis when every one is rejected.

    """
    if not 0.0 < level < 1.0:
        msg = f'Level must lie in (0, 1), got {level}'
        raise ValueError(msg)
    statistic = TestStatistic(statistic)
    if statistic is TestStatistic.ASYMPTOTIC and not kernel.per_sample:
        msg = 'The asymptotic statistic needs a kernel holding per-sample features'
        raise ValueError(msg)
    if ms is None:
        ms = range(min(kernel.p, 2 * kernel.k))
    reports: list[DimensionTestReport] = []
    d = 0
    for m in ms:
        report = dimension_tests(kernel, n, m, draws, seed, workers)
        reports.append(report)
        d = m
        if report.pvalues[statistic.value] >= level:
            break
        d = m + 1
    return SequentialTestResult(d, statistic, level, tuple(reports))


@dataclass(frozen=True)
class InvfmEstimator(BaseEstimator):
    """
    .. admonition:: invFM estimator

        :param k: Number of frequencies drawn when no design is given.
        :param seed: Seed for the frequencies.
        :param scale: Standard deviation of the drawn frequencies.
        :param scale_x: Whiten the predictors.
        :param scale_y: Scale each response column to unit variance.
        :param design: Fixed frequencies, overrides ``k``, ``seed``, ``scale``.

    """

    k: int = 10
    seed: int | None = 0
    scale: float = 1.0
    scale_x: bool = True
    scale_y: bool = True
    design: FourierDesign | None = None

    @property
    def label(self) -> str:
        return 'invfm'

    def design_for(self, data: Dataset) -> FourierDesign:
        if self.design is not None:
            return self.design
        return FourierDesign.gaussian(data.q, self.k, self.seed, self.scale)

    def fit(self, data: Dataset, d: int) -> SubspaceBasis:
        return invfm_estimate(data, d, self.design_for(data), self.scale_x, self.scale_y).basis

    def fit_path(self, data: Dataset, dims: Iterable[int]) -> dict[int, SubspaceBasis]:
        sample, Y = _fourier_sample(data, self.scale_x, self.scale_y)
        kernel = invfm_kernel(sample, Y, self.design_for(data))
        return {d: _kernel_basis(kernel, d, sample) for d in dims}
