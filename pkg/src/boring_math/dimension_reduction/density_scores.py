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
Density Scores
--------------

.. admonition:: Log density gradients of the predictors

    The candidate matrices need the score ``g(z) = ∇ log f(z)`` of the
    whitened predictor density at every sample point, and a low density
    indicator ``Î`` used to trim points where ``f̂`` is too small.

    - **normal:** closed form ``g(z) = -z``.
    - **kernel:** Gaussian product kernel density estimate, bandwidth ``h``.
    - **elliptic:** Gaussian kernel estimate of the radius density
      combined with ``g(z) = (z/r) f'(r)/f(r) - (p-1) z/r²``.

    .. important::

       **Contract:** ``indicator[i] == 1`` iff ``fhat[i] > threshold``

       - Points whose density estimate underflows to zero are trimmed and
         counted, never raised.
       - Points with radius below ``RADIUS_TOL`` get a zero score under the
         elliptic assumption, are trimmed and counted.

    Kernel sums are evaluated in the log domain with ``logsumexp`` so the
    gradient ratio stays finite where the density itself underflows.

"""

import logging
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import cdist
from scipy.special import gammaln, logsumexp
from scipy.stats import norm

from .data_model import FloatArray

__all__ = [
    'Density',
    'ScoreField',
    'RADIUS_TOL',
    'TRIM_QUANTILE',
    'apply_threshold',
    'default_threshold',
    'kernel_density',
    'normal_score',
    'kernel_score',
    'elliptic_score',
    'score_field',
]

logger = logging.getLogger(__name__)

RADIUS_TOL = 1e-8
TRIM_QUANTILE = 0.01
_LOG_2PI = float(np.log(2.0 * np.pi))
_BLOCK_ENTRIES = 1 << 22


class Density(StrEnum):
    NORMAL = 'normal'
    KERNEL = 'kernel'
    ELLIPTIC = 'elliptic'


@dataclass(frozen=True, eq=False)
class ScoreField:
    """
    .. admonition:: score field

        :param assumption: Predictor density assumption.
        :param g: Scores at the sample points, ``n×p``.
        :param fhat: Density estimates at the sample points.
        :param indicator: Low density indicator, ``0.0`` or ``1.0`` per point.
        :param threshold: The threshold ``b`` behind the indicator.
        :param bandwidth: Kernel bandwidth, ``None`` under normality.
        :param degenerate: Number of points whose density underflowed.
        :param zero_radius: Number of points too close to the origin.

    """

    assumption: Density
    g: FloatArray
    fhat: FloatArray
    indicator: FloatArray
    threshold: float
    bandwidth: float | None = None
    degenerate: int = 0
    zero_radius: int = 0

    @property
    def trimmed(self) -> int:
        return int(np.sum(self.indicator == 0.0))

    def diagnostics(self) -> tuple[str, ...]:
        notes: list[str] = []
        if self.degenerate:
            notes.append(f'{self.degenerate} point(s) with underflowed density trimmed')
        if self.zero_radius:
            notes.append(f'{self.zero_radius} point(s) at zero radius given a zero score')
        return tuple(notes)


def apply_threshold(fhat: npt.ArrayLike, b: float) -> FloatArray:
    """
    .. admonition:: apply threshold

        :param fhat: Density estimates.
        :param b: Threshold.
        :returns: ``1.0`` where ``fhat > b``, ``0.0`` elsewhere.

    """
    return (np.asarray(fhat, dtype=np.float64) > b).astype(np.float64)


def default_threshold(fhat: FloatArray, assumption: Density) -> float:
    """
    .. admonition:: default threshold

        :returns: ``0`` under normality, otherwise the ``TRIM_QUANTILE``
                  empirical quantile of ``fhat``.

    """
    if assumption is Density.NORMAL:
        return 0.0
    return float(np.quantile(fhat, TRIM_QUANTILE))


def _check_bandwidth(h: float) -> None:
    if not h > 0.0:
        msg = f'Bandwidth must be positive, got {h}'
        raise ValueError(msg)


def kernel_density(
    points: npt.ArrayLike,
    Z: npt.ArrayLike,
    h: float,
) -> tuple[FloatArray, FloatArray]:
    """
    .. admonition:: kernel density

        Gaussian product kernel estimate built on the sample ``Z`` and
        evaluated at arbitrary points.

        :param points: Evaluation points, ``m×p``.
        :param Z: Sample, ``n×p``.
        :param h: Bandwidth.
        :returns: Density estimates (``m``) and log density gradients (``m×p``).
        :raises ValueError: If ``h`` is not positive or dimensions disagree.

    """
    _check_bandwidth(h)
    Q = np.atleast_2d(np.asarray(points, dtype=np.float64))
    S = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    if Q.shape[1] != S.shape[1]:
        msg = f'Points have dimension {Q.shape[1]}, sample has {S.shape[1]}'
        raise ValueError(msg)
    n, p = S.shape
    m = Q.shape[0]
    log_norm = np.log(n) + p * np.log(h) + 0.5 * p * _LOG_2PI
    log_f = np.empty(m)
    local_mean = np.empty((m, p))
    step = max(1, _BLOCK_ENTRIES // max(n, 1))
    for lo in range(0, m, step):
        hi = min(lo + step, m)
        log_w = -cdist(Q[lo:hi], S, 'sqeuclidean') / (2.0 * h * h)
        lse = logsumexp(log_w, axis=1)
        local_mean[lo:hi] = np.exp(log_w - lse[:, np.newaxis]) @ S
        log_f[lo:hi] = lse - log_norm
    return np.exp(log_f), -(Q - local_mean) / (h * h)


def _score_field(
    assumption: Density,
    g: FloatArray,
    fhat: FloatArray,
    b: float | None,
    bandwidth: float | None = None,
    zero_radius: int = 0,
) -> ScoreField:
    if b is None:
        b = default_threshold(fhat, assumption)
    if (degenerate := int(np.sum(fhat <= 0.0)) - zero_radius):
        logger.warning('%d point(s) with underflowed density estimate trimmed', degenerate)
    return ScoreField(
        assumption=assumption,
        g=g,
        fhat=fhat,
        indicator=apply_threshold(fhat, b),
        threshold=float(b),
        bandwidth=bandwidth,
        degenerate=degenerate,
        zero_radius=zero_radius,
    )


def normal_score(Z: npt.ArrayLike, b: float | None = 0.0) -> ScoreField:
    """
    .. admonition:: normal score

        :param Z: Whitened predictors.
        :param b: Trimming threshold, ``None`` for the default.
        :returns: Scores ``-Z`` with standard normal density values.

    """
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    fhat = np.exp(norm.logpdf(Z).sum(axis=1))
    return _score_field(Density.NORMAL, -Z, fhat, b)


def kernel_score(Z: npt.ArrayLike, h: float, b: float | None = None) -> ScoreField:
    """
    .. admonition:: kernel score

        :param Z: Whitened predictors, at least two rows.
        :param h: Bandwidth.
        :param b: Trimming threshold, ``None`` for the default quantile.
        :returns: Kernel estimates of the score and density at every row.
        :raises ValueError: If fewer than two points or ``h`` not positive.

    """
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    if Z.shape[0] < 2:
        msg = 'Kernel scores need at least two points'
        raise ValueError(msg)
    fhat, g = kernel_density(Z, Z, h)
    return _score_field(Density.KERNEL, g, fhat, b, bandwidth=h)


def elliptic_score(Z: npt.ArrayLike, h: float, b: float | None = None) -> ScoreField:
    """
    .. admonition:: elliptic score

        Under an elliptically contoured distribution the density depends
        on ``z`` only through ``r = ‖z‖``. The radius density ``f̃`` is
        estimated with a one dimensional Gaussian kernel.

        :param Z: Whitened predictors.
        :param h: Bandwidth of the radius density estimate.
        :param b: Trimming threshold, ``None`` for the default quantile.
        :returns: Scores, and densities ``f̃(r)/(|S^{p-1}| r^{p-1})``.

    """
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    _check_bandwidth(h)
    n, p = Z.shape
    r = np.linalg.norm(Z, axis=1)
    f_r, ratio = kernel_density(r[:, np.newaxis], r[:, np.newaxis], h)
    ratio = ratio[:, 0]

    ok = r >= RADIUS_TOL
    g = np.zeros((n, p))
    fhat = np.zeros(n)
    rk = r[ok]
    g[ok] = Z[ok] * (ratio[ok] / rk - (p - 1) / rk**2)[:, np.newaxis]
    log_sphere = np.log(2.0) + 0.5 * p * np.log(np.pi) - gammaln(0.5 * p)
    with np.errstate(divide='ignore'):
        fhat[ok] = np.exp(np.log(f_r[ok]) - log_sphere - (p - 1) * np.log(rk))

    if (zero_radius := int(n - np.sum(ok))):
        logger.warning('%d point(s) at zero radius given a zero score', zero_radius)
    return _score_field(Density.ELLIPTIC, g, fhat, b, bandwidth=h, zero_radius=zero_radius)


def score_field(
    assumption: Density,
    h: float,
    b: float | None,
    Z: npt.ArrayLike,
) -> ScoreField:
    """
    .. admonition:: score field

        Dispatch on the density assumption. Parameters lead so they can be
        bound with ``partial`` ahead of the data.

        :param assumption: Predictor density assumption.
        :param h: Bandwidth, ignored under normality.
        :param b: Trimming threshold, ``None`` for the default.
        :param Z: Whitened predictors.
        :returns: The score field.

    """
    match Density(assumption):
        case Density.NORMAL:
            return normal_score(Z, 0.0 if b is None else b)
        case Density.KERNEL:
            return kernel_score(Z, h, b)
        case Density.ELLIPTIC:
            return elliptic_score(Z, h, b)
