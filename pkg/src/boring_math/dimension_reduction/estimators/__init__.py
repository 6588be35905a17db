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
Estimators of Dimension Reduction Subspaces
-------------------------------------------

.. admonition:: Integral transformation estimators

    Every estimator maps a ``Dataset`` and a dimension ``d`` to a
    ``SubspaceBasis`` in the original predictor scale.

    **Spectral estimators** build one ``p×p`` candidate matrix and keep
    its leading eigenvectors:

    - **ItmEstimator:** Fourier (FM) or convolution (CM) candidate
      matrices for the central mean subspace or the central subspace.
    - **IhtEstimator:** iterative Hessian transformation.
    - **InvfmEstimator:** inverse Fourier method.

    **Discrepancy estimators** minimize a quadratic form in ``ξ̂``:

    - **XireEstimator:** the FT-IRE family.
    - **SparseEstimator:** row sparse estimation through iterated ADMM.

    **Implementation Details**

    - **BaseEstimator:** Abstract base class of the estimators. Concrete
      estimators are frozen dataclasses so they can be shared between
      bootstrap worker threads.
    - **estimate:** one call front end dispatching on a method name.

"""

from abc import ABC, abstractmethod
from collections.abc import Iterable
from typing import Self

from ..data_model import Dataset
from ..subspace import SubspaceBasis

__all__ = [
    'BaseEstimator',
    'ItmEstimator',
    'IhtEstimator',
    'InvfmEstimator',
    'XireEstimator',
    'SparseEstimator',
    'METHODS',
    'make_estimator',
    'estimate',
]


class BaseEstimator(ABC):
    """
    .. admonition:: abstract base class for estimators

        Subclasses provide ``fit``. Spectral estimators also override
        ``fit_path`` so the candidate matrix is built once for all
        dimensions, and tunable estimators override ``with_param``.

    """

    @property
    @abstractmethod
    def label(self) -> str:
        """Short method name stored on every basis the estimator returns."""
        ...

    @abstractmethod
    def fit(self, data: Dataset, d: int) -> SubspaceBasis:
        """
        .. admonition:: fit

            :param data: The sample.
            :param d: Dimension of the estimated subspace.
            :returns: The estimated basis.

        """
        ...

    def fit_path(self, data: Dataset, dims: Iterable[int]) -> dict[int, SubspaceBasis]:
        """
        .. admonition:: fit path

            :param data: The sample.
            :param dims: Dimensions to estimate.
            :returns: Estimated basis for every requested dimension.

        """
        return {d: self.fit(data, d) for d in dims}

    def with_param(self, name: str, value: float) -> Self:
        """
        .. admonition:: with parameter

            :param name: Tuning parameter name.
            :param value: New value.
            :returns: A copy of the estimator using the new value.
            :raises ValueError: If the estimator has no such parameter.

        """
        msg = f'{type(self).__name__} has no tuning parameter {name!r}'
        raise ValueError(msg)


from .itm_kernels import ItmEstimator  # noqa: E402
from .iht import IhtEstimator  # noqa: E402
from .invfm import InvfmEstimator  # noqa: E402
from .ftire import XireEstimator  # noqa: E402
from .sparse_admm import SparseEstimator  # noqa: E402
from .dispatch import METHODS, estimate, make_estimator  # noqa: E402
