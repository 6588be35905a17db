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
Estimator dispatch
------------------

.. admonition:: One call front end

    ``estimate(data, d, method, **opts)`` builds the estimator registered
    under ``method`` from the keyword options and fits it.

    +----------+-----------------------------------------------------------+
    | method   | options                                                   |
    +==========+===========================================================+
    | FM, CM   | space, density, sw2, st2, h, threshold, raw_y, workers    |
    +----------+-----------------------------------------------------------+
    | iht      | standardize_y, normalize                                  |
    +----------+-----------------------------------------------------------+
    | invfm    | k, seed, scale, scale_x, scale_y, design                  |
    +----------+-----------------------------------------------------------+
    | xire     | kind, m, seed, blocks, init, scale_y                      |
    +----------+-----------------------------------------------------------+
    | sparse   | m, lam, cfg, seed, workers                                |
    +----------+-----------------------------------------------------------+

"""

from collections.abc import Callable, Mapping
from typing import Any

from ..data_model import Dataset
from ..subspace import SubspaceBasis
from . import BaseEstimator
from .ftire import XireEstimator
from .iht import IhtEstimator
from .invfm import InvfmEstimator
from .itm_kernels import ItmConfig, ItmEstimator, Method
from .sparse_admm import SparseEstimator

__all__ = ['METHODS', 'make_estimator', 'estimate']


def _itm(method: Method) -> Callable[..., BaseEstimator]:
    def build(workers: int = 1, **opts: Any) -> BaseEstimator:
        return ItmEstimator(ItmConfig(method=method, **opts), workers)

    return build


METHODS: Mapping[str, Callable[..., BaseEstimator]] = {
    'FM': _itm(Method.FM),
    'CM': _itm(Method.CM),
    'iht': IhtEstimator,
    'invfm': InvfmEstimator,
    'xire': XireEstimator,
    'sparse': SparseEstimator,
}


def make_estimator(method: str, **opts: Any) -> BaseEstimator:
    """
    .. admonition:: make estimator

        :param method: Key of ``METHODS``.
        :param opts: Options of the estimator.
        :returns: The configured estimator.
        :raises ValueError: If the method is unknown.

    """
    if (factory := METHODS.get(method)) is None:
        msg = f'Unknown method {method!r}, expected one of {sorted(METHODS)}'
        raise ValueError(msg)
    return factory(**opts)


def estimate(data: Dataset, d: int, method: str = 'FM', **opts: Any) -> SubspaceBasis:
    """
    .. admonition:: estimate

        :param data: The sample.
        :param d: Dimension.
        :param method: Key of ``METHODS``.
        :param opts: Options of the estimator.
        :returns: The estimated basis.

    """
    return make_estimator(method, **opts).fit(data, d)
