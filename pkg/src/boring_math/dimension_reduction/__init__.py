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
Dimension Reduction Library
===========================

.. admonition:: Boring Math Sufficient Dimension Reduction Library

    Estimators which replace ``p`` predictors ``X`` by a few linear
    combinations ``BᵀX`` without losing information about either the
    conditional mean or the whole conditional distribution of ``Y``.

    All estimators are built from integral transformations of the
    predictor/response relationship.

    - **Fourier and convolution candidate matrices** built from pairwise
      kernel sums, for the central mean subspace and the central subspace.
    - **Iterative Hessian transformation** through COZY vectors.
    - **Inverse Fourier method** with scaled, adjusted and weighted
      chi-square dimension tests.
    - **Minimum discrepancy** estimators, the FT-IRE family.
    - **Sparse inverse regression** through an iterated ADMM with a
      coordinate independent row penalty, for ``p`` possibly larger
      than ``n``.

.. admonition:: Supporting machinery

    - Standardization and whitening of a sample.
    - Log density gradient (score) estimators.
    - Trace correlation distance between subspaces.
    - Bootstrap selection of the dimension and of tuning parameters.
    - Synthetic models with brute force oracles.
    - The ``sdr-kit`` command line front end.

"""

__author__ = 'Geoffrey R. Scheller'
__copyright__ = 'Copyright (c) 2026 Geoffrey R. Scheller'
__license__ = 'Apache License 2.0'
