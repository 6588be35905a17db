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

import numpy as np
import pytest
from boring_math.dimension_reduction.data_model import Dataset, StandardizedSample, standardize
from boring_math.dimension_reduction.errors import ZeroCozy
from boring_math.dimension_reduction.estimators import IhtEstimator, estimate
from boring_math.dimension_reduction.estimators.iht import cozy_matrix, iht_estimate, iht_moments
from boring_math.dimension_reduction.subspace import trace_correlation


class TestMoments:
    def test_two_points(self) -> None:
        state = iht_moments(StandardizedSample.whitened([[1.0], [-1.0]], [1.0, 1.0]))
        assert np.allclose(state.gamma_yz, [0.0])
        assert np.allclose(state.sigma_yzz, [[1.0]])

    def test_zero_response(self) -> None:
        rng = np.random.default_rng(1)
        sample = standardize(Dataset(rng.standard_normal((30, 3)), rng.standard_normal(30)))
        state = iht_moments(sample, np.zeros(30))
        assert np.allclose(state.gamma_yz, 0.0)
        assert np.allclose(state.sigma_yzz, 0.0)
        with pytest.raises(ZeroCozy):
            cozy_matrix(state)

    def test_unit_response(self) -> None:
        rng = np.random.default_rng(2)
        sample = standardize(Dataset(rng.standard_normal((400, 3)), rng.standard_normal(400)))
        state = iht_moments(sample, np.ones(400))
        assert np.allclose(state.gamma_yz, 0.0, atol=1e-12)
        assert np.allclose(state.sigma_yzz, np.eye(3) * 399 / 400, atol=1e-12)

    def test_length_mismatch(self) -> None:
        sample = StandardizedSample.whitened([[1.0], [-1.0]], [1.0, 1.0])
        with pytest.raises(ValueError):
            iht_moments(sample, [1.0, 2.0, 3.0])


class TestCozyMatrix:
    def test_krylov_recursion(self) -> None:
        rng = np.random.default_rng(4)
        Z = rng.standard_normal((50, 4))
        y = Z[:, 0] + Z[:, 1] ** 2
        state = cozy_matrix(iht_moments(StandardizedSample.whitened(Z, y)), normalize=False)
        assert state.M is not None
        for j in range(1, 4):
            residual = state.M[:, j] - state.sigma_yzz @ state.M[:, j - 1]
            assert np.max(np.abs(residual)) <= 1e-12 * max(1.0, float(np.max(np.abs(state.M[:, j]))))

    def test_normalized_columns_span_the_same_space(self) -> None:
        rng = np.random.default_rng(5)
        Z = rng.standard_normal((60, 3))
        y = Z[:, 0] * Z[:, 2] + Z[:, 0]
        raw = cozy_matrix(iht_moments(StandardizedSample.whitened(Z, y)), normalize=False)
        unit = cozy_matrix(iht_moments(StandardizedSample.whitened(Z, y)))
        assert unit.M is not None and raw.M is not None
        assert np.allclose(np.linalg.norm(unit.M, axis=0), 1.0)
        for j in range(1, 4):
            assert trace_correlation(raw.M[:, :j], unit.M[:, :j]) == pytest.approx(1.0)

    def test_eigenvector_collapse(self) -> None:
        Z = np.array([[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]])
        y = np.array([2.0, 0.0, 2.0, 0.0])
        state = cozy_matrix(iht_moments(StandardizedSample.whitened(Z, y)))
        assert state.Psi is not None
        lam = np.linalg.eigvalsh(state.Psi)
        assert lam[0] == pytest.approx(0.0, abs=1e-12)
        assert lam[1] > 0.5


class TestIhtEstimate:
    def test_leading_direction(self) -> None:
        rng = np.random.default_rng(6)
        X = rng.standard_normal((500, 4))
        data = Dataset(X, np.exp(0.5 * X[:, 2]))
        basis = IhtEstimator().fit(data, 1)
        assert basis.method == 'iht'
        assert trace_correlation(basis, np.eye(4)[:, 2]) > 0.95
        assert np.allclose(estimate(data, 1, 'iht').B, basis.B)

    def test_fit_path(self) -> None:
        rng = np.random.default_rng(7)
        X = rng.standard_normal((100, 3))
        path = IhtEstimator().fit_path(Dataset(X, X[:, 0]), (1, 2))
        assert path[2].B.shape == (3, 2)

    def test_multivariate_response(self) -> None:
        rng = np.random.default_rng(8)
        data = Dataset(rng.standard_normal((20, 2)), rng.standard_normal((20, 2)))
        with pytest.raises(ValueError):
            IhtEstimator().fit(data, 1)

    @pytest.mark.slow
    def test_monotone_single_index(self) -> None:
        rng = np.random.default_rng(5000)
        X = rng.standard_normal((5000, 6))
        sample = standardize(Dataset(X, X[:, 0] + 0.1 * rng.standard_normal(5000)))
        basis = iht_estimate(sample, None, 1)
        assert trace_correlation(basis, np.eye(6)[:, 0]) > 0.99
