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
from boring_math.dimension_reduction.data_model import (
    CandidateMatrix,
    Dataset,
    Recipe,
    StandardizedSample,
    inverse_sqrt,
    sample_covariance,
    scale_columns,
    standardize,
)
from boring_math.dimension_reduction.errors import SingularCovariance


def random_spd(p: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((p, p))
    return A @ A.T + p * np.eye(p)


class TestDataset:
    def test_shapes_and_names(self) -> None:
        data = Dataset(np.arange(12.0).reshape(4, 3), [1.0, 2.0, 3.0, 5.0])
        assert (data.n, data.p, data.q) == (4, 3, 1)
        assert data.x_names == ('x1', 'x2', 'x3')
        assert data.y_names == ('y1',)
        assert not data.X.flags.writeable

    def test_take_repeats_rows(self) -> None:
        data = Dataset(np.arange(8.0).reshape(4, 2), np.arange(4.0), x_names=('a', 'b'))
        sub = data.take([3, 3, 0])
        assert sub.n == 3
        assert np.array_equal(sub.Y[:, 0], [3.0, 3.0, 0.0])
        assert sub.x_names == ('a', 'b')

    def test_rejects_bad_input(self) -> None:
        with pytest.raises(ValueError):
            Dataset(np.zeros((3, 2)), np.zeros(4))
        with pytest.raises(ValueError):
            Dataset(np.zeros((1, 2)), np.zeros(1))
        with pytest.raises(ValueError):
            Dataset([[1.0, np.nan], [0.0, 1.0]], [0.0, 1.0])
        try:
            Dataset(np.zeros((3, 2)), np.zeros(3), x_names=('only_one',))
        except ValueError as err:
            assert str(err) == 'Number of column labels does not match the data'
        else:
            assert False


class TestInverseSqrt:
    def test_identity(self) -> None:
        assert np.allclose(inverse_sqrt(np.eye(3)), np.eye(3))

    def test_diagonal(self) -> None:
        assert np.allclose(inverse_sqrt(np.diag([4.0, 1.0])), np.diag([0.5, 1.0]))

    def test_random_spd(self) -> None:
        S = random_spd(5, 7)
        R = inverse_sqrt(S)
        assert np.allclose(R, R.T, atol=1e-12)
        assert np.allclose(R @ S @ R, np.eye(5), atol=1e-8)
        assert np.allclose(R @ R, np.linalg.solve(S, np.eye(5)), atol=1e-8)

    def test_singular(self) -> None:
        try:
            inverse_sqrt(np.array([[1.0, 1.0], [1.0, 1.0]]))
        except SingularCovariance as err:
            assert err.eigenvalue < err.threshold
        else:
            assert False

    def test_not_symmetric(self) -> None:
        with pytest.raises(ValueError):
            inverse_sqrt(np.array([[2.0, 1.0], [0.0, 2.0]]))


class TestStandardize:
    def test_two_points(self) -> None:
        sample = standardize(Dataset([[2.0], [0.0]], [1.0, 3.0]))
        assert np.allclose(sample.x_mean, [1.0])
        assert np.allclose(sample.sigma, [[2.0]])
        assert np.allclose(sample.Z[:, 0], [1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0)])
        assert np.allclose(sample.y_std[:, 0], [-1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0)])
        assert np.allclose(sample.response(raw=True)[:, 0], [1.0, 3.0])

    def test_whitened_sample(self) -> None:
        rng = np.random.default_rng(3)
        X = rng.standard_normal((200, 4)) @ np.linalg.cholesky(random_spd(4, 11)).T
        sample = standardize(Dataset(X, rng.standard_normal(200)))
        assert np.allclose(sample.Z.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(sample_covariance(sample.Z), np.eye(4), atol=1e-10)

    def test_identity_covariance_is_unchanged(self) -> None:
        rng = np.random.default_rng(5)
        A = rng.standard_normal((50, 3))
        A -= A.mean(axis=0)
        L = np.linalg.cholesky(sample_covariance(A))
        X = A @ np.linalg.inv(L).T
        sample = standardize(Dataset(X, rng.standard_normal(50)))
        assert np.allclose(sample.Z, X, atol=1e-10)

    def test_identical_columns(self) -> None:
        X = np.column_stack([np.arange(5.0), np.arange(5.0)])
        with pytest.raises(SingularCovariance):
            standardize(Dataset(X, np.arange(5.0)))

    def test_unscaled_predictors(self) -> None:
        X = np.array([[1.0, 4.0], [3.0, 0.0], [2.0, 2.0]])
        sample = standardize(Dataset(X, [0.0, 1.0, 2.0]), standardize_y=False, scale_x=False)
        assert np.allclose(sample.Z, X - X.mean(axis=0))
        assert np.allclose(sample.sigma_inv_sqrt, np.eye(2))
        assert np.allclose(sample.y_std, sample.y_raw)

    def test_constant_response(self) -> None:
        sample = standardize(Dataset([[0.0], [1.0], [3.0]], [2.0, 2.0, 2.0]))
        assert np.allclose(sample.y_std, 0.0)
        assert np.allclose(sample.y_scale, [1.0])


class TestHelpers:
    def test_scale_columns(self) -> None:
        S = scale_columns([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]])
        assert np.allclose(S[:, 0], [-1.0, 0.0, 1.0])
        assert np.allclose(S[:, 1], 0.0)

    def test_whitened_wrapper(self) -> None:
        sample = StandardizedSample.whitened([[1.0, 0.0], [0.0, 1.0]], [1.0, -1.0])
        assert (sample.n, sample.p) == (2, 2)
        assert np.array_equal(sample.sigma_inv_sqrt, np.eye(2))

    def test_candidate_matrix_checks(self) -> None:
        M = CandidateMatrix(np.diag([2.0, 0.0]), Recipe.FMM)
        assert M.p == 2
        assert M.recipe is Recipe.FMM
        with pytest.raises(ValueError):
            CandidateMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]), Recipe.FMM)
        with pytest.raises(ValueError):
            CandidateMatrix(np.diag([1.0, -1.0]), Recipe.CMM)
