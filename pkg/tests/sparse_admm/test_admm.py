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

from dataclasses import replace

import numpy as np
import pytest
from boring_math.dimension_reduction.data_model import Dataset
from boring_math.dimension_reduction.estimators.invfm import FourierDesign, fourier_features, invfm_estimate
from boring_math.dimension_reduction.estimators.sparse_admm import (
    AdmmConfig,
    AdmmProblem,
    AdmmState,
    SparseEstimator,
    admm_c_update,
    admm_gamma_update,
    admmft,
    cross_validate_lambda,
    penalized_objective,
    row_soft_threshold,
    soft_threshold_covariance,
)
from boring_math.dimension_reduction.subspace import trace_correlation
from scipy import linalg
from boring_math.dimension_reduction.synth import Model, SynthSpec, generate


def random_problem(p: int, k: int, seed: int) -> AdmmProblem:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((p, p))
    sigma = A @ A.T / p + 0.5 * np.eye(p)
    return AdmmProblem.from_moments(sigma, rng.standard_normal((p, 2 * k)))


def cold_state(p: int, d: int) -> AdmmState:
    return AdmmState(np.zeros((p, d)), np.zeros((p, d)), np.zeros((p, d)))


class TestThresholds:
    def test_row_soft_threshold(self) -> None:
        assert np.allclose(row_soft_threshold([3.0, 4.0], 1.0), [2.4, 3.2])
        assert np.array_equal(row_soft_threshold([3.0, 4.0], 5.0), [0.0, 0.0])
        assert np.array_equal(row_soft_threshold([3.0, 4.0], 0.0), [3.0, 4.0])

    def test_covariance_threshold(self) -> None:
        S = np.array([[1.0, 0.01, 0.9], [0.01, 2.0, 0.0], [0.9, 0.0, 1.5]])
        T = soft_threshold_covariance(S, 100)
        level = 2.0 * np.sqrt(np.log(3) / 100) * 2.0
        assert np.array_equal(np.diag(T), np.diag(S))
        assert T[0, 1] == 0.0
        assert T[0, 2] == pytest.approx(0.9 - level)
        assert np.allclose(T, T.T)


class TestUpdates:
    def test_c_update_orthonormal_rows(self) -> None:
        rng = np.random.default_rng(1)
        Xi = rng.standard_normal((6, 8))
        C, collapsed = admm_c_update(Xi, rng.standard_normal((6, 3)))
        assert C.shape == (3, 8)
        assert np.allclose(C @ C.T, np.eye(3), atol=1e-12)
        assert not collapsed

    def test_c_update_single_direction(self) -> None:
        rng = np.random.default_rng(2)
        Xi = rng.standard_normal((5, 4))
        gamma = rng.standard_normal((5, 1))
        C, _ = admm_c_update(Xi, gamma)
        v = Xi.T @ gamma[:, 0]
        assert np.allclose(C[0], v / np.linalg.norm(v))

    def test_c_update_collapse(self) -> None:
        _, collapsed = admm_c_update(np.ones((4, 2)), np.zeros((4, 1)))
        assert collapsed

    def test_zero_penalty_solves_normal_equations(self) -> None:
        problem = random_problem(5, 2, 3)
        C, _ = admm_c_update(problem.Xi, np.eye(5)[:, :2])
        cfg = AdmmConfig(lam=0.0, eps=1e-12, inner_iter=2000)
        state = admm_gamma_update(problem, C, cfg, cold_state(5, 2))
        assert state.converged
        assert np.allclose(problem.sigma @ state.A, problem.Xi @ C.T, atol=1e-8)

    def test_large_penalty_zeroes_rows(self) -> None:
        problem = random_problem(5, 2, 4)
        C, _ = admm_c_update(problem.Xi, np.eye(5)[:, :1])
        cfg = AdmmConfig(lam=10.0 * problem.lambda_max)
        state = admm_gamma_update(problem, C, cfg, cold_state(5, 1))
        assert np.array_equal(state.A, np.zeros((5, 1)))

    def test_rho_mismatch(self) -> None:
        problem = random_problem(3, 1, 5)
        with pytest.raises(ValueError):
            admm_gamma_update(problem, np.ones((1, 2)) / np.sqrt(2.0), AdmmConfig(rho=2.0), cold_state(3, 1))

    def test_objective(self) -> None:
        problem = AdmmProblem.from_moments(np.eye(2), [[1.0, 0.0], [0.0, 0.0]])
        Gamma = np.array([[1.0], [0.0]])
        C = np.array([[1.0, 0.0]])
        assert penalized_objective(problem, Gamma, C, 0.0, np.ones(2)) == pytest.approx(-0.5)
        assert penalized_objective(problem, Gamma, C, 2.0, np.ones(2)) == pytest.approx(1.5)


class TestConfig:
    @pytest.mark.parametrize(
        'opts',
        [{'lam': -1.0}, {'rho': 0.0}, {'weights': (1.0, -1.0)}, {'no_c': 0}, {'eps': 0.0}],
    )
    def test_rejects(self, opts: dict[str, object]) -> None:
        with pytest.raises(ValueError):
            AdmmConfig(**opts)  # type: ignore[arg-type]

    def test_inner_cap(self) -> None:
        assert AdmmConfig(no_b=3, inner_iter=7).inner_cap == 21


class TestAdmmft:
    def test_zero_penalty_matches_inverse_fourier(self) -> None:
        data = generate(SynthSpec(n=400, p=5, model=Model.LINEAR, noise_sd=0.2, seed=6)).data
        design = FourierDesign.gaussian(1, 5, seed=7)
        cfg = AdmmConfig(eps=1e-10, no_c=100, no_w=1)
        sparse = admmft(data, 1, lam=0.0, cfg=cfg, design=design)
        assert sparse.active_set == (0, 1, 2, 3, 4)
        reference = invfm_estimate(data, 1, design).basis
        assert trace_correlation(sparse.Gamma, reference) > 1 - 1e-4

    def test_huge_penalty_is_empty(self) -> None:
        data = generate(SynthSpec(n=200, p=4, seed=8)).data
        sparse = admmft(data, 1, m=4, lam=1e6)
        assert sparse.active_set == ()
        assert np.array_equal(sparse.Gamma, np.zeros((4, 1)))
        assert any(note.startswith('RankCollapse') for note in sparse.diagnostics)

    def test_objective_descends_up_to_admm_tolerance(self) -> None:
        data = generate(SynthSpec(n=300, p=8, model=Model.SPARSE_SUPPORT, seed=9)).data
        sparse = admmft(data, 1, m=6, lam=0.05, cfg=AdmmConfig(eps=1e-9))
        for trace in sparse.passes:
            steps = np.diff(trace)
            assert np.all(steps <= 1e-5 * max(1.0, abs(trace[0])))
        assert sparse.objective_trace == sparse.passes[-1]
        assert len(sparse.passes) == 2

    def test_single_sweep_keeps_admm_update(self) -> None:
        data = generate(SynthSpec(n=150, p=5, model=Model.SPARSE_SUPPORT, seed=16)).data
        design = FourierDesign.gaussian(1, 4, seed=17)
        cfg = AdmmConfig(no_w=1, no_c=1, no_b=1, inner_iter=1)
        lam = 0.2
        sparse = admmft(data, 1, lam=lam, cfg=cfg, design=design)

        x_sd = data.X.std(axis=0, ddof=1)
        y = data.Y / data.Y.std(axis=0, ddof=1)
        problem = AdmmProblem.from_sample(data.X / x_sd, fourier_features(y, design.W), cfg)
        start = linalg.svd(problem.Xi, full_matrices=False)[0][:, :1].copy()
        C, _ = admm_c_update(problem.Xi, start)
        state = AdmmState(start, start.copy(), np.zeros_like(start))
        update = admm_gamma_update(problem, C, replace(cfg, lam=lam), state, np.ones(5))

        assert np.allclose(sparse.Gamma, update.A / x_sd[:, np.newaxis], atol=1e-12)
        assert len(sparse.objective_trace) == 2
        assert not update.converged
        assert not sparse.converged
        assert any(note.startswith('NonConvergence') for note in sparse.diagnostics)

    def test_more_predictors_than_rows(self) -> None:
        rng = np.random.default_rng(10)
        X = rng.standard_normal((40, 60))
        y = X[:, 0] - X[:, 1] + 0.1 * rng.standard_normal(40)
        sparse = admmft(Dataset(X, y), 1, m=5, lam=0.3)
        assert sparse.Gamma.shape == (60, 1)
        assert set(sparse.active_set) <= set(range(60))

    def test_dimension_checks(self) -> None:
        data = generate(SynthSpec(n=100, p=4, seed=11)).data
        with pytest.raises(ValueError):
            admmft(data, 3, m=1, lam=0.1)
        with pytest.raises(ValueError):
            admmft(data, 5, m=4, lam=0.1)

    def test_cross_validation_path(self) -> None:
        data = generate(SynthSpec(n=120, p=5, model=Model.SPARSE_SUPPORT, seed=12)).data
        cfg = AdmmConfig(no_c=5, inner_iter=50, no_w=1)
        path = cross_validate_lambda(data, 1, m=4, cfg=cfg, folds=3, n_lambda=4)
        assert len(path.grid) == len(path.scores) == 4
        assert list(path.grid) == sorted(path.grid)
        assert path.grid[-1] == pytest.approx(path.lambda_max)
        assert path.chosen in path.grid
        threaded = cross_validate_lambda(data, 1, m=4, cfg=cfg, folds=3, n_lambda=4, workers=3)
        assert threaded.scores == path.scores
        assert path.to_dict()['folds'] == 3

    def test_cross_validation_checks(self) -> None:
        data = generate(SynthSpec(n=6, p=3, seed=13)).data
        with pytest.raises(ValueError):
            cross_validate_lambda(data, folds=4)
        with pytest.raises(ValueError):
            cross_validate_lambda(data, folds=1)

    def test_estimator(self) -> None:
        est = SparseEstimator(m=4, lam=0.1)
        assert est.label == 'admm'
        assert est.with_param('lam', 0.3).lam == 0.3
        data = generate(SynthSpec(n=200, p=4, seed=14)).data
        basis = est.fit(data, 1)
        assert basis.B.shape == (4, 1)
        assert basis.full_spectrum.shape == (4,)

    @pytest.mark.slow
    def test_sparse_support_recovery(self) -> None:
        sample = generate(SynthSpec(n=400, p=30, model=Model.SPARSE_SUPPORT, noise_sd=0.1, seed=15))
        sparse = admmft(sample.data, 1, m=10, seed=16)
        assert sparse.path is not None
        assert {0, 1} <= set(sparse.active_set)
        assert trace_correlation(sparse.Gamma, sample.true_basis) > 0.9
