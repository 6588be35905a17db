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

import itertools

import numpy as np
import pytest
from boring_math.dimension_reduction.data_model import Dataset, Recipe, StandardizedSample, standardize
from boring_math.dimension_reduction.density_scores import Density, normal_score, score_field
from boring_math.dimension_reduction.errors import AllPointsTrimmed
from boring_math.dimension_reduction.estimators import ItmEstimator, estimate, make_estimator
from boring_math.dimension_reduction.estimators.itm_kernels import (
    ItmConfig,
    Method,
    Space,
    build_candidate,
    pair_kernel,
    pair_kernel_fmc,
    pair_kernel_fmm,
)
from boring_math.dimension_reduction.synth import Model, SynthSpec, oracle_candidate, recovery_benchmark

CONFIGS = [
    (space, method, density)
    for space, method, density in itertools.product(Space, Method, Density)
]


def random_problem(n: int, p: int, seed: int, space: Space, method: Method, density: Density):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p)) @ rng.uniform(0.5, 1.5, size=(p, p))
    y = np.sin(X[:, 0]) + 0.3 * X[:, -1] ** 2 + 0.2 * rng.standard_normal(n)
    cfg = ItmConfig(
        space=space,
        method=method,
        sw2=float(rng.uniform(0.05, 1.0)),
        st2=float(rng.uniform(0.1, 1.0)),
        density=density,
        h=float(rng.uniform(0.5, 1.5)),
    )
    sample = standardize(Dataset(X, y))
    scores = score_field(cfg.density, cfg.h, cfg.threshold, sample.Z)
    return sample, scores, cfg


def assert_matches_oracle(sample, scores, cfg, **opts) -> None:
    fast = build_candidate(sample, scores, cfg, **opts).M
    slow = oracle_candidate(sample, scores, cfg).M
    scale = max(1.0, float(np.max(np.abs(slow))))
    assert np.max(np.abs(fast - slow)) <= 1e-10 * scale


def assert_psd(M: np.ndarray) -> None:
    assert np.max(np.abs(M - M.T)) <= 1e-10
    lam = np.linalg.eigvalsh(M)
    assert lam[0] >= -1e-8 * max(abs(lam[-1]), 1e-300)


class TestPairKernels:
    def test_origin_value(self) -> None:
        U = pair_kernel_fmm([0.0], [0.0], 1.0, 1.0, [0.0], [0.0], 0.1)
        assert U.shape == (1, 1)
        assert U[0, 0] == pytest.approx(0.1)

    def test_zero_response(self) -> None:
        U = pair_kernel_fmm([0.2, 1.0], [-0.5, 0.3], 0.0, 2.0, [1.0, 0.0], [0.5, -1.0], 0.4)
        assert np.array_equal(U, np.zeros((2, 2)))

    def test_swap_transposes(self) -> None:
        args = ([0.2, 1.0], [-0.5, 0.3], 1.3, -0.7, [1.0, 0.1], [0.5, -1.0])
        swapped = (args[1], args[0], args[3], args[2], args[5], args[4])
        for recipe in (Recipe.FMM, Recipe.FMC, Recipe.CMM, Recipe.CMC):
            kernel = pair_kernel(recipe)
            assert np.allclose(kernel(*swapped, 0.3, 0.6), kernel(*args, 0.3, 0.6).T, atol=1e-15)

    def test_fmc_ignores_response_level(self) -> None:
        left = pair_kernel_fmc([0.1], [0.4], 1.0, 3.0, [0.2], [-0.1], 0.5, 0.7)
        right = pair_kernel_fmc([0.1], [0.4], 11.0, 13.0, [0.2], [-0.1], 0.5, 0.7)
        assert np.allclose(left, right)


class TestBuildCandidate:
    @pytest.mark.parametrize(('space', 'method', 'density'), CONFIGS)
    def test_matches_oracle(self, space: Space, method: Method, density: Density) -> None:
        sample, scores, cfg = random_problem(23, 3, 101, space, method, density)
        assert_matches_oracle(sample, scores, cfg, block_rows=5)

    def test_single_observation(self) -> None:
        sample = StandardizedSample.whitened([[0.3, -0.2]], [1.5])
        scores = normal_score(sample.Z)
        cfg = ItmConfig(sw2=0.3)
        M = build_candidate(sample, scores, cfg).M
        U = pair_kernel_fmm(sample.Z[0], sample.Z[0], 1.5, 1.5, scores.g[0], scores.g[0], 0.3)
        assert np.allclose(M, U, atol=1e-14)
        assert np.allclose(M, oracle_candidate(sample, scores, cfg).M, atol=1e-15)

    def test_constant_response_factors_out(self) -> None:
        rng = np.random.default_rng(8)
        Z = rng.standard_normal((30, 3))
        scores = normal_score(Z)
        cfg = ItmConfig(raw_y=True)
        ones = build_candidate(StandardizedSample.whitened(Z, np.ones(30)), scores, cfg).M
        threes = build_candidate(StandardizedSample.whitened(Z, np.full(30, 3.0)), scores, cfg).M
        assert np.allclose(threes, 9.0 * ones, atol=1e-12)
        assert_psd(threes)

    def test_permutation_invariant(self) -> None:
        sample, scores, cfg = random_problem(40, 3, 7, Space.PDF, Method.CM, Density.NORMAL)
        M = build_candidate(sample, scores, cfg).M
        order = np.random.default_rng(1).permutation(40)
        permuted = StandardizedSample.whitened(sample.Z[order], sample.y_std[order])
        M2 = build_candidate(permuted, normal_score(permuted.Z), cfg).M
        assert np.allclose(M, M2, atol=1e-12)

    def test_workers_agree_exactly(self) -> None:
        sample, scores, cfg = random_problem(50, 4, 3, Space.MEAN, Method.FM, Density.KERNEL)
        serial = build_candidate(sample, scores, cfg, block_rows=7)
        parallel = build_candidate(sample, scores, cfg, block_rows=7, workers=3)
        assert np.array_equal(serial.M, parallel.M)

    def test_all_trimmed(self) -> None:
        sample, scores, cfg = random_problem(20, 2, 5, Space.MEAN, Method.FM, Density.KERNEL)
        trimmed = score_field(Density.KERNEL, cfg.h, 1e6, sample.Z)
        with pytest.raises(AllPointsTrimmed):
            build_candidate(sample, trimmed, cfg)

    def test_density_mismatch(self) -> None:
        sample, scores, cfg = random_problem(20, 2, 5, Space.MEAN, Method.FM, Density.NORMAL)
        with pytest.raises(ValueError):
            build_candidate(sample, scores, ItmConfig(density=Density.KERNEL))

    @pytest.mark.slow
    def test_random_configurations(self) -> None:
        rng = np.random.default_rng(50)
        for j in range(50):
            space, method, density = CONFIGS[j % len(CONFIGS)]
            n, p = int(rng.integers(10, 121)), int(rng.integers(1, 9))
            sample, scores, cfg = random_problem(n, p, 1000 + j, space, method, density)
            assert_matches_oracle(sample, scores, cfg, block_rows=int(rng.integers(1, 64)))
            assert_psd(build_candidate(sample, scores, cfg).M)


class TestItmEstimator:
    def test_config(self) -> None:
        cfg = ItmConfig(space='pdf', method='CM', density='kernel')
        assert cfg.recipe is Recipe.CMC
        assert cfg.with_param('h', 0.5).h == 0.5
        with pytest.raises(ValueError):
            cfg.with_param('lam', 0.5)
        with pytest.raises(ValueError):
            ItmConfig(sw2=0.0)

    def test_dispatch_agrees(self) -> None:
        rng = np.random.default_rng(12)
        X = rng.standard_normal((120, 4))
        data = Dataset(X, X[:, 1] + 0.1 * rng.standard_normal(120))
        direct = ItmEstimator(ItmConfig(sw2=0.2)).fit(data, 1)
        dispatched = estimate(data, 1, 'FM', sw2=0.2)
        assert np.allclose(direct.B, dispatched.B)
        assert direct.method == 'FM-mean'
        assert abs(direct.unit_columns()[1, 0]) > 0.9
        with pytest.raises(ValueError):
            make_estimator('PCA')

    def test_fit_path_shares_candidate(self) -> None:
        rng = np.random.default_rng(13)
        X = rng.standard_normal((80, 3))
        data = Dataset(X, X[:, 0] ** 2 + X[:, 2])
        est = ItmEstimator(ItmConfig(space=Space.PDF))
        path = est.fit_path(data, (1, 2, 3))
        assert [path[d].d for d in (1, 2, 3)] == [1, 2, 3]
        assert np.allclose(path[2].full_spectrum, path[3].full_spectrum)
        assert np.allclose(path[3].B[:, :2], path[2].B)

    @pytest.mark.slow
    def test_mean_subspace_recovery(self) -> None:
        spec = SynthSpec(n=1000, p=6, model=Model.LINEAR, noise_sd=0.1)
        report = recovery_benchmark(spec, ItmEstimator(ItmConfig(sw2=0.1)), range(20))
        assert report.mean > 0.95

    @pytest.mark.slow
    def test_central_subspace_recovery(self) -> None:
        spec = SynthSpec(n=2000, p=6, model=Model.DOUBLE_INDEX, noise_sd=0.1)
        est = ItmEstimator(ItmConfig(space=Space.PDF, sw2=0.1, st2=1.0), workers=4)
        report = recovery_benchmark(spec, est, range(20), workers=2)
        assert report.mean > 0.85
