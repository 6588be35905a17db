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

from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from boring_math.dimension_reduction.errors import RankDeficientBasis
from boring_math.dimension_reduction.estimators import IhtEstimator
from boring_math.dimension_reduction.synth import (
    Model,
    RecoveryReport,
    SynthSpec,
    XDist,
    generate,
    recovery_benchmark,
    write_csv,
)


class TestSynthSpec:
    def test_default_bases(self) -> None:
        assert np.array_equal(SynthSpec(n=10, p=3).basis, [[1.0], [0.0], [0.0]])
        assert np.array_equal(SynthSpec(n=10, p=3, model=Model.DOUBLE_INDEX).basis, np.eye(3)[:, :2])
        sparse = SynthSpec(n=10, p=4, model=Model.SPARSE_SUPPORT).basis
        assert np.allclose(sparse[:, 0], [2**-0.5, 2**-0.5, 0.0, 0.0])

    def test_model_dimension(self) -> None:
        assert [model.d for model in Model] == [1, 1, 2, 1, 2]

    def test_row_vector_basis(self) -> None:
        spec = SynthSpec(n=10, p=3, true_basis=np.array([[0.0, 1.0, 1.0]]))
        assert spec.basis.shape == (3, 1)
        assert not spec.basis.flags.writeable

    def test_basis_survives_reseeding(self) -> None:
        spec = SynthSpec(n=10, p=3, model=Model.DOUBLE_INDEX, seed=1)
        again = spec.reseeded(5)
        assert spec.basis is spec.true_basis
        assert again.seed == 5
        assert np.array_equal(again.basis, spec.basis)

    @pytest.mark.parametrize(
        'opts',
        [
            {'n': 1, 'p': 3},
            {'n': 10, 'p': 0},
            {'n': 10, 'p': 3, 'q': 0},
            {'n': 10, 'p': 3, 'noise_sd': -0.1},
            {'n': 10, 'p': 1, 'model': Model.DOUBLE_INDEX},
            {'n': 10, 'p': 1, 'model': Model.SPARSE_SUPPORT},
            {'n': 10, 'p': 3, 'true_basis': np.ones((3, 2))},
            {'n': 10, 'p': 3, 'x_dist': 'cauchy'},
        ],
    )
    def test_rejects(self, opts: dict[str, object]) -> None:
        with pytest.raises(ValueError):
            SynthSpec(**opts)  # type: ignore[arg-type]

    def test_rank_deficient_basis(self) -> None:
        with pytest.raises(RankDeficientBasis):
            SynthSpec(n=10, p=3, model=Model.DOUBLE_INDEX, true_basis=np.ones((3, 2)))


class TestGenerate:
    def test_noiseless_linear(self) -> None:
        sample = generate(SynthSpec(n=50, p=3, noise_sd=0.0, seed=1))
        assert np.array_equal(sample.data.Y[:, 0], sample.data.X[:, 0])

    def test_noiseless_links(self) -> None:
        X = generate(SynthSpec(n=20, p=3, noise_sd=0.0, seed=2)).data.X
        cubic = generate(SynthSpec(n=20, p=3, model=Model.CUBIC_SINGLE_INDEX, noise_sd=0.0, seed=2)).data
        double = generate(SynthSpec(n=20, p=3, model=Model.DOUBLE_INDEX, noise_sd=0.0, seed=2)).data
        sparse = generate(SynthSpec(n=20, p=3, model=Model.SPARSE_SUPPORT, noise_sd=0.0, seed=2)).data
        rational = generate(SynthSpec(n=20, p=3, model=Model.RATIONAL_DOUBLE_INDEX, noise_sd=0.0, seed=2)).data
        assert np.allclose(cubic.Y[:, 0], X[:, 0] ** 3)
        assert np.allclose(double.Y[:, 0], X[:, 0] ** 3 + np.abs(X[:, 1]))
        assert np.allclose(sparse.Y[:, 0], (X[:, 0] + X[:, 1]) ** 3)
        assert np.allclose(rational.Y[:, 0], X[:, 0] / (0.5 + (X[:, 1] + 1.5) ** 2))

    def test_deterministic(self) -> None:
        spec = SynthSpec(n=30, p=4, model=Model.DOUBLE_INDEX, seed=3)
        first, second = generate(spec), generate(spec)
        assert np.array_equal(first.data.X, second.data.X)
        assert np.array_equal(first.data.Y, second.data.Y)
        assert not np.array_equal(first.data.X, generate(spec.reseeded(4)).data.X)

    def test_multivariate_response(self) -> None:
        data = generate(SynthSpec(n=40, p=3, q=2, seed=5)).data
        assert data.Y.shape == (40, 2)
        assert not np.array_equal(data.Y[:, 0], data.Y[:, 1])

    @pytest.mark.parametrize('x_dist', list(XDist))
    def test_identity_covariance(self, x_dist: XDist) -> None:
        X = generate(SynthSpec(n=10_000, p=3, x_dist=x_dist, seed=6)).data.X
        tol = 0.12 if x_dist is XDist.ELLIPTIC_T else 0.05
        assert np.max(np.abs(np.cov(X, rowvar=False) - np.eye(3))) < tol
        assert np.max(np.abs(X.mean(axis=0))) < 0.05

    def test_uniform_support(self) -> None:
        X = generate(SynthSpec(n=500, p=2, x_dist=XDist.UNIFORM, seed=7)).data.X
        assert np.all(np.abs(X) <= np.sqrt(3.0))


class TestWriteCsv:
    def test_round_trip(self, tmp_path: Path) -> None:
        data = generate(SynthSpec(n=25, p=3, q=2, seed=8)).data
        path = tmp_path / 'synthetic.csv'
        write_csv(data, path)
        frame = pd.read_csv(path)
        assert list(frame.columns) == list(data.x_names) + list(data.y_names)
        assert np.max(np.abs(frame.to_numpy() - np.hstack([data.X, data.Y]))) <= 1e-12


class TestRecoveryBenchmark:
    def test_seed_order_and_threads(self) -> None:
        spec = SynthSpec(n=200, p=4, model=Model.CUBIC_SINGLE_INDEX, seed=0)
        serial = recovery_benchmark(spec, IhtEstimator(), range(4))
        threaded = recovery_benchmark(spec, IhtEstimator(), range(4), workers=3)
        assert serial.seeds == (0, 1, 2, 3)
        assert serial == threaded
        assert all(0.0 <= c <= 1.0 for c in serial.correlations)

    def test_summary(self) -> None:
        report = RecoveryReport((1, 2, 3), (0.9, 0.8, 1.0))
        assert report.mean == pytest.approx(0.9)
        assert report.sd == pytest.approx(0.1)
        assert RecoveryReport((1,), (0.5,)).sd == 0.0
