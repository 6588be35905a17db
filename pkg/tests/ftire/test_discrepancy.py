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
from boring_math.dimension_reduction.data_model import Dataset
from boring_math.dimension_reduction.errors import DimensionOutOfRange
from boring_math.dimension_reduction.estimators import make_estimator
from boring_math.dimension_reduction.estimators.ftire import (
    XireEstimator,
    XireKind,
    build_inner_product,
    fm_xire,
    minimize_qdf,
    qdf_objective,
    xi_hat,
)
from boring_math.dimension_reduction.estimators.invfm import FourierDesign, fourier_features, invfm_estimate
from boring_math.dimension_reduction.subspace import trace_correlation
from boring_math.dimension_reduction.synth import Model, SynthSpec, generate


def linear_data(n: int = 400, p: int = 4, seed: int = 0) -> Dataset:
    return generate(SynthSpec(n=n, p=p, model=Model.LINEAR, noise_sd=0.2, seed=seed)).data


class TestXiHat:
    def test_shapes(self) -> None:
        xi = xi_hat(linear_data(), FourierDesign.gaussian(1, 3, seed=1))
        assert xi.xi_hat.shape == (4, 6)
        assert xi.residuals.shape == (400, 6)
        assert (xi.n, xi.p, xi.k) == (400, 4, 3)

    def test_regression_of_features_on_predictors(self) -> None:
        data = linear_data(seed=2)
        design = FourierDesign.gaussian(1, 2, seed=3)
        xi = xi_hat(data, design, scale_y=False)
        F = fourier_features(data.Y, design.W)
        cross = (data.X - data.X.mean(axis=0)).T @ F / data.n
        assert np.allclose(xi.sigma_hat @ xi.xi_hat, cross, atol=1e-12)
        assert np.allclose(xi.centered.mean(axis=0), 0.0, atol=1e-12)

    def test_design_mismatch(self) -> None:
        with pytest.raises(ValueError):
            xi_hat(linear_data(), FourierDesign.gaussian(2, 3, seed=1))


class TestInnerProduct:
    def test_sire(self) -> None:
        xi = xi_hat(linear_data(), FourierDesign.gaussian(1, 2, seed=1))
        ip = build_inner_product(xi, 'FT-SIRE')
        assert np.allclose(ip.V, np.kron(np.eye(4), xi.sigma_hat))
        assert ip.G is None
        assert ip.diagnostics() == ()

    def test_ire_inverts_covariance(self) -> None:
        xi = xi_hat(linear_data(), FourierDesign.gaussian(1, 2, seed=1))
        ip = build_inner_product(xi, XireKind.IRE)
        assert ip.G is not None
        assert ip.V.shape == (16, 16)
        assert np.allclose(ip.V @ ip.G, np.eye(16), atol=1e-6)

    @pytest.mark.parametrize('kind', [XireKind.DIRE, XireKind.DRIRE])
    def test_block_diagonal(self, kind: XireKind) -> None:
        xi = xi_hat(linear_data(), FourierDesign.gaussian(1, 3, seed=1))
        ip = build_inner_product(xi, kind)
        assert ip.blocks == (1, 1, 1)
        assert np.all(ip.V[:8, 8:] == 0.0)
        assert np.all(ip.V[8:16, 16:] == 0.0)
        grouped = build_inner_product(xi, kind, blocks=(2, 1))
        assert np.any(grouped.V[:8, 8:16] != 0.0)
        assert np.all(grouped.V[:16, 16:] == 0.0)

    def test_bad_blocks(self) -> None:
        xi = xi_hat(linear_data(), FourierDesign.gaussian(1, 3, seed=1))
        with pytest.raises(ValueError):
            build_inner_product(xi, XireKind.DIRE, blocks=(1, 1))
        with pytest.raises(ValueError):
            build_inner_product(xi, XireKind.DIRE, blocks=(3, 0))
        with pytest.raises(ValueError):
            build_inner_product(xi, 'FT-XYZ')


class TestMinimizeQdf:
    def test_objective_zero_on_exact_fit(self) -> None:
        Gamma = np.array([[1.0], [0.0], [0.0]])
        C = np.array([[0.5, -2.0]])
        assert qdf_objective(Gamma @ C, np.eye(6), Gamma, C) == 0.0

    def test_exact_low_rank(self) -> None:
        rng = np.random.default_rng(4)
        Gamma = np.linalg.qr(rng.standard_normal((5, 2)))[0]
        xi = Gamma @ rng.standard_normal((2, 6))
        solution = minimize_qdf(xi, np.eye(30), 2, init=rng.standard_normal((5, 2)))
        assert solution.converged
        assert solution.objective < 1e-6 * float(np.sum(xi**2))
        assert trace_correlation(solution.Gamma, Gamma) > 0.999
        assert np.allclose(solution.Gamma.T @ solution.Gamma, np.eye(2), atol=1e-10)

    def test_monotone_descent(self) -> None:
        xi = xi_hat(linear_data(n=300, p=5, seed=5), FourierDesign.gaussian(1, 4, seed=6))
        ip = build_inner_product(xi, XireKind.IRE)
        solution = minimize_qdf(xi, ip, 2)
        steps = np.diff(solution.objectives)
        assert np.all(steps <= 1e-9 * max(1.0, solution.objectives[0]))
        assert solution.objective == solution.objectives[-1]

    def test_iteration_cap(self) -> None:
        xi = xi_hat(linear_data(n=300, p=5, seed=5), FourierDesign.gaussian(1, 4, seed=6))
        solution = minimize_qdf(xi, build_inner_product(xi, 'FT-IRE'), 2, max_iter=1, tol=0.0)
        assert not solution.converged
        assert solution.iterations == 1
        assert solution.diagnostics()[0].startswith('NonConvergence')

    def test_argument_checks(self) -> None:
        xi = np.ones((3, 2))
        with pytest.raises(DimensionOutOfRange):
            minimize_qdf(xi, np.eye(6), 4)
        with pytest.raises(ValueError):
            minimize_qdf(xi, np.eye(5), 1)
        with pytest.raises(ValueError):
            minimize_qdf(xi, np.eye(6), 1, init=np.ones((2, 1)))


class TestFmXire:
    def test_sire_agrees_with_invfm(self) -> None:
        data = linear_data(n=500, p=5, seed=7)
        design = FourierDesign.gaussian(1, 6, seed=8)
        sire = fm_xire(data, 1, kind='FT-SIRE', design=design)
        inv = invfm_estimate(data, 1, design).basis
        assert trace_correlation(sire, inv) > 1 - 1e-3

    @pytest.mark.parametrize('kind', list(XireKind))
    def test_linear_recovery(self, kind: XireKind) -> None:
        sample = generate(SynthSpec(n=800, p=4, model=Model.LINEAR, noise_sd=0.2, seed=9))
        basis = fm_xire(sample.data, 1, m=4, kind=kind, seed=10)
        assert basis.method == kind.value
        assert np.allclose(np.linalg.norm(basis.B, axis=0), 1.0)
        assert trace_correlation(basis, sample.true_basis) > 0.95

    def test_identity_start(self) -> None:
        sample = generate(SynthSpec(n=800, p=4, model=Model.LINEAR, noise_sd=0.2, seed=11))
        basis = fm_xire(sample.data, 1, m=4, kind='FT-SIRE', init='identity')
        assert trace_correlation(basis, sample.true_basis) > 0.95

    def test_unknown_start(self) -> None:
        with pytest.raises(ValueError):
            fm_xire(linear_data(), 1, init='random')

    def test_estimator(self) -> None:
        est = XireEstimator(kind='FT-DIRE', m=3, blocks=[2, 1])
        assert est.label == 'FT-DIRE'
        assert est.blocks == (2, 1)
        data = linear_data(seed=12)
        assert np.allclose(est.fit(data, 1).B, fm_xire(data, 1, 3, 'FT-DIRE', 0, (2, 1)).B)

    @pytest.mark.slow
    def test_double_index_recovery(self) -> None:
        sample = generate(SynthSpec(n=2000, p=6, model=Model.RATIONAL_DOUBLE_INDEX, noise_sd=0.1, seed=13))
        basis = make_estimator('xire', kind='FT-IRE', m=10).fit(sample.data, 2)
        assert trace_correlation(basis, sample.true_basis) > 0.8
