import numpy as np
import pytest

from fliu.basis import (
    BSplineBasis,
    FourierBasis,
    FunctionalDataset,
    basis_gram,
    bspline_penalty,
    build_design,
    build_fourier_basis,
    curve_scores,
    eval_basis,
    eval_coefficient_function,
    fourier_penalty,
)
from fliu.exceptions import (
    BasisKindError,
    DimensionError,
    DomainError,
    GridMismatch,
    InvalidBasis,
    UnderdeterminedCurveFit,
)
from fliu.linalg import spectral_norm

TWO_PI = 2.0 * np.pi


def trapz_gram(phi, grid):
    weights = np.gradient(grid)
    weights[0] = (grid[1] - grid[0]) / 2
    weights[-1] = (grid[-1] - grid[-2]) / 2
    return phi.T @ (weights[:, None] * phi)


def dataset_from_curves(grid, curves):
    return FunctionalDataset(grid=grid, curves=[np.asarray(curves)],
                             y=np.zeros(len(curves)))


class TestFourierBasis:
    def test_k3_gram_is_identity(self):
        basis = build_fourier_basis(3, TWO_PI)
        grid = np.linspace(0.0, TWO_PI, 10000)
        gram = trapz_gram(basis.evaluate(grid), grid)
        assert np.max(np.abs(gram - np.eye(3))) < 1e-6

    def test_k11_layout(self):
        basis = build_fourier_basis(11, 365.0)
        assert basis.npairs == 5
        freqs = basis.frequencies
        assert freqs[0] == 0.0
        assert np.allclose(freqs[1:], np.repeat(2 * np.pi * np.arange(1, 6) / 365.0, 2))

    def test_even_k_rejected(self):
        with pytest.raises(InvalidBasis):
            build_fourier_basis(4, 1.0)
        with pytest.raises(InvalidBasis):
            build_fourier_basis(1, 1.0)

    def test_row_at_zero(self):
        basis = build_fourier_basis(3, TWO_PI)
        row = eval_basis(basis, np.array([0.0]))[0]
        assert row[0] == pytest.approx(1.0 / np.sqrt(TWO_PI))
        assert row[1] == pytest.approx(0.0, abs=1e-15)  # sine vanishes at 0
        assert row[2] == pytest.approx(np.sqrt(2.0 / TWO_PI))

    def test_dense_grid_orthonormal_general_period(self):
        basis = build_fourier_basis(7, 365.0)
        grid = np.linspace(0.0, 365.0, 20000)
        gram = trapz_gram(basis.evaluate(grid), grid)
        assert np.max(np.abs(gram - np.eye(7))) < 1e-6

    def test_analytic_derivative(self):
        basis = build_fourier_basis(5, 3.0)
        grid = np.linspace(0.1, 2.9, 7)
        h = 1e-6
        num = (basis.evaluate(grid + h) - basis.evaluate(grid - h)) / (2 * h)
        assert np.max(np.abs(num - basis.evaluate(grid, derivative=1))) < 1e-5


class TestBSplineBasis:
    def test_partition_of_unity(self):
        basis = BSplineBasis.uniform(8, (0.0, 1.0))
        grid = np.linspace(0.0, 1.0, 57)
        sums = basis.evaluate(grid).sum(axis=1)
        assert np.max(np.abs(sums - 1.0)) < 1e-12

    def test_nbasis_accounting(self):
        basis = BSplineBasis.uniform(8, (0.0, 1.0), order=4)
        assert basis.nbasis == 8
        assert basis.knots.size == 8 + 4

    def test_out_of_domain(self):
        basis = BSplineBasis.uniform(6, (0.0, 1.0))
        with pytest.raises(DomainError):
            basis.evaluate(np.array([1.2]))

    def test_second_derivative_vs_finite_difference(self):
        basis = BSplineBasis.uniform(7, (0.0, 2.0))
        grid = np.linspace(0.3, 1.7, 9)
        h = 1e-5
        num = (basis.evaluate(grid + h) - 2 * basis.evaluate(grid)
               + basis.evaluate(grid - h)) / h**2
        assert np.max(np.abs(num - basis.evaluate(grid, derivative=2))) < 1e-4


class TestCurveScores:
    def test_basis_element_recovered(self):
        basis = build_fourier_basis(5, TWO_PI)
        grid = np.linspace(0.0, TWO_PI, 200)
        phi = basis.evaluate(grid)
        data = dataset_from_curves(grid, [phi[:, 1], phi[:, 1]])
        scores = curve_scores(data, basis)
        assert np.max(np.abs(scores[0] - np.eye(5)[1])) < 1e-6

    def test_zero_curve(self):
        basis = build_fourier_basis(3, 1.0)
        grid = np.linspace(0.0, 1.0, 50)
        data = dataset_from_curves(grid, np.zeros((2, 50)))
        assert np.allclose(curve_scores(data, basis), 0.0)

    def test_in_span_reconstruction(self, rng):
        basis = build_fourier_basis(7, 4.0)
        grid = np.linspace(0.0, 4.0, 123)
        phi = basis.evaluate(grid)
        coefs = rng.standard_normal((3, 7))
        data = dataset_from_curves(grid, coefs @ phi.T)
        scores = curve_scores(data, basis)
        recon = scores @ phi.T
        assert np.max(np.linalg.norm(recon - coefs @ phi.T, axis=1)) <= 1e-8

    def test_too_few_grid_points(self):
        basis = build_fourier_basis(11, 1.0)
        grid = np.linspace(0.0, 1.0, 5)
        data = dataset_from_curves(grid, np.zeros((2, 5)))
        with pytest.raises(UnderdeterminedCurveFit):
            curve_scores(data, basis)


class TestFourierPenalty:
    def test_k3_unit_frequency(self):
        basis = build_fourier_basis(3, TWO_PI)
        assert np.allclose(fourier_penalty(basis), np.diag([0.0, 1.0, 1.0]))

    def test_k5_quarter_entries(self):
        basis = build_fourier_basis(5, TWO_PI)
        assert np.allclose(fourier_penalty(basis), np.diag([0.0, 0.25, 0.25, 1.0, 1.0]))

    def test_k11_formula(self):
        basis = build_fourier_basis(11, 365.0)
        got = np.diag(fourier_penalty(basis))
        w = 2 * np.pi * np.arange(1, 6) / 365.0
        expected = np.concatenate([[0.0], np.repeat(w**2, 2)]) / (w[-1] ** 2)
        assert np.allclose(got, expected)

    def test_wrong_kind(self):
        with pytest.raises(BasisKindError):
            fourier_penalty(BSplineBasis.uniform(5, (0.0, 1.0)))


class TestBsplinePenalty:
    def test_second_difference_k3(self):
        basis = BSplineBasis.uniform(3, (0.0, 1.0), order=3)
        r = bspline_penalty(basis, mode="second_difference")
        raw = np.array([[1.0, -2.0, 1.0], [-2.0, 4.0, -2.0], [1.0, -2.0, 1.0]])
        # raw spectral norm is 6, so the result is raw / 6
        assert np.allclose(r * 6.0, raw)
        assert spectral_norm(r) == pytest.approx(1.0)

    def test_constant_vector_unpenalized(self, rng):
        basis = BSplineBasis.uniform(7, (0.0, 3.0))
        ones = np.ones(7)
        for mode in ("curvature", "second_difference"):
            r = bspline_penalty(basis, mode=mode)
            assert abs(ones @ r @ ones) < 1e-10

    def test_curvature_matches_quadrature(self, rng):
        # long domain keeps the raw Gram contractive, so no rescaling occurs
        basis = BSplineBasis.uniform(8, (0.0, 100.0))
        r = bspline_penalty(basis, mode="curvature")
        assert spectral_norm(r) < 1.0
        grid = np.linspace(0.0, 100.0, 20001)
        for _ in range(5):
            b = rng.standard_normal(8)
            ddot = basis.evaluate(grid, derivative=2) @ b
            integral = np.trapezoid(ddot**2, grid)
            assert b @ r @ b == pytest.approx(integral, rel=1e-4)

    def test_second_difference_nullspace_dim_two(self):
        for k in (4, 6, 9):
            basis = BSplineBasis.uniform(k, (0.0, 1.0))
            r = bspline_penalty(basis, mode="second_difference")
            eigs = np.linalg.eigvalsh(r)
            assert np.sum(np.abs(eigs) < 1e-10) == 2

    def test_mode_errors(self):
        with pytest.raises(InvalidBasis):
            bspline_penalty(BSplineBasis.uniform(2, (0.0, 1.0), order=2),
                            mode="second_difference")
        with pytest.raises(InvalidBasis):
            bspline_penalty(BSplineBasis.uniform(4, (0.0, 1.0), order=2),
                            mode="curvature")
        with pytest.raises(BasisKindError):
            bspline_penalty(build_fourier_basis(3, 1.0))

    def test_penalties_psd_and_contractive(self, rng):
        cases = [
            fourier_penalty(build_fourier_basis(9, 7.0)),
            bspline_penalty(BSplineBasis.uniform(9, (0.0, 1.0)), mode="curvature"),
            bspline_penalty(BSplineBasis.uniform(9, (0.0, 1.0)), mode="second_difference"),
        ]
        for r in cases:
            assert np.min(np.linalg.eigvalsh(r)) >= -1e-10
            assert spectral_norm(r) <= 1.0 + 1e-10


class TestBuildDesign:
    def test_basis_element_curves_give_identity_block(self):
        basis = build_fourier_basis(5, TWO_PI)
        grid = np.linspace(0.0, TWO_PI, 300)
        phi = basis.evaluate(grid)
        data = dataset_from_curves(grid, phi.T)  # curve i = phi_i
        bundle = build_design(data, [basis])
        assert np.max(np.abs(bundle.design - np.eye(5))) < 1e-8
        assert np.allclose(bundle.design_aug[:, 0], 1.0)

    def test_two_predictors_block_order(self, rng):
        basis = build_fourier_basis(3, 1.0)
        grid = np.linspace(0.0, 1.0, 40)
        phi = basis.evaluate(grid)
        s1 = rng.standard_normal((4, 3))
        s2 = rng.standard_normal((4, 3))
        data = FunctionalDataset(grid=grid, curves=[s1 @ phi.T, s2 @ phi.T],
                                 y=np.zeros(4))
        bundle = build_design(data, [basis, basis])
        assert bundle.design.shape == (4, 6)
        assert np.max(np.abs(bundle.design[:, :3] - s1)) < 1e-8
        assert np.max(np.abs(bundle.design[:, 3:] - s2)) < 1e-8

    def test_inner_product_oracle_fourier(self, rng):
        basis = build_fourier_basis(7, 2.0)
        fine = np.linspace(0.0, 2.0, 40001)
        grid = np.linspace(0.0, 2.0, 101)
        coefs = rng.standard_normal((5, 7))
        data = dataset_from_curves(grid, coefs @ basis.evaluate(grid).T)
        bundle = build_design(data, [basis])
        b = rng.standard_normal(7)
        beta_fine = basis.evaluate(fine) @ b
        curves_fine = coefs @ basis.evaluate(fine).T
        wanted = np.trapezoid(curves_fine * beta_fine, fine, axis=1)
        assert np.max(np.abs(bundle.design @ b - wanted)) < 1e-6

    def test_inner_product_oracle_bspline(self, rng):
        basis = BSplineBasis.uniform(6, (0.0, 1.0))
        fine = np.linspace(0.0, 1.0, 40001)
        grid = np.linspace(0.0, 1.0, 61)
        coefs = rng.standard_normal((4, 6))
        data = dataset_from_curves(grid, coefs @ basis.evaluate(grid).T)
        bundle = build_design(data, [basis], penalty="second_difference")
        b = rng.standard_normal(6)
        beta_fine = basis.evaluate(fine) @ b
        curves_fine = coefs @ basis.evaluate(fine).T
        wanted = np.trapezoid(curves_fine * beta_fine, fine, axis=1)
        assert np.max(np.abs(bundle.design @ b - wanted)) < 1e-6

    def test_gram_and_penalty_shapes(self, rng):
        basis = build_fourier_basis(5, 1.0)
        grid = np.linspace(0.0, 1.0, 30)
        data = dataset_from_curves(grid, rng.standard_normal((6, 30)))
        bundle = build_design(data, [basis])
        assert bundle.gram.shape == (6, 6)
        assert np.allclose(bundle.gram, bundle.gram.T)
        assert np.min(np.linalg.eigvalsh(bundle.gram)) >= -1e-8
        # intercept row/column of the padded penalty vanish
        e1 = np.eye(6)[0]
        assert bundle.penalty_aug[0, 0] == 0.0
        assert np.allclose(bundle.penalty_aug @ e1, 0.0)
        assert spectral_norm(bundle.penalty) <= 1.0 + 1e-10

    def test_mismatched_grid_rejected(self):
        with pytest.raises(GridMismatch):
            FunctionalDataset(grid=np.array([0.0, 1.0, 2.0]),
                              curves=[np.zeros((3, 4))], y=np.zeros(3))


class TestEvalCoefficientFunction:
    def test_unit_vector_gives_normalizer(self):
        basis = build_fourier_basis(3, TWO_PI)
        vals = eval_coefficient_function(np.eye(3)[0], basis, np.linspace(0, 5, 9))
        assert np.allclose(vals, 1.0 / np.sqrt(TWO_PI))

    def test_zero_vector(self):
        basis = build_fourier_basis(3, 1.0)
        assert np.allclose(eval_coefficient_function(np.zeros(3), basis,
                                                     np.linspace(0, 1, 9)), 0.0)

    def test_parseval(self, rng):
        basis = build_fourier_basis(9, 3.0)
        grid = np.linspace(0.0, 3.0, 30001)
        b = rng.standard_normal(9)
        beta = eval_coefficient_function(b, basis, grid)
        assert np.trapezoid(beta**2, grid) == pytest.approx(b @ b, rel=1e-6)

    def test_length_mismatch(self):
        basis = build_fourier_basis(5, 1.0)
        with pytest.raises(DimensionError):
            eval_coefficient_function(np.zeros(4), basis, np.array([0.0]))


def test_bspline_gram_matches_trapezoid(rng):
    basis = BSplineBasis.uniform(7, (0.0, 2.0))
    fine = np.linspace(0.0, 2.0, 40001)
    phi = basis.evaluate(fine)
    gram_fine = np.trapezoid(phi[:, :, None] * phi[:, None, :], fine, axis=0)
    assert np.max(np.abs(basis_gram(basis) - gram_fine)) < 1e-6
