import numpy as np
import pytest

from fliu.exceptions import DegenerateInput, SingularSystem
from fliu.linalg import cond2, pinv, solve_sym, spectral_norm, svd_factors


def penrose_residuals(m, m_pinv):
    return (
        np.max(np.abs(m @ m_pinv @ m - m)),
        np.max(np.abs(m_pinv @ m @ m_pinv - m_pinv)),
        np.max(np.abs((m @ m_pinv).T - m @ m_pinv)),
        np.max(np.abs((m_pinv @ m).T - m_pinv @ m)),
    )


class TestPinv:
    def test_identity(self):
        assert np.allclose(pinv(np.eye(3)), np.eye(3))

    def test_rank_deficient_diagonal(self):
        assert np.allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))

    def test_penrose_conditions_random(self, rng):
        m = rng.standard_normal((3, 5))
        scale = max(1.0, np.max(np.abs(m)))
        for r in penrose_residuals(m, pinv(m)):
            assert r <= 1e-8 * scale

    def test_penrose_conditions_many_shapes(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 9))
            m_ = int(rng.integers(1, 9))
            mat = rng.standard_normal((n, m_))
            if rng.random() < 0.3:  # force rank deficiency
                mat[:, -1] = mat[:, 0] if m_ > 1 else 0.0
            scale = max(1.0, np.max(np.abs(mat)))
            for r in penrose_residuals(mat, pinv(mat)):
                assert r <= 1e-8 * scale

    def test_involution_full_rank(self, rng):
        m = rng.standard_normal((6, 4))
        assert np.allclose(pinv(pinv(m)), m, rtol=1e-8, atol=1e-10)

    def test_rejects_nonfinite(self):
        bad = np.array([[1.0, np.nan], [0.0, 1.0]])
        with pytest.raises(ValueError):
            pinv(bad)

    def test_custom_rtol_truncates(self):
        m = np.diag([1.0, 1e-6])
        assert np.allclose(pinv(m, rtol=1e-3), np.diag([1.0, 0.0]))


class TestSolveSym:
    def test_scaled_identity(self):
        assert np.allclose(solve_sym(2.0 * np.eye(2), np.eye(2)), 0.5 * np.eye(2))

    def test_exact_2x2(self):
        a = np.array([[2.0, 1.0], [1.0, 2.0]])
        assert np.allclose(solve_sym(a, np.array([3.0, 3.0])), [1.0, 1.0])

    def test_random_spd_residual(self, rng):
        g = rng.standard_normal((6, 6))
        a = g @ g.T + 0.5 * np.eye(6)
        b = rng.standard_normal((6, 3))
        x = solve_sym(a, b)
        assert np.linalg.norm(a @ x - b) <= 1e-8 * np.linalg.norm(b)

    def test_agrees_with_pinv(self, rng):
        g = rng.standard_normal((5, 5))
        a = g @ g.T + np.eye(5)
        b = rng.standard_normal(5)
        assert np.allclose(solve_sym(a, b), pinv(a) @ b, rtol=1e-8, atol=1e-10)

    def test_singular_raises_with_spectrum(self):
        a = np.diag([1.0, 0.0])
        with pytest.raises(SingularSystem) as exc:
            solve_sym(a, np.ones(2))
        assert "sigma_min" in str(exc.value)

    def test_asymmetric_rejected(self):
        a = np.array([[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            solve_sym(a, np.ones(2))


class TestCond2:
    def test_identity(self):
        assert cond2(np.eye(4)) == pytest.approx(1.0)

    def test_diagonal(self):
        assert cond2(np.diag([10.0, 1.0])) == pytest.approx(10.0)

    def test_scale_invariance(self, rng):
        m = rng.standard_normal((5, 3))
        assert cond2(3.7 * m) == pytest.approx(cond2(m), rel=1e-12)
        assert cond2(-0.01 * m) == pytest.approx(cond2(m), rel=1e-12)

    def test_zero_matrix(self):
        with pytest.raises(DegenerateInput):
            cond2(np.zeros((3, 3)))

    def test_rank_deficient_uses_kept_values(self):
        # zero singular value is below the cutoff, so it is ignored
        assert cond2(np.diag([4.0, 2.0, 0.0])) == pytest.approx(2.0)


class TestSpectralNorm:
    def test_diagonal(self):
        assert spectral_norm(np.diag([0.0, 4.0, 4.0])) == pytest.approx(4.0)

    def test_identity(self):
        assert spectral_norm(np.eye(5)) == pytest.approx(1.0)

    def test_matches_eigenvalue_oracle(self, rng):
        g = rng.standard_normal((6, 6))
        a = g @ g.T
        assert spectral_norm(a) == pytest.approx(np.max(np.linalg.eigvalsh(a)), rel=1e-10)


class TestSvdFactors:
    def test_orthonormal_factors_and_order(self, rng):
        m = rng.standard_normal((7, 4))
        f = svd_factors(m)
        assert np.all(np.diff(f.s) <= 0) and np.all(f.s >= 0)
        assert np.max(np.abs(f.u.T @ f.u - np.eye(4))) < 1e-10
        assert np.max(np.abs(f.vt @ f.vt.T - np.eye(4))) < 1e-10

    def test_rank_counts_above_cutoff(self):
        f = svd_factors(np.diag([1.0, 1e-20]))
        assert f.rank == 1
