"""Symmetric eigensolver wrapper, bound estimation, and matrix text I/O."""

import itertools
import math

import numpy as np
import pytest

from chebaccel import (
    Eigendecomposition,
    NotSymmetricError,
    SpectralBounds,
    condition_number,
    estimate_bounds,
    is_symmetric,
    load_matrix,
    power_iteration_max,
    save_matrix,
    sym_eigendecompose,
)


def random_symmetric(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2.0


def leibniz_det(a: np.ndarray) -> float:
    """Determinant by the permutation-sum definition. Only sane for tiny n."""
    n = a.shape[0]
    total = 0.0
    for perm in itertools.permutations(range(n)):
        sign = 1
        seen = [False] * n
        # parity via cycle decomposition
        for start in range(n):
            if seen[start]:
                continue
            length = 0
            j = start
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
        term = 1.0
        for i in range(n):
            term *= a[i, perm[i]]
        total += sign * term
    return total


class TestIsSymmetric:
    def test_accepts_symmetric(self):
        assert is_symmetric(random_symmetric(6, 0))

    def test_rejects_asymmetric(self):
        a = random_symmetric(6, 0)
        a[0, 1] += 1e-3
        assert not is_symmetric(a)

    def test_tolerance_is_relative_to_scale(self):
        a = 1e8 * random_symmetric(6, 1)
        a[2, 3] += 1e-4  # far below 1e-10 * scale
        assert is_symmetric(a)


class TestEigendecomposition:
    def test_rejects_asymmetric_input(self):
        a = np.arange(9.0).reshape(3, 3)
        with pytest.raises(NotSymmetricError):
            sym_eigendecompose(a)

    def test_recovers_known_spectrum(self):
        # Build a matrix with a spectrum we control, then ask for it back.
        rng = np.random.default_rng(42)
        target = np.array([-3.0, -0.5, 0.25, 1.0, 7.5])
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        a = q @ np.diag(target) @ q.T
        dec = sym_eigendecompose(a)
        np.testing.assert_allclose(dec.eigenvalues, target, rtol=1e-12, atol=1e-12)

    def test_eigenvalues_ascending(self):
        dec = sym_eigendecompose(random_symmetric(12, 3))
        assert np.all(np.diff(dec.eigenvalues) >= 0)

    def test_eigenvectors_orthonormal(self):
        dec = sym_eigendecompose(random_symmetric(12, 4))
        gram = dec.eigenvectors.T @ dec.eigenvectors
        np.testing.assert_allclose(gram, np.eye(12), atol=1e-12)

    def test_reconstruct_matches_input(self):
        a = random_symmetric(15, 5)
        dec = sym_eigendecompose(a)
        np.testing.assert_allclose(dec.reconstruct(), a, atol=1e-12)

    def test_eigenvalues_kill_characteristic_determinant(self):
        # Independent check: det(A - lam*I) via the Leibniz sum must vanish
        # at each reported eigenvalue.  5x5 keeps the sum at 120 terms.
        a = random_symmetric(5, 6)
        dec = sym_eigendecompose(a)
        for lam in dec.eigenvalues:
            assert abs(leibniz_det(a - lam * np.eye(5))) < 1e-10


class TestPowerIteration:
    def test_matches_dense_solver(self):
        a = random_symmetric(30, 7)
        g = a @ a.T  # PSD so the dominant eigenvalue is the largest one
        top = power_iteration_max(g)
        exact = float(np.linalg.eigvalsh(g)[-1])
        assert math.isclose(top, exact, rel_tol=1e-6)

    def test_deterministic_given_seed(self):
        g = random_symmetric(20, 8)
        g = g @ g.T
        assert power_iteration_max(g, seed=3) == power_iteration_max(g, seed=3)


class TestEstimateBounds:
    def test_exact_matches_eigvalsh(self):
        a = random_symmetric(25, 9)
        g = a @ a.T + 0.1 * np.eye(25)
        b = estimate_bounds(g, method="exact")
        w = np.linalg.eigvalsh(g)
        assert math.isclose(b.lambda_min, w[0], rel_tol=1e-10)
        assert math.isclose(b.lambda_max, w[-1], rel_tol=1e-10)

    def test_power_shift_close_to_exact(self):
        a = random_symmetric(25, 10)
        g = a @ a.T + 0.1 * np.eye(25)
        exact = estimate_bounds(g, method="exact")
        approx = estimate_bounds(g, method="power_shift", seed=0)
        assert math.isclose(approx.lambda_max, exact.lambda_max, rel_tol=0.02)
        assert math.isclose(approx.lambda_min, exact.lambda_min, rel_tol=0.15)

    def test_unknown_method_raises(self):
        with pytest.raises(ValueError):
            estimate_bounds(np.eye(3), method="astrology")


class TestSpectralBounds:
    def test_stores_ordered_pair(self):
        b = SpectralBounds(0.5, 2.0)
        assert (b.lambda_min, b.lambda_max) == (0.5, 2.0)

    def test_rejects_inverted_order(self):
        with pytest.raises(ValueError):
            SpectralBounds(2.0, 0.5)

    def test_rejects_negative_lambda_min(self):
        with pytest.raises(ValueError):
            SpectralBounds(-0.1, 1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            SpectralBounds(0.1, math.inf)

    def test_condition_number(self):
        assert condition_number(SpectralBounds(1.0, 9.0)) == 9.0


class TestMatrixIO:
    def test_roundtrip_is_exact(self, tmp_path):
        # 17 significant digits round-trip float64 exactly.
        rng = np.random.default_rng(11)
        a = rng.standard_normal((7, 4)) * np.logspace(-12, 12, 4)
        path = tmp_path / "m.txt"
        save_matrix(path, a)
        back = load_matrix(path)
        assert back.shape == a.shape
        assert np.array_equal(back, a)

    def test_header_carries_shape(self, tmp_path):
        path = tmp_path / "m.txt"
        save_matrix(path, np.zeros((3, 5)))
        first = path.read_text().splitlines()[0]
        assert first.split() == ["3", "5"]
