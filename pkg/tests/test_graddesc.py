"""Gradient descent on quadratics: schedules, momentum, semi-iterative method."""

import math

import numpy as np
import pytest

from chebaccel import (
    DegenerateSpectrumError,
    QuadraticProblem,
    SpectralBounds,
    StepSchedule,
    chebyshev_semi_coefficients,
    chebyshev_steps,
    condition_number,
    constant_schedule,
    load_trace,
    make_gaussian_gram_problem,
    mse_radius_identity,
    permutation_search,
    rho_upp,
    run_chebyshev_semi,
    run_gd,
    run_momentum,
    save_trace,
    spectral_radius_qt,
)


def diag_problem(eigenvalues) -> QuadraticProblem:
    return QuadraticProblem.from_matrix(np.diag(np.asarray(eigenvalues, dtype=float)))


P19 = diag_problem([1.0, 9.0])


class TestQuadraticProblem:
    def test_from_matrix_bounds(self):
        p = diag_problem([0.5, 2.0, 7.0])
        assert p.bounds.lambda_min == pytest.approx(0.5)
        assert p.bounds.lambda_max == pytest.approx(7.0)
        assert p.n == 3
        assert p.condition_number() == pytest.approx(14.0)

    def test_rejects_singular_matrix(self):
        with pytest.raises(DegenerateSpectrumError):
            diag_problem([0.0, 1.0])

    def test_minimizer_is_origin(self):
        p = diag_problem([1.0, 2.0])
        assert np.array_equal(p.minimizer(), np.zeros(2))
        assert p.error(np.array([3.0, 4.0])) == pytest.approx(5.0)

    def test_gradient_matches_objective(self):
        rng = np.random.default_rng(0)
        a = rng.standard_normal((6, 6))
        p = QuadraticProblem.from_matrix(a @ a.T + 0.5 * np.eye(6))
        x = rng.standard_normal(6)
        g = p.gradient(x)
        h = 1e-6
        for i in range(6):
            e = np.zeros(6)
            e[i] = h
            fd = (p.objective(x + e) - p.objective(x - e)) / (2 * h)
            assert math.isclose(g[i], fd, rel_tol=1e-4, abs_tol=1e-6)


class TestGaussianGramProblem:
    def test_well_conditioned_instance(self):
        # aspect ratio 4: spectrum support approaches [1, 9]
        p = make_gaussian_gram_problem(300, 1200, seed=0)
        kappa = condition_number(p.bounds)
        assert abs(kappa - 8.79) / 8.79 < 0.10

    def test_ill_conditioned_instance(self):
        p = make_gaussian_gram_problem(300, 450, seed=0)
        kappa = condition_number(p.bounds)
        assert abs(kappa - 88.1) / 88.1 < 0.25

    def test_metadata_records_recipe(self):
        p = make_gaussian_gram_problem(50, 200, seed=3)
        md = p.metadata
        assert md["n"] == 50 and md["m"] == 200 and md["seed"] == 3
        assert md["mp_lambda_min"] == pytest.approx((1 - math.sqrt(4.0)) ** 2)
        assert md["mp_lambda_max"] == pytest.approx((1 + math.sqrt(4.0)) ** 2)

    def test_spectrum_inside_asymptotic_support_margin(self):
        p = make_gaussian_gram_problem(200, 800, seed=1)
        assert p.bounds.lambda_min > 0.5
        assert p.bounds.lambda_max < 10.5


class TestRunGd:
    def test_origin_is_fixed(self):
        tr = run_gd(P19, constant_schedule(0.2), np.zeros(2), 10)
        assert np.all(tr.errors == 0.0)

    def test_trace_shape(self):
        tr = run_gd(P19, constant_schedule(0.2), np.ones(2), 7)
        assert list(tr.iterations) == list(range(8))
        assert len(tr.errors) == 8
        assert tr.errors[0] == pytest.approx(math.sqrt(2.0))

    def test_slow_mode_contracts_at_plain_rate(self):
        # x0 along the lambda=1 eigenvector, step 2/(a+b): ratio (kappa-1)/(kappa+1)
        tr = run_gd(P19, constant_schedule(0.2), np.array([1.0, 0.0]), 20)
        ratios = np.array(tr.errors[1:]) / np.array(tr.errors[:-1])
        np.testing.assert_allclose(ratios, 0.8, rtol=1e-12)

    def test_period_two_beats_worst_case_bound(self):
        sched = chebyshev_steps(SpectralBounds(1.0, 9.0), 2)
        bound = rho_upp(SpectralBounds(1.0, 9.0), 2)
        for seed in range(5):
            x0 = np.random.default_rng(seed).standard_normal(2)
            tr = run_gd(P19, sched, x0, 2)
            assert tr.errors[2] <= bound * tr.errors[0] * (1.0 + 1e-12)

    def test_per_period_contraction_random_problems(self):
        rng = np.random.default_rng(7)
        for trial in range(10):
            eigs = np.sort(rng.uniform(0.2, 5.0, size=8))
            p = diag_problem(eigs)
            for t in (2, 4, 8):
                sched = chebyshev_steps(p.bounds, t)
                bound = rho_upp(p.bounds, t)
                tr = run_gd(p, sched, rng.standard_normal(8), 3 * t)
                for k in range(3):
                    assert tr.errors[(k + 1) * t] <= bound * tr.errors[k * t] + 1e-12

    def test_period_endpoint_invariant_to_step_order(self):
        # the period product is a polynomial in A, so ordering cannot matter
        p = diag_problem(np.linspace(1.0, 9.0, 6))
        x0 = np.random.default_rng(5).standard_normal(6)
        nat = run_gd(p, chebyshev_steps(p.bounds, 8), x0, 8)
        zig = run_gd(p, permutation_search(p.bounds, 8), x0, 8)
        assert math.isclose(nat.errors[8], zig.errors[8], rel_tol=1e-10, abs_tol=1e-14)


class TestMomentum:
    def test_coefficients_for_kappa_nine(self):
        tr = run_momentum(P19, np.ones(2), 5)
        assert tr.meta["gamma_prime"] == pytest.approx(0.25)
        assert tr.meta["beta"] == pytest.approx(0.25)

    def test_origin_is_fixed(self):
        tr = run_momentum(P19, np.zeros(2), 10)
        assert np.all(tr.errors == 0.0)

    def test_asymptotic_rate_matches_square_root_conditioning(self):
        # geometric mean ratio over a late window converges to 0.5 for kappa=9
        tr = run_momentum(P19, np.ones(2), 100)
        rate = (tr.errors[100] / tr.errors[80]) ** (1.0 / 20.0)
        assert abs(rate - 0.5) < 0.05 * 0.5 + 0.01

    def test_rejects_unit_conditioning(self):
        p = QuadraticProblem.from_matrix(np.eye(3))
        with pytest.raises(DegenerateSpectrumError):
            run_momentum(p, np.ones(3), 5)

    def test_beats_constant_step_on_gram_instance(self):
        p = make_gaussian_gram_problem(60, 240, seed=2)
        x0 = np.random.default_rng(2).standard_normal(60)
        const = run_gd(p, constant_schedule(2.0 / (p.bounds.lambda_min + p.bounds.lambda_max)), x0, 60)
        mom = run_momentum(p, x0, 60)
        assert mom.errors[-1] < const.errors[-1]


class TestChebyshevSemi:
    def test_frozen_coefficient_prefix(self):
        c = chebyshev_semi_coefficients(9.0, 4)
        np.testing.assert_allclose(
            c, [1.0, 81.0 / 49.0, 49.0 / 33.0, 2673.0 / 1889.0], rtol=1e-12
        )

    def test_coefficients_decrease_toward_limit(self):
        c = chebyshev_semi_coefficients(9.0, 200)
        xi = 8.0 / 9.0
        g_star = 2.0 * (1.0 - math.sqrt(1.0 - xi * xi)) / (xi * xi)
        assert np.all(np.diff(c[1:]) < 0.0)
        assert np.all(c[1:] > g_star)
        assert math.isclose(c[-1], g_star, rel_tol=1e-8)

    def test_meta_records_xi(self):
        p = diag_problem(np.linspace(1.0, 9.0, 4))
        tr = run_chebyshev_semi(p, np.ones(4), 3)
        assert tr.meta["xi"] == pytest.approx(1.0 - 1.0 / 9.0)

    def test_accelerates_past_constant_step(self):
        p = diag_problem(np.linspace(1.0, 9.0, 16))
        x0 = np.random.default_rng(4).standard_normal(16)
        gamma = 2.0 / (p.bounds.lambda_min + p.bounds.lambda_max)
        const = run_gd(p, constant_schedule(gamma), x0, 50)
        semi = run_chebyshev_semi(p, x0, 50)
        assert semi.errors[-1] < 1e-4 * const.errors[-1]

    def test_origin_is_fixed(self):
        tr = run_chebyshev_semi(P19, np.zeros(2), 8)
        assert np.all(tr.errors == 0.0)


class TestSpectralRadius:
    def test_constant_schedule_period_six(self):
        r = spectral_radius_qt(P19, constant_schedule(0.2, period=6))
        assert math.isclose(r, 0.262144, rel_tol=1e-12)

    def test_chebyshev_schedule_below_worst_case(self):
        rng = np.random.default_rng(9)
        eigs = np.sort(rng.uniform(1.0, 9.0, size=12))
        eigs[0], eigs[-1] = 1.0, 9.0
        p = diag_problem(eigs)
        for t in (2, 4, 8):
            r = spectral_radius_qt(p, chebyshev_steps(SpectralBounds(1.0, 9.0), t))
            assert r <= rho_upp(SpectralBounds(1.0, 9.0), t) * (1.0 + 1e-12)

    def test_annihilating_schedule_gives_zero(self):
        # steps hitting every reciprocal eigenvalue zero out the period map
        sched = StepSchedule(steps=np.array([1.0, 1.0 / 9.0]))
        assert spectral_radius_qt(P19, sched) < 1e-12


class TestMseRadiusIdentity:
    def test_analytic_and_monte_carlo_agree(self):
        sched = constant_schedule(0.2)
        samples = 10_000
        rho, sqrt_nl = mse_radius_identity(P19, sched, samples=samples, seed=0)
        assert math.isclose(rho, 0.8, rel_tol=1e-12)
        analytic = 0.64 + 0.64  # sum of beta^2 over the two eigenvalues
        se = math.sqrt(2.0 * (0.8**4 + 0.8**4) / samples)
        assert abs(sqrt_nl**2 - analytic) < 3.0 * se

    def test_radius_never_exceeds_mse_bound(self):
        rng = np.random.default_rng(11)
        for trial in range(5):
            eigs = np.sort(rng.uniform(0.5, 4.0, size=6))
            p = diag_problem(eigs)
            sched = chebyshev_steps(p.bounds, 4)
            rho, sqrt_nl = mse_radius_identity(p, sched, samples=2000, seed=trial)
            # MC noise: compare against the analytic bound, not the estimate
            from chebaccel import beta_t

            analytic = float(np.sum(beta_t(sched, eigs) ** 2))
            assert rho * rho <= analytic * (1.0 + 1e-12)


class TestTraceIO:
    def test_roundtrip_preserves_meta_types(self, tmp_path):
        tr = run_gd(P19, constant_schedule(0.2), np.ones(2), 5)
        tr.meta.update({"label": "demo", "flag": True, "count": 3, "scale": 0.125})
        path = tmp_path / "trace.csv"
        save_trace(path, tr)
        back = load_trace(path)
        assert np.array_equal(np.asarray(back.errors), np.asarray(tr.errors))
        assert list(back.iterations) == list(tr.iterations)
        assert back.meta["label"] == "demo"
        assert back.meta["flag"] is True
        assert back.meta["count"] == 3
        assert back.meta["scale"] == 0.125
