"""Chebyshev polynomials, step schedules, rates, and the permutation search."""

import math

import mpmath
import numpy as np
import pytest

from chebaccel import (
    DegenerateSpectrumError,
    SizeLimitError,
    SpectralBounds,
    StepSchedule,
    beta_t,
    cheb_eval,
    cheb_nodes,
    chebyshev_psor_factors,
    chebyshev_steps,
    constant_schedule,
    load_schedule,
    permutation_search,
    rate_report,
    rho_upp,
    save_schedule,
    theorem2_margin,
)

B19 = SpectralBounds(1.0, 9.0)


def mp_steps(a: float, b: float, period: int) -> list:
    """Step schedule recomputed at 50 digits."""
    with mpmath.workdps(50):
        lp = (mpmath.mpf(b) + mpmath.mpf(a)) / 2
        lm = (mpmath.mpf(b) - mpmath.mpf(a)) / 2
        out = []
        for t in range(period):
            node = mpmath.cos((2 * t + 1) * mpmath.pi / (2 * period))
            out.append(float(1 / (lp + lm * node)))
        return sorted(out)


class TestChebEval:
    def test_degree_zero_is_one(self):
        assert cheb_eval(0, 0.37) == 1.0

    def test_known_value_outside_unit_interval(self):
        # acosh(1.25) = ln 2, so C_6(1.25) = cosh(6 ln 2) = (64 + 1/64)/2.
        assert math.isclose(cheb_eval(6, 1.25), 32.0078125, rel_tol=1e-12)

    def test_polynomial_identity_at_negative_argument(self):
        # C_3(x) = 4x^3 - 3x and C_2(x) = 2x^2 - 1
        assert math.isclose(cheb_eval(3, -2.0), -26.0, rel_tol=1e-12)
        assert math.isclose(cheb_eval(2, -2.0), 7.0, rel_tol=1e-12)

    def test_cosine_identity_inside_unit_interval(self):
        for theta in np.linspace(0.0, math.pi, 23):
            for n in (1, 2, 5, 11):
                assert math.isclose(
                    cheb_eval(n, math.cos(theta)), math.cos(n * theta), abs_tol=1e-12
                )

    def test_recurrence_matches_cosh_branch_near_boundary(self):
        # Both branches must agree where they meet.
        lo = cheb_eval(9, 1.0 - 1e-13)
        hi = cheb_eval(9, 1.0 + 1e-13)
        assert math.isclose(lo, hi, rel_tol=1e-9)

    def test_rejects_negative_degree(self):
        with pytest.raises(ValueError):
            cheb_eval(-1, 0.5)


class TestChebNodes:
    def test_strictly_decreasing(self):
        for n in (1, 2, 5, 8, 13):
            assert np.all(np.diff(cheb_nodes(n)) < 0)

    def test_odd_count_has_exact_zero_middle(self):
        nodes = cheb_nodes(7)
        assert nodes[3] == 0.0

    def test_exactly_antisymmetric(self):
        for n in (4, 9):
            nodes = cheb_nodes(n)
            assert np.array_equal(nodes, -nodes[::-1])

    def test_matches_cosine_formula(self):
        n = 10
        expected = np.cos((2 * np.arange(n) + 1) * np.pi / (2 * n))
        np.testing.assert_allclose(cheb_nodes(n), expected, atol=1e-15)


class TestChebyshevSteps:
    def test_period_one_is_optimal_constant(self):
        s = chebyshev_steps(SpectralBounds(0.3, 2.2), 1)
        assert s.steps[0] == 2.0 / (0.3 + 2.2)

    def test_frozen_period_two_values(self):
        s = chebyshev_steps(B19, 2)
        np.testing.assert_allclose(
            s.steps, [0.12773958089728293, 0.46049571322036414], rtol=1e-15
        )

    def test_steps_ascending(self):
        s = chebyshev_steps(B19, 8)
        assert np.all(np.diff(s.steps) > 0)

    def test_matches_high_precision_oracle(self):
        a, b = 0.18, 0.98
        got = np.sort(chebyshev_steps(SpectralBounds(a, b), 8).steps)
        np.testing.assert_allclose(got, mp_steps(a, b, 8), rtol=1e-14)

    def test_kind_recorded(self):
        assert chebyshev_steps(B19, 3).kind == "chebyshev"

    def test_rejects_zero_lambda_min(self):
        with pytest.raises(DegenerateSpectrumError):
            chebyshev_steps(SpectralBounds(0.0, 1.0), 2)

    def test_rejects_collapsed_bounds(self):
        with pytest.raises(DegenerateSpectrumError):
            chebyshev_steps(SpectralBounds(0.7, 0.7), 2)


class TestPsorFactors:
    def test_period_one_constant_factor(self):
        f = chebyshev_psor_factors(SpectralBounds(0.6766, 1.922), 1)
        assert math.isclose(f.steps[0], 0.7697, abs_tol=1e-4)

    def test_factors_bracket_reciprocal_bounds(self):
        a, b = 0.18, 0.98
        f = chebyshev_psor_factors(SpectralBounds(a, b), 8).steps
        assert np.all(f > 1.0 / b) and np.all(f < 1.0 / a)
        # period >= 2 straddles the constant-optimal factor
        assert f.min() < 2.0 / (a + b) < f.max()


class TestBetaPolynomial:
    def test_value_at_zero_is_one(self):
        assert beta_t(chebyshev_steps(B19, 5), 0.0) == 1.0

    def test_vanishes_at_reciprocal_steps(self):
        s = chebyshev_steps(B19, 6)
        vals = beta_t(s, 1.0 / s.steps)
        assert np.max(np.abs(vals)) < 1e-12

    def test_scalar_and_array_agree(self):
        s = chebyshev_steps(B19, 4)
        lam = 3.7
        arr = beta_t(s, np.array([lam]))
        assert math.isclose(beta_t(s, lam), float(arr[0]), rel_tol=0.0, abs_tol=0.0)

    def test_equioscillation_on_bounds_interval(self):
        a, b = 0.3, 2.7
        period = 5
        s = chebyshev_steps(SpectralBounds(a, b), period)
        peak = rho_upp(SpectralBounds(a, b), period)
        grid = np.linspace(a, b, 20001)
        vals = np.abs(beta_t(s, grid))
        # never above the bound (modulo last-bit noise), and the bound is attained
        assert vals.max() <= peak * (1.0 + 1e-12)
        assert vals.max() >= peak * (1.0 - 1e-6)
        # equioscillation: T+1 near-peak touches with alternating sign
        touch = np.flatnonzero(np.abs(vals - peak) < 1e-4 * peak)
        groups = 1 + int(np.sum(np.diff(touch) > 1))
        assert groups == period + 1


class TestRhoUpp:
    def test_frozen_anchor_period_six(self):
        # sech(6 ln 2) = 128/4097
        assert math.isclose(rho_upp(B19, 6), 128.0 / 4097.0, rel_tol=1e-14)

    def test_frozen_anchor_period_two(self):
        assert math.isclose(rho_upp(B19, 2), 8.0 / 17.0, rel_tol=1e-14)

    def test_monotone_decreasing_in_period(self):
        vals = [rho_upp(B19, t) for t in range(1, 30)]
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_no_overflow_at_large_period(self):
        v = rho_upp(B19, 1000)
        assert 0.0 < v < 1e-290

    def test_scale_invariant(self):
        # depends only on kappa
        assert math.isclose(
            rho_upp(SpectralBounds(0.5, 4.5), 7), rho_upp(B19, 7), rel_tol=1e-15
        )


class TestRateReport:
    def test_kappa_nine_summary(self):
        r = rate_report(SpectralBounds(1.0 / 9.0, 1.0), 8)
        assert math.isclose(r.rate_constant, 0.8, rel_tol=1e-15)
        assert math.isclose(r.rate_lower_bound, 0.5, rel_tol=1e-15)
        assert math.isclose(r.rate_limit, 0.5, rel_tol=1e-12)
        assert r.rho_org == pytest.approx(1.0 - 1.0 / 9.0)

    def test_rate_limit_closed_form(self):
        r = rate_report(SpectralBounds(0.2, 1.0), 4)
        sk = math.sqrt(5.0)
        assert math.isclose(r.rate_limit, (sk - 1.0) / (sk + 1.0), rel_tol=1e-12)
        assert math.isclose(r.rate_lower_bound, r.rate_limit, rel_tol=1e-12)

    def test_per_iter_rate_brackets(self):
        # limit < per-iteration rate < plain rate, for every finite period
        for t in (2, 4, 8, 16):
            r = rate_report(SpectralBounds(0.2, 1.0), t)
            assert r.rate_limit < r.rate_per_iter < r.rho_org

    def test_per_iter_rate_survives_underflowing_rho(self):
        # at T=5000 the per-period bound underflows to 0 but the geometric
        # mean is still computed in log space
        r = rate_report(B19, 5000)
        assert r.rho_upp_t == 0.0
        assert 0.5 < r.rate_per_iter < 0.501

    def test_rho_org_needs_unit_upper_bound(self):
        assert rate_report(SpectralBounds(0.2, 0.9), 2).rho_org is None
        assert rate_report(SpectralBounds(0.2, 1.0), 2, rho_org_convention=False).rho_org is None


class TestTheorem2Margin:
    def test_frozen_kappa_nine_period_two(self):
        assert math.isclose(theorem2_margin(B19, 2), 0.64 - 8.0 / 17.0, rel_tol=1e-12)

    def test_positive_across_conditioning_sweep(self):
        for kappa in (1.01, 2.0, 9.0, 100.0, 1e3):
            for t in (2, 3, 8, 16):
                assert theorem2_margin(SpectralBounds(1.0, kappa), t) > 0.0

    def test_undefined_for_period_one(self):
        with pytest.raises(ValueError):
            theorem2_margin(B19, 1)


class TestPermutationSearch:
    def test_frozen_period_two_order(self):
        s = permutation_search(B19, 2, u=0.3)
        np.testing.assert_allclose(
            s.steps, [0.12773958089728293, 0.46049571322036414], rtol=1e-12
        )

    def test_reorders_chebyshev_steps_exactly(self):
        for t in range(1, 8):
            got = np.sort(permutation_search(B19, t).steps)
            ref = np.sort(chebyshev_steps(B19, t).steps)
            assert np.array_equal(got, ref)

    def test_zigzag_alternation_at_period_eight(self):
        # the search interleaves small and large steps instead of ramping up
        s = permutation_search(B19, 8).steps
        signs = np.sign(np.diff(s))
        assert not np.all(signs > 0)

    def test_kind_recorded(self):
        assert permutation_search(B19, 3).kind == "chebyshev_permuted"

    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            permutation_search(B19, 11)


class TestStepSchedule:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            StepSchedule(steps=np.empty(0))

    def test_rejects_nonpositive_steps(self):
        with pytest.raises(ValueError):
            StepSchedule(steps=np.array([0.1, 0.0]))
        with pytest.raises(ValueError):
            StepSchedule(steps=np.array([0.1, -0.2]))

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            StepSchedule(steps=np.array([0.1]), kind="improvised")

    def test_step_lookup_is_cyclic(self):
        s = StepSchedule(steps=np.array([0.1, 0.2, 0.3]))
        assert s.period == 3
        assert s.step(0) == 0.1
        assert s.step(4) == 0.2
        assert s.step(3 * 1000) == 0.1

    def test_constant_schedule(self):
        s = constant_schedule(0.25, period=4)
        assert s.kind == "constant"
        assert np.array_equal(s.steps, np.full(4, 0.25))


class TestScheduleIO:
    def test_roundtrip_exact(self, tmp_path):
        s = chebyshev_steps(SpectralBounds(0.123456789, 7.89), 9)
        path = tmp_path / "sched.csv"
        save_schedule(path, s, bounds=SpectralBounds(0.123456789, 7.89))
        back = load_schedule(path)
        assert np.array_equal(back.steps, s.steps)
        assert back.kind == "chebyshev"

    def test_header_comments_present(self, tmp_path):
        path = tmp_path / "sched.csv"
        save_schedule(path, constant_schedule(0.5), bounds=B19)
        text = path.read_text()
        assert "#bounds=1,9\n" in text
        assert "#T=1\n" in text
        assert "#kind=constant\n" in text
        assert "gamma\n" in text
