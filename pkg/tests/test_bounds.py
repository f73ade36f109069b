"""Closed-form thresholds, tail bounds, and the t-equation solver."""

import math

import pytest

from irrigation_lab.bounds import (
    TailBoundInputs,
    binomial_concentration,
    c1_tail_bound,
    chernoff_upper,
    delta_good_prob_bound,
    irrigation_connectivity_threshold,
    link_event_bound,
    mapping_window_radius,
    rgg_connectivity_radius,
    solve_t,
    t_zero,
)


class TestThresholdFormulas:
    def test_rgg_radius_value_and_identity(self):
        r = rgg_connectivity_radius(10**6)
        assert r == pytest.approx(0.0020970487818066054, abs=1e-15)
        assert r * r * math.pi * 10**6 == pytest.approx(math.log(10**6))
        with pytest.raises(ValueError, match="at least 3"):
            rgg_connectivity_radius(2)

    def test_irrigation_threshold_closed_form_points(self):
        # At n = e^e the denominator log log n is exactly 1.
        assert irrigation_connectivity_threshold(math.exp(math.e)) == pytest.approx(
            math.sqrt(2.0 * math.e), abs=1e-12
        )
        assert irrigation_connectivity_threshold(10**6) == pytest.approx(
            3.243906396180841, abs=1e-12
        )
        with pytest.raises(ValueError, match="must exceed e"):
            irrigation_connectivity_threshold(math.e)

    def test_mapping_window_radius(self):
        n = 10**6
        assert mapping_window_radius(n) == pytest.approx(
            (n * math.log(n)) ** (-1.0 / 3.0), abs=1e-15
        )
        with pytest.raises(ValueError, match="at least 3"):
            mapping_window_radius(1)


class TestElementaryBounds:
    def test_chernoff_pinned_value(self):
        # k*p*(u - 1 - u log u) = 10 - 20 log 2, i.e. e^10 / 2^20.
        value = chernoff_upper(100, 0.1, 2.0)
        assert value == pytest.approx(0.02100607470970795, abs=1e-15)
        assert value == pytest.approx(math.exp(10.0) / 2.0**20, abs=1e-15)

    def test_chernoff_validation(self):
        with pytest.raises(ValueError, match="u must exceed 1"):
            chernoff_upper(100, 0.1, 1.0)
        with pytest.raises(ValueError, match="k > 0"):
            chernoff_upper(0, 0.1, 2.0)
        with pytest.raises(ValueError, match="k > 0"):
            chernoff_upper(10, 1.5, 2.0)

    def test_binomial_concentration_pinned_value(self):
        # n*p*delta^2/3 = 10000*0.1*0.09/3 = 30.
        value = binomial_concentration(10000, 0.1, 0.3)
        assert value == pytest.approx(2.0 * math.exp(-30.0), abs=1e-25)
        assert value == pytest.approx(1.871524593768035e-13, abs=1e-25)

    def test_binomial_concentration_is_unclipped(self):
        assert binomial_concentration(10, 0.1, 0.01) > 1.0

    def test_binomial_concentration_validation(self):
        with pytest.raises(ValueError, match="delta must lie"):
            binomial_concentration(10, 0.1, 0.0)
        with pytest.raises(ValueError, match="delta must lie"):
            binomial_concentration(10, 0.1, 1.0)
        with pytest.raises(ValueError, match="n > 0"):
            binomial_concentration(0, 0.1, 0.3)


class TestC1TailBound:
    def test_input_validation(self):
        with pytest.raises(ValueError, match="n must be"):
            TailBoundInputs(2, 0.1, 2.0, 1.0)
        with pytest.raises(ValueError, match="r must lie"):
            TailBoundInputs(100, 0.5, 2.0, 1.0)
        with pytest.raises(ValueError, match="t must be"):
            TailBoundInputs(100, 0.1, 0.5, 1.0)
        with pytest.raises(ValueError, match="eps must be"):
            TailBoundInputs(100, 0.1, 2.0, 0.0)

    def test_desk_scale_threshold_and_vacuous_second_term(self):
        out = c1_tail_bound(TailBoundInputs(10**6, 2e-4, 4.0, 2.0))
        # t*n*r^2 = 0.16: threshold = 2 + 1.16^3 * 9 * log(n)^2.
        want = 2.0 + 1.16**3 * 9.0 * math.log(10**6) ** 2
        assert out.threshold == pytest.approx(want, abs=1e-9)
        assert out.threshold == pytest.approx(2683.330543189265, abs=1e-9)
        assert out.term1 == pytest.approx(1.487352107293515e-07, rel=1e-12)
        assert out.term1 == pytest.approx(
            (10**6) ** (-2.0 + 1.0 / 1.16), rel=1e-12
        )
        # (n-2)*pi*r^2*(t-1-t log t) is only about -0.32, so the n^2 prefactor
        # leaves the second term astronomically large: the bound collapses to 1.
        assert out.term2 > 1.0
        assert out.second_term_vacuous
        assert out.bound == 1.0

    def test_informative_regime_adds_both_terms(self):
        out = c1_tail_bound(TailBoundInputs(10**6, 3e-3, 4.0, 2.0))
        n = 10**6
        term1 = n ** (-2.0 + 1.0 / 37.0)
        term2 = n * n * math.exp(
            (n - 2) * math.pi * 9e-6 * (4.0 - 1.0 - 4.0 * math.log(4.0))
        )
        assert out.term1 == pytest.approx(term1, rel=1e-12)
        assert out.term2 == pytest.approx(term2, rel=1e-12)
        assert out.term2 < 1e-18
        assert not out.second_term_vacuous
        assert out.bound == pytest.approx(term1 + term2, rel=1e-12)
        assert out.bound < 1.0

    def test_t_equal_one_degenerates(self):
        out = c1_tail_bound(TailBoundInputs(1000, 1e-2, 1.0, 2.0))
        assert out.term2 == pytest.approx(1000.0**2)
        assert out.second_term_vacuous
        assert out.bound == 1.0

    def test_unpacks_as_threshold_and_bound(self):
        threshold, bound = c1_tail_bound(TailBoundInputs(10**6, 2e-4, 4.0, 2.0))
        assert threshold == pytest.approx(2683.330543189265, abs=1e-9)
        assert bound == 1.0


class TestTEquation:
    def test_t_zero_pinned_and_satisfies_equation(self):
        t0 = t_zero()
        assert t0 == pytest.approx(3.5911214766686217, abs=1e-14)
        assert t0 * math.log(t0) - t0 - 1.0 == pytest.approx(0.0, abs=1e-12)

    def test_convexity_keeps_curve_above_tangent_at_t_zero(self):
        t0 = t_zero()
        for t in (1.5, 3.0, 5.0, 8.0):
            f = t * math.log(t) - t - 1.0
            assert f > (t - t0) * math.log(t0)

    def test_desk_scale_root(self):
        t = solve_t(10**6, 1e-3)
        assert t == pytest.approx(9.635304403565984, abs=1e-10)
        rhs = 3.0 * math.log(10**6) / (math.pi * 10**6 * 1e-6)
        assert t * math.log(t) + 1.0 - t == pytest.approx(rhs, abs=1e-10)

    def test_residuals_vanish_across_a_grid(self):
        for n in (10**4, 10**6):
            for r in (1e-3, 5e-3, 2e-2):
                t = solve_t(n, r)
                rhs = 3.0 * math.log(n) / (math.pi * n * r * r)
                assert abs(t * math.log(t) + 1.0 - t - rhs) < 1e-10

    def test_right_side_two_recovers_t_zero(self):
        # r chosen so 3 log n/(pi n r^2) == 2, where the root is t_zero.
        n = 10**6
        r = math.sqrt(3.0 * math.log(n) / (2.0 * math.pi * n))
        assert solve_t(n, r) == pytest.approx(t_zero(), abs=1e-9)

    def test_vanishing_right_side_stays_just_above_one(self):
        # Near t = 1 the equation flattens below float resolution; the solver
        # must still come back strictly above 1 and essentially at it.
        t = solve_t(10**22, 0.45)
        assert 1.0 < t < 1.0 + 1e-6

    def test_validation(self):
        with pytest.raises(ValueError, match="n must be"):
            solve_t(2, 0.01)
        with pytest.raises(ValueError, match="r must lie"):
            solve_t(1000, 0.7)


class TestEventBounds:
    def test_link_event_bound_pinned_value(self):
        value = link_event_bound(1000, 3, 1, 0.1)
        beta = 1.1 * (0.5 + 3.0 / 16.0)
        expected = -math.expm1(-1000.0 / (10.0 * beta) ** 3)
        assert value == pytest.approx(expected, abs=1e-15)
        assert value == pytest.approx(0.9009455140886109, abs=1e-13)

    def test_link_event_bound_edge_cases(self):
        assert link_event_bound(0, 3, 1, 0.1) == 0.0
        assert link_event_bound(2000, 3, 1, 0.1) > link_event_bound(1000, 3, 1, 0.1)
        with pytest.raises(ValueError, match="odd integers"):
            link_event_bound(10, 2, 1, 0.1)
        with pytest.raises(ValueError, match="odd integers"):
            link_event_bound(10, 3, 4, 0.1)
        with pytest.raises(ValueError, match="delta must lie"):
            link_event_bound(10, 3, 1, 0.3)
        with pytest.raises(ValueError, match="nonnegative"):
            link_event_bound(-1, 3, 1, 0.1)

    def test_goodness_bound_in_the_strong_regime(self):
        out = delta_good_prob_bound(10**6, 20.0, 0.5, 5, 1)
        assert out.m == 6
        assert out.all_cells_regime
        assert not out.vacuous
        # 1 - 2*(6*5)^2 * n^(-100/24) is within one ulp of 1.
        assert out.value == 1.0
        assert float(out) == 1.0

    def test_goodness_bound_vacuous_regime(self):
        out = delta_good_prob_bound(1000, 1.0, 0.5, 5, 1)
        assert out.value == 0.0
        assert out.vacuous
        assert not out.all_cells_regime

    def test_goodness_bound_matches_direct_formula(self):
        n, gamma, delta, k, d = 10**5, 8.0, 0.4, 3, 1
        out = delta_good_prob_bound(n, gamma, delta, k, d)
        r = gamma * math.sqrt(math.log(n) / n)
        m = math.ceil(2.0 / (k * r) - 1e-9)
        raw = 1.0 - 2.0 * (m * k * d) ** 2 * n ** (
            -gamma * gamma * delta * delta / (24.0 * d * d)
        )
        assert out.m == m
        assert out.value == pytest.approx(min(max(raw, 0.0), 1.0), abs=1e-15)

    def test_goodness_bound_validation(self):
        with pytest.raises(ValueError, match="gamma > 0"):
            delta_good_prob_bound(1000, -1.0, 0.5, 5, 1)
        with pytest.raises(ValueError, match="odd integers"):
            delta_good_prob_bound(1000, 2.0, 0.5, 2, 1)
        with pytest.raises(ValueError, match="outside"):
            delta_good_prob_bound(3, 2.0, 0.5, 1, 1)
