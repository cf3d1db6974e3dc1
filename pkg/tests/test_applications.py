"""Deferral cost model, cost-bound intervals, Gaussian-KL drift."""

import math

import numpy as np
import pytest

from logit_uncertainty import (
    CostCurve,
    Gaussian1D,
    cost_bound_range,
    cost_bound_sweep,
    cost_curve,
    deferral_cost,
    drift_kl,
    drift_sweep,
    fit_gaussian_1d,
    kl_gaussian,
)
from logit_uncertainty.applications import write_cost_bound_csv
from logit_uncertainty.errors import EmptyInput, LengthMismatch


class TestDeferralCost:
    def test_threshold_zero_defers_everything(self):
        u = [0.1, 0.9, 0.4, 0.6]
        assert deferral_cost(u, [True] * 4, t=0.0, c=5.0) == 4.0

    def test_threshold_one_keeps_everything(self):
        u = [0.1, 0.9, 0.4]
        correct = [True, False, False]
        assert deferral_cost(u, correct, t=1.0, c=3.0) == 3.0 * 2

    def test_hand_enumerated_case(self):
        assert deferral_cost([0.1, 0.9, 0.4], [True, False, False], t=0.5, c=2.0) == 3.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            deferral_cost([0.1, 0.2], [True], t=0.5, c=1.0)

    def test_nonincreasing_in_threshold_at_zero_error_cost(self):
        rng = np.random.default_rng(0)
        u = rng.uniform(size=200)
        ok = rng.uniform(size=200) < 0.8
        costs = [deferral_cost(u, ok, t, 0.0) for t in np.linspace(0, 1, 21)]
        assert all(b <= a for a, b in zip(costs, costs[1:]))

    def test_nondecreasing_in_error_cost(self):
        rng = np.random.default_rng(1)
        u = rng.uniform(size=200)
        ok = rng.uniform(size=200) < 0.8
        costs = [deferral_cost(u, ok, 0.5, c) for c in np.linspace(0, 10, 11)]
        assert all(b >= a for a, b in zip(costs, costs[1:]))

    def test_decomposition_matches_brute_force_recount(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            n = int(rng.integers(1, 30))
            u = rng.uniform(size=n)
            ok = rng.uniform(size=n) < 0.7
            t = float(rng.uniform())
            c = float(rng.uniform(0, 5))
            deferred = sum(1 for v in u if v > t)
            kept_err = sum(1 for v, o in zip(u, ok) if v <= t and not o)
            assert deferral_cost(u, ok, t, c) == deferred + c * kept_err
            curve = cost_curve(u, ok, t)
            assert (curve.deferred, curve.kept_errors) == (deferred, kept_err)


class TestCostBoundRange:
    def test_linear_inequality_solution(self):
        a = CostCurve(threshold=0.5, deferred=10, kept_errors=2)
        b = CostCurve(threshold=0.5, deferred=20, kept_errors=1)
        bound = cost_bound_range(a, b)
        assert not bound.empty
        assert bound.c_low == 0.0
        assert bound.c_high == pytest.approx(10.0)

    def test_equal_errors_decided_by_deferrals(self):
        a = CostCurve(0.5, 10, 3)
        b = CostCurve(0.5, 12, 3)
        bound = cost_bound_range(a, b)
        assert (bound.c_low, bound.c_high, bound.empty) == (0.0, math.inf, False)

    def test_dominated_method_gets_empty_interval(self):
        a = CostCurve(0.5, 20, 5)
        b = CostCurve(0.5, 10, 2)
        bound = cost_bound_range(a, b)
        assert bound.empty
        assert bound.c_low > bound.c_high

    def test_threshold_mismatch_rejected(self):
        with pytest.raises(ValueError):
            cost_bound_range(CostCurve(0.5, 1, 1), CostCurve(0.6, 1, 1))

    def test_interval_membership_is_exact_on_random_instances(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            da, db = rng.integers(0, 100, size=2)
            ea, eb = rng.integers(0, 50, size=2)
            a = CostCurve(0.5, int(da), int(ea))
            b = CostCurve(0.5, int(db), int(eb))
            bound = cost_bound_range(a, b)
            for c in rng.uniform(0, 200, size=8):
                if not bound.empty and c in (bound.c_low, bound.c_high):
                    continue  # boundary: open/closed is below float resolution here
                cheaper = da + c * ea < db + c * eb
                inside = (not bound.empty) and bound.c_low < c < bound.c_high
                assert cheaper == inside, (da, ea, db, eb, c, bound)


class TestCostBoundSweep:
    def test_dominating_method_is_unbounded_everywhere(self):
        u_a = [0.1, 0.2, 0.3]
        ok_a = [True, True, True]
        u_b = [0.9, 0.9, 0.9]
        ok_b = [False, False, False]
        rows = cost_bound_sweep(u_a, ok_a, u_b, ok_b, [0.5, 0.95])
        # at t=0.5, A defers nothing and errs nothing; B defers everything
        assert rows[0].bound == pytest.approx((0.0, math.inf, False)) or (
            rows[0].bound.c_low == 0.0 and rows[0].bound.c_high == math.inf
        )
        assert not rows[0].bound.empty

    def test_identical_methods_always_empty(self):
        u = [0.1, 0.6, 0.8]
        ok = [True, False, True]
        rows = cost_bound_sweep(u, ok, u, ok, [0.0, 0.5, 1.0])
        assert all(r.bound.empty for r in rows)

    def test_conservative_versus_permissive_hand_solved(self):
        # A defers more, errs less; B keeps more, errs more
        u_a = [0.9, 0.9, 0.1, 0.1, 0.1]
        ok_a = [False, False, True, True, True]
        u_b = [0.3, 0.3, 0.1, 0.1, 0.1]
        ok_b = [False, False, True, True, True]
        rows = cost_bound_sweep(u_a, ok_a, u_b, ok_b, [0.5])
        # A: D=2, E=0; B: D=0, E=2 -> 2 < 2c  <=>  c > 1
        r = rows[0]
        assert (r.deferred_a, r.kept_errors_a) == (2, 0)
        assert (r.deferred_b, r.kept_errors_b) == (0, 2)
        assert r.bound.c_low == pytest.approx(1.0)
        assert r.bound.c_high == math.inf

    def test_csv_encoding(self, tmp_path):
        rows = cost_bound_sweep(
            [0.9], [False], [0.1], [False], [0.5], out_path=tmp_path / "b.csv"
        )
        text = (tmp_path / "b.csv").read_text().strip().split("\n")
        assert text[0] == "threshold,d_a,e_a,d_b,e_b,c_low,c_high,empty"
        # A defers its one error, B keeps it: A wins iff c > 1
        assert text[1] == "0.5,1,0,0,1,1,inf,false"
        write_cost_bound_csv(
            cost_bound_sweep([0.1], [True], [0.1], [True], [0.5]),
            tmp_path / "empty.csv",
        )
        line = (tmp_path / "empty.csv").read_text().strip().split("\n")[1]
        assert line.endswith("true")
        c_low, c_high = line.split(",")[5:7]
        assert float(c_low) > float(c_high)

    def test_needs_thresholds(self):
        with pytest.raises(EmptyInput):
            cost_bound_sweep([0.1], [True], [0.1], [True], [])


class TestGaussianFit:
    def test_two_point_fit(self):
        g = fit_gaussian_1d([0.0, 2.0])
        assert (g.mu, g.sigma) == (1.0, 1.0)

    def test_degenerate_values_hit_floor(self):
        g = fit_gaussian_1d([0.7] * 20)
        assert g.sigma == 1e-6

    def test_monte_carlo_recovery(self):
        rng = np.random.default_rng(9)
        g = fit_gaussian_1d(rng.normal(3.0, 2.0, size=100000))
        assert abs(g.mu - 3.0) < 0.02
        assert abs(g.sigma - 2.0) < 0.02

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            fit_gaussian_1d([])


class TestKlGaussian:
    def test_identity_is_zero(self):
        g = Gaussian1D(mu=0.3, sigma=0.2)
        assert kl_gaussian(g, g) == 0.0

    def test_unit_mean_shift(self):
        assert kl_gaussian(Gaussian1D(0.0, 1.0), Gaussian1D(1.0, 1.0)) == pytest.approx(
            0.5, abs=1e-12
        )

    def test_variance_widening(self):
        expected = math.log(2.0) + 1.0 / 8.0 - 0.5
        assert kl_gaussian(Gaussian1D(0.0, 1.0), Gaussian1D(0.0, 2.0)) == pytest.approx(
            expected, abs=1e-12
        )

    def test_nonnegative_and_zero_only_at_equality(self):
        rng = np.random.default_rng(10)
        for _ in range(500):
            p = Gaussian1D(float(rng.normal()), float(rng.uniform(0.01, 3)))
            q = Gaussian1D(float(rng.normal()), float(rng.uniform(0.01, 3)))
            kl = kl_gaussian(p, q)
            assert kl >= 0.0
            if abs(kl) <= 1e-12:
                assert abs(p.mu - q.mu) < 1e-5 and abs(p.sigma - q.sigma) < 1e-5


class TestDrift:
    def test_same_vector_gives_zero(self):
        u = np.linspace(0.05, 0.95, 500)
        assert drift_kl(u, u) == 0.0

    def test_fresh_sample_from_same_law_is_small(self):
        rng = np.random.default_rng(11)
        reference = rng.beta(2, 5, size=10000)
        stream = rng.beta(2, 5, size=10000)
        assert drift_kl(reference, stream) < 0.01

    def test_sweep_is_monotone(self):
        rng = np.random.default_rng(12)
        reference = rng.beta(2, 8, size=8000)  # low-uncertainty regime
        contaminant = rng.uniform(0.9, 1.0, size=8000)
        rows = drift_sweep(
            reference, contaminant, [i / 10 for i in range(11)], 4000, seed=5
        )
        kls = [kl for _, kl in rows]
        assert kls[0] < 0.01
        assert all(b >= a - 0.005 for a, b in zip(kls, kls[1:]))

    def test_csv(self, tmp_path):
        rng = np.random.default_rng(13)
        reference = rng.beta(2, 8, size=2000)
        contaminant = rng.uniform(0.9, 1.0, size=2000)
        drift_sweep(reference, contaminant, [0.0, 0.5, 1.0], 1000, seed=5,
                    out_path=tmp_path / "d.csv")
        lines = (tmp_path / "d.csv").read_text().strip().split("\n")
        assert lines[0] == "fraction,kl"
        assert len(lines) == 4

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            drift_kl([], [0.5])
