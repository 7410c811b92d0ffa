"""Core types: utility evaluation/gradients and window algebra."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from tipcue.model import (
    FeasibilityConstraints,
    Footprint,
    TimeInterval,
    Tip,
    UtilityFunction,
    WindowSet,
    interval_overlap_length,
    project,
    utility_eval,
    utility_grad,
)
from tipcue.rng import SplitMix64

H = 3600.0


class TestUtilityEval:
    def test_gaussian_peak_value(self):
        u = UtilityFunction.gaussian(5 * H, H, 1.0)
        assert utility_eval(u, 5 * H) == 1.0

    def test_gaussian_one_sigma_is_inv_e(self):
        # exp(-((6h-5h)/1h)^2) = exp(-1)
        u = UtilityFunction.gaussian(5 * H, H, 1.0)
        assert utility_eval(u, 6 * H) == pytest.approx(math.exp(-1.0), rel=1e-12)
        assert utility_eval(u, 4 * H) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_decay_at_detection_and_cutoff(self):
        # s*exp(-lambda*dt) falls below 1e-3 past ln(1000)/lambda = 34.5388 h
        u = UtilityFunction.exp_decay(0.0, 0.2 / H, 1.0)
        assert utility_eval(u, 0.0) == 1.0
        cutoff_h = math.log(1000.0) / 0.2
        assert cutoff_h == pytest.approx(34.5387763949, abs=1e-9)
        assert utility_eval(u, (cutoff_h + 0.1) * H) == 0.0
        assert utility_eval(u, (cutoff_h - 0.1) * H) > 1e-3

    def test_decay_zero_before_detection(self):
        u = UtilityFunction.exp_decay(1000.0, 0.2 / H, 0.8)
        assert utility_eval(u, 999.0) == 0.0

    def test_floor_truncates_to_exact_zero(self):
        u = UtilityFunction.gaussian(0.0, H, 1.0)
        t_far = H * math.sqrt(math.log(1.0 / 1e-3)) + 200.0
        assert utility_eval(u, t_far) == 0.0

    @given(st.floats(-1e5, 1e5))
    def test_value_bounded_by_priority(self, t):
        u = UtilityFunction.gaussian(1000.0, 2000.0, 0.7)
        v = utility_eval(u, t)
        assert 0.0 <= v <= 0.7
        if t != 1000.0:
            assert v < 0.7

    def test_support_widths(self):
        # half-width sigma*sqrt(ln(s/floor))
        u = UtilityFunction.gaussian(0.0, H, 1.0)
        lo, hi = u.support()
        assert hi == pytest.approx(H * 2.6282608849, abs=1e-6)
        assert lo == -hi
        d = UtilityFunction.exp_decay(0.0, 0.2 / H, 1.0)
        dlo, dhi = d.support()
        assert dlo == 0.0
        assert dhi == pytest.approx(34.5387763949 * H, abs=1e-3)
        assert UtilityFunction.gaussian(0.0, H, 0.0005).support() is None


class TestUtilityGrad:
    def test_gaussian_stationary_at_peak(self):
        u = UtilityFunction.gaussian(5 * H, H, 1.0)
        assert utility_grad(u, 5 * H) == 0.0

    def test_decay_slope_at_detection(self):
        # d/dt s*exp(-lambda (t-t0)) at t0 is -lambda*s = -0.3 per hour
        u = UtilityFunction.exp_decay(0.0, 0.3 / H, 1.0)
        assert utility_grad(u, 0.0) == pytest.approx(-0.3 / H, rel=1e-12)

    def test_grad_ignores_floor(self):
        u = UtilityFunction.gaussian(0.0, H, 1.0)
        t_far = H * 3.0  # value floored to 0 out here
        assert utility_eval(u, t_far) == 0.0
        assert utility_grad(u, t_far) != 0.0

    def _fd(self, u, t):
        h = 1e-4 * max(1.0, abs(t))
        return (u.raw_value(t + h) - u.raw_value(t - h)) / (2.0 * h)

    def test_gaussian_matches_finite_differences(self):
        rng = SplitMix64(101)
        for _ in range(1000):
            sigma = rng.uniform(1800.0, 7200.0)
            t_peak = rng.uniform(-2.0 * sigma, 2.0 * sigma)
            u = UtilityFunction.gaussian(t_peak, sigma, rng.uniform(0.2, 1.0))
            t = t_peak + rng.uniform(-2.3, 2.3) * sigma
            a = utility_grad(u, t)
            f = self._fd(u, t)
            assert abs(a - f) <= 1e-6 * max(abs(a), abs(f), 1e-12)

    def test_decay_matches_finite_differences(self):
        rng = SplitMix64(202)
        for _ in range(1000):
            lam = rng.uniform(0.1, 1.0) / H
            t0 = rng.uniform(0.0, 7200.0)
            u = UtilityFunction.exp_decay(t0, lam, rng.uniform(0.2, 1.0))
            span = math.log(u.base_priority / u.floor) / lam
            t = t0 + rng.uniform(5.0, max(6.0, 0.95 * span))
            a = utility_grad(u, t)
            f = self._fd(u, t)
            assert abs(a - f) <= 1e-6 * max(abs(a), abs(f), 1e-12)


class TestProject:
    W = WindowSet((TimeInterval(0.0, 2.0, "A"), TimeInterval(8.0, 10.0, "B")))

    def test_interior_point_unchanged(self):
        t, sat = project(self.W, 1.5)
        assert (t, sat) == (1.5, "A")

    def test_equidistant_tie_goes_to_earlier_interval(self):
        t, sat = project(self.W, 5.0)
        assert (t, sat) == (2.0, "A")

    def test_clamps_to_boundary(self):
        w = WindowSet((TimeInterval(0.0, 2.0, "A"),))
        assert project(w, -3.0) == (0.0, "A")

    def test_empty_raises(self):
        with pytest.raises(ValueError, match="no feasible window"):
            project(WindowSet(), 1.0)

    @given(st.floats(-50.0, 50.0))
    def test_idempotent(self, t):
        t1, _ = project(self.W, t)
        t2, _ = project(self.W, t1)
        assert t2 == t1

    @given(st.floats(-5.0, 5.0), st.floats(-5.0, 5.0))
    def test_nonexpansive_within_one_interval(self, t1, t2):
        p1, s1 = project(self.W, t1)
        p2, s2 = project(self.W, t2)
        if s1 == s2:
            assert abs(p1 - p2) <= abs(t1 - t2) + 1e-12


spans = st.lists(
    st.tuples(st.floats(0.0, 100.0), st.floats(0.1, 30.0)), min_size=1, max_size=6)


def _ws(items, sat="S"):
    return WindowSet.from_intervals(
        [TimeInterval(s, s + d, sat) for s, d in items])


class TestOverlap:
    def test_simple_overlap(self):
        a = _ws([(0.0, 10.0)])
        b = _ws([(5.0, 10.0)])
        assert interval_overlap_length(a, b) == 5.0

    def test_disjoint_is_zero(self):
        assert interval_overlap_length(_ws([(0.0, 2.0)]), _ws([(10.0, 2.0)])) == 0.0

    def test_identical_is_total_length(self):
        a = _ws([(0.0, 3.0), (10.0, 4.0)])
        assert interval_overlap_length(a, a) == a.total_length() == 7.0

    def test_tags_ignored(self):
        a = _ws([(0.0, 10.0)], sat="S1")
        b = _ws([(0.0, 10.0)], sat="S2")
        assert interval_overlap_length(a, b) == 10.0

    @settings(max_examples=200)
    @given(spans, spans)
    def test_symmetric_and_bounded(self, xs, ys):
        a, b = _ws(xs), _ws(ys)
        ov = interval_overlap_length(a, b)
        assert ov == pytest.approx(interval_overlap_length(b, a), abs=1e-9)
        assert ov <= min(a.total_length(), b.total_length()) + 1e-9


class TestWindowSet:
    def test_rejects_same_satellite_overlap(self):
        with pytest.raises(ValueError, match="overlapping"):
            WindowSet((TimeInterval(0.0, 5.0, "A"), TimeInterval(4.0, 8.0, "A")))

    def test_allows_cross_satellite_overlap(self):
        w = WindowSet((TimeInterval(0.0, 5.0, "A"), TimeInterval(4.0, 8.0, "B")))
        assert w.total_length() == 8.0

    def test_from_intervals_merges_touching(self):
        w = WindowSet.from_intervals(
            [TimeInterval(4.0, 8.0, "A"), TimeInterval(0.0, 4.0, "A")])
        assert len(w.intervals) == 1
        assert (w.intervals[0].start, w.intervals[0].end) == (0.0, 8.0)

    def test_degenerate_interval_allowed(self):
        w = WindowSet((TimeInterval(3.0, 3.0, "A"),))
        assert w.containing_interval(3.0) is not None


class TestTypeInvariants:
    def test_tip_score_range(self):
        region = ((0.0, 0.0), (0.0, 1.0), (1.0, 0.5))
        with pytest.raises(ValueError):
            Tip(region, 0.0, 1.5)

    def test_tip_rejects_collinear(self):
        with pytest.raises(ValueError, match="collinear"):
            Tip(((0.0, 0.0), (0.0, 1.0), (0.0, 2.0)), 0.0, 0.5)

    def test_constraints_ranges(self):
        with pytest.raises(ValueError):
            FeasibilityConstraints(max_off_nadir=91.0)
        with pytest.raises(ValueError):
            FeasibilityConstraints(max_gsd=0.0)

    def test_trajectory_times_strictly_increase(self):
        with pytest.raises(ValueError, match="strictly increase"):
            Footprint.trajectory([(0.0, 40.0, -73.0), (0.0, 40.1, -73.0)], 200.0)

    def test_static_polygon_must_be_simple(self):
        bowtie = [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]
        with pytest.raises(ValueError, match="self-intersects"):
            Footprint.static_polygon(bowtie)

    def test_trajectory_holds_last_waypoint(self):
        fp = Footprint.trajectory([(0.0, 40.0, -73.0), (10.0, 41.0, -72.0)], 200.0)
        assert fp.center(25.0) == (41.0, -72.0)
        assert fp.center(-5.0) == (40.0, -73.0)
        assert fp.center(5.0) == (40.5, -72.5)
