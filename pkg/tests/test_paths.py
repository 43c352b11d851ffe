import math

import numpy as np
import pytest

import gcimpulse as gc
from gcimpulse import scenarios as sc


def make_staircase():
    return gc.piecewise_affine(
        [0.0, 0.5, 1.0],
        [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)],
        gc.ControlSet.box((-2.0, -2.0), (2.0, 2.0)),
    )


class TestTotalVariation:
    def test_constant_path_has_zero_variation(self):
        u = gc.constant_path((0.3, -0.1), 1.0, gc.UNIT_DISC)
        assert gc.total_variation(u) == 0.0

    def test_spiral_partial_variation_closed_form(self):
        T = 1.0
        u = sc.spiral_control(T)
        for t in (0.1, 0.25, 0.5, 0.9):
            assert gc.total_variation(u, (0.0, t)) == pytest.approx(t / (T * (T - t)), abs=1e-12)

    def test_spiral_full_horizon_is_tagged_infinite(self):
        u = sc.spiral_control(1.0)
        assert math.isinf(gc.total_variation(u))

    def test_staircase_matches_partition_supremum(self):
        u = make_staircase()
        assert gc.total_variation(u) == pytest.approx(2.0, abs=1e-12)
        # supremum over partitions from below: chords on a fine grid
        ts = np.linspace(0.0, 1.0, 2001)
        vals = np.array([u.value(float(t)) for t in ts])
        chord = float(np.sum(np.linalg.norm(np.diff(vals, axis=0), axis=1)))
        assert abs(chord - 2.0) <= 1e-6

    def test_additivity_over_adjacent_intervals(self):
        u = make_staircase()
        rng = np.random.default_rng(0)
        for _ in range(50):
            a, b, c = np.sort(rng.uniform(0.0, 1.0, 3))
            lhs = gc.total_variation(u, (a, c))
            rhs = gc.total_variation(u, (a, b)) + gc.total_variation(u, (b, c))
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_analytic_additivity(self):
        u = sc.spiral_control(1.0)
        rng = np.random.default_rng(1)
        for _ in range(25):
            a, b, c = np.sort(rng.uniform(0.0, 0.95, 3))
            lhs = gc.total_variation(u, (a, c))
            rhs = gc.total_variation(u, (a, b)) + gc.total_variation(u, (b, c))
            assert lhs == pytest.approx(rhs, abs=1e-12 * max(1.0, lhs))

    def test_sampling_consistency_for_analytic_speed(self):
        # declared variation against the partition supremum at mesh 1/N
        u = sc.spiral_control(1.0)
        t_hi = 0.5
        n = 10**4
        ts = np.linspace(0.0, t_hi, n + 1)
        vals = np.array([u.value(float(t)) for t in ts])
        chord = float(np.sum(np.linalg.norm(np.diff(vals, axis=0), axis=1)))
        declared = gc.total_variation(u, (0.0, t_hi))
        assert chord <= declared
        assert (declared - chord) / declared <= 1e-4

    def test_interval_outside_horizon_raises(self):
        u = make_staircase()
        with pytest.raises(gc.DomainError):
            gc.total_variation(u, (0.0, 1.5))
        with pytest.raises(gc.DomainError):
            gc.total_variation(u, (-0.1, 0.5))


class TestJumps:
    def test_continuous_path_has_empty_discontinuity_set(self):
        assert gc.discontinuity_set(make_staircase()) == []

    def test_single_declared_jump(self):
        u = gc.piecewise_affine(
            [0.0, 0.5, 1.0],
            [(1.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
            gc.UNIT_DISC,
            right_values=[None, (0.0, 1.0), None],
        )
        records = gc.discontinuity_set(u)
        assert len(records) == 1
        tau, left, at, right = records[0]
        assert tau == 0.5
        assert left == (1.0, 0.0)
        assert at == right == (0.0, 1.0)
        # right-continuity at the jump
        assert u.value(0.5) == (0.0, 1.0)
        assert u.left_value(0.5) == (1.0, 0.0)

    def test_two_jumps_ordered(self):
        u = gc.piecewise_affine(
            [0.0, 0.3, 0.7, 1.0],
            [(0.0, 0.0), (0.2, 0.0), (0.5, 0.0), (0.5, 0.0)],
            gc.UNIT_DISC,
            right_values=[None, (0.2, 0.3), (0.1, 0.1), None],
        )
        records = gc.discontinuity_set(u)
        assert [r[0] for r in records] == [0.3, 0.7]

    def test_jump_variation_counts_magnitude(self):
        u = gc.piecewise_affine(
            [0.0, 0.5, 1.0],
            [(0.5, 0.0), (0.5, 0.0), (0.5, 0.0)],
            gc.UNIT_DISC,
            right_values=[None, (-0.5, 0.0), None],
        )
        assert gc.total_variation(u) == pytest.approx(2.0, abs=1e-15)
        # jump at the left endpoint of the interval is not counted
        assert gc.total_variation(u, (0.5, 1.0)) == pytest.approx(1.0, abs=1e-15)
        # constant before the jump, so [0.4, 0.5] carries the jump only
        assert gc.total_variation(u, (0.4, 0.5)) == pytest.approx(1.0, abs=1e-12)


class TestControlPathInvariants:
    def test_values_must_stay_in_control_set(self):
        with pytest.raises(gc.DomainError):
            gc.piecewise_affine([0.0, 1.0], [(0.0, 0.0), (2.0, 0.0)], gc.UNIT_DISC)

    def test_breakpoints_strictly_increasing(self):
        with pytest.raises(gc.InvariantViolation):
            gc.ControlPath(
                horizon=1.0,
                breakpoints=(0.0, 0.5, 0.5, 1.0),
                segments=(
                    gc.AffineSegment((0.0, 0.0), (0.0, 0.0)),
                    gc.AffineSegment((0.0, 0.0), (0.0, 0.0)),
                    gc.AffineSegment((0.0, 0.0), (0.0, 0.0)),
                ),
                control_set=gc.UNIT_DISC,
            )

    def test_jump_must_match_segment_limits(self):
        with pytest.raises(gc.InvariantViolation):
            gc.ControlPath(
                horizon=1.0,
                breakpoints=(0.0, 0.5, 1.0),
                segments=(
                    gc.AffineSegment((0.0, 0.0), (0.5, 0.0)),
                    gc.AffineSegment((0.1, 0.1), (0.0, 0.0)),
                ),
                control_set=gc.UNIT_DISC,
                jumps=(gc.Jump(0.5, (0.5, 0.0), (0.9, 0.9)),),
            )

    def test_control_sets(self):
        ball = gc.ControlSet.ball((0.0, 0.0), 2.0)
        assert ball.contains((1.9, 0.0)) and not ball.contains((2.1, 0.0))
        assert ball.diameter == 4.0
        box = gc.ControlSet.box((0.0,), (3.0,))
        assert box.contains((2.0,)) and not box.contains((-0.5,))
        poly = gc.ControlSet.polytope(
            halfspaces=[(1.0, 0.0, 1.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 1.0), (0.0, -1.0, 0.0)],
            vertices=[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
        )
        assert poly.contains((0.5, 0.5)) and not poly.contains((1.5, 0.5))
        assert poly.diameter == pytest.approx(math.sqrt(2.0))


class TestClock:
    def jump_clock(self):
        ts = np.linspace(0.0, 1.0, 101)
        vs = np.where(ts < 0.5, 2.0 * ts, 2.0 * ts + 1.0)
        return gc.Clock(
            horizon=1.0,
            times=ts,
            values=vs,
            jumps=(gc.ClockJump(0.5, 1.0, 2.0, 2.0),),
            finite_limit=3.0,
        )

    def test_identity_clock_inverse(self):
        clock = gc.clock_from_function(lambda t: t, np.linspace(0, 1, 11), 1.0, finite_limit=1.0)
        tc = gc.clock_pseudo_inverse(clock)
        ss = np.linspace(0, 1, 101)
        assert np.allclose(tc(ss), ss)

    def test_linear_clock_inverse(self):
        clock = gc.clock_from_function(lambda t: 2.0 * t, np.linspace(0, 1, 11), 1.0, finite_limit=2.0)
        tc = gc.clock_pseudo_inverse(clock)
        ss = np.linspace(0, 2, 101)
        assert np.allclose(tc(ss), ss / 2.0)

    def test_jump_clock_plateau_and_composition(self):
        clock = self.jump_clock()
        tc = gc.clock_pseudo_inverse(clock)
        # flat exactly on the jump interval
        assert np.allclose(tc(np.linspace(1.0, 2.0, 11)), 0.5)
        # right-inverse on a 10^3 grid
        ts = np.linspace(0.0, 1.0, 1001)
        comp = tc(np.asarray(clock.at(ts)))
        assert np.max(np.abs(comp - ts)) <= 1e-12
        # horizon value past the finite limit
        assert tc(3.0) == 1.0
        assert tc(5.0) == 1.0

    def test_inverse_is_one_lipschitz(self):
        clock = self.jump_clock()
        tc = gc.clock_pseudo_inverse(clock)
        rng = np.random.default_rng(2)
        s = np.sort(rng.uniform(0.0, 3.0, (500, 2)), axis=1)
        gaps = np.asarray(tc(s[:, 1])) - np.asarray(tc(s[:, 0]))
        assert np.all(gaps <= s[:, 1] - s[:, 0] + 1e-12)
        assert np.all(gaps >= -1e-15)

    def test_slope_invariant_enforced(self):
        with pytest.raises(gc.InvariantViolation):
            gc.Clock(horizon=1.0, times=np.array([0.0, 1.0]), values=np.array([0.0, 0.5]))

    def test_non_monotone_samples_rejected(self):
        with pytest.raises(gc.InvariantViolation):
            gc.Clock(horizon=1.0, times=np.array([0.0, 0.5, 0.4]), values=np.array([0.0, 1.0, 2.0]))


class TestOrdinaryControl:
    def test_piecewise_constant_lookup(self):
        v = gc.piecewise_constant_ordinary([0.0, 0.5], [(1.0,), (2.0,)], 1.0)
        assert v.value(0.25) == (1.0,)
        assert v.value(0.75) == (2.0,)
        with pytest.raises(gc.DomainError):
            v.value(1.5)
