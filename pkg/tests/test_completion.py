import math

import numpy as np
import pytest

import gcimpulse as gc
from gcimpulse import scenarios as sc


class TestBridge:
    def test_zero_length_bridge(self):
        b = gc.whitney_bridge((1.0, 0.0), (1.0, 0.0), gc.UNIT_DISC)
        assert b.variation == 0.0
        assert b.at(0.5) == (1.0, 0.0)

    def test_diagonal_bridge(self):
        b = gc.whitney_bridge((1.0, 0.0), (0.0, 1.0), gc.UNIT_DISC)
        assert b.variation == pytest.approx(math.sqrt(2.0))
        assert b.at(0.0) == (1.0, 0.0) and b.at(1.0) == (0.0, 1.0)

    def test_diameter_bridge(self):
        b = gc.whitney_bridge((1.0, 0.0), (-1.0, 0.0), gc.UNIT_DISC)
        assert b.variation == pytest.approx(gc.UNIT_DISC.diameter)

    def test_endpoint_outside_set(self):
        with pytest.raises(gc.DomainError):
            gc.whitney_bridge((1.5, 0.0), (0.0, 0.0), gc.UNIT_DISC)


class TestCompleteSegment:
    def test_affine_control_without_excursion(self):
        u = gc.piecewise_affine([0.0, 1.0], [(0.0, 0.0), (0.6, 0.0)], gc.UNIT_DISC)
        seg = gc.complete_segment(u, (0.0, 1.0), (0.6, 0.0), ds=1e-2)
        assert seg.s_visit == pytest.approx(1.6, abs=1e-12)
        assert seg.s_end == seg.s_visit
        assert seg.lower_bound == pytest.approx(seg.s_visit, abs=1e-12)

    def test_constant_control(self):
        u = gc.constant_path((0.2, 0.2), 1.0, gc.UNIT_DISC)
        seg = gc.complete_segment(u, (0.0, 1.0), (0.2, 0.2), ds=1e-2)
        assert seg.s_visit == pytest.approx(1.0, abs=1e-12)
        assert seg.s_end == pytest.approx(1.0, abs=1e-12)

    def test_one_jump_bounds(self):
        u = gc.piecewise_affine(
            [0.0, 0.5, 1.0],
            [(0.5, 0.0), (0.5, 0.0), (-0.5, 0.0)],
            gc.UNIT_DISC,
            right_values=[None, (-0.5, 0.0), None],
        )
        seg = gc.complete_segment(u, (0.0, 1.0), u.value(1.0), ds=1e-2)
        # duration 1, variation 1 (the jump), no terminal gap
        assert seg.lower_bound == pytest.approx(2.0, abs=1e-12)
        assert seg.lower_bound - 1e-9 <= seg.s_visit <= seg.s_end <= seg.upper_bound() + 1e-9
        assert seg.upper_bound() == pytest.approx(3.0, abs=1e-12)

    def test_graph_coverage(self):
        u = gc.piecewise_affine(
            [0.0, 0.4, 1.0],
            [(0.3, 0.1), (-0.2, 0.4), (0.1, -0.5)],
            gc.UNIT_DISC,
            right_values=[None, (0.5, 0.2), None],
        )
        seg = gc.complete_segment(u, (0.0, 1.0), (0.0, 0.0), ds=1e-3)
        ts = np.linspace(0.0, 1.0, 997)
        pts = np.array([(t, *u.value(float(t))) for t in ts])
        curve = np.column_stack((seg.phi0, seg.phi))
        d2 = ((pts[:, None, :] - curve[None, :, :]) ** 2).sum(axis=2)
        assert math.sqrt(float(d2.min(axis=1).max())) <= 2e-3

    def test_unit_speed_and_identity(self):
        u = gc.piecewise_affine(
            [0.0, 0.5, 1.0],
            [(0.0, 0.0), (0.7, 0.0), (0.0, 0.7)],
            gc.UNIT_DISC,
            right_values=[None, (0.0, -0.5), None],
        )
        seg = gc.complete_segment(u, (0.0, 1.0), (0.3, 0.3), ds=1e-2)
        stc = gc.arc_length_reparam(seg.s, seg.phi0, seg.phi, horizon=1.0)
        report = gc.verify_feasibility(stc, tol=1e-9)
        assert report.passed

    def test_divergent_slice_rejected(self):
        u = sc.spiral_control(1.0)
        with pytest.raises(gc.PreconditionError):
            gc.complete_segment(u, (0.0, 1.0), (1.0, 0.0))

    def test_randomized_interval_bounds(self):
        from gcimpulse.checks import check_segment_bounds

        result = check_segment_bounds(count=10, seed=123)
        assert result.passed, result.values


class TestExtendPeriodic:
    def test_periodic_visits(self):
        u = gc.piecewise_affine([0.0, 1.0], [(0.0, 0.0), (0.5, 0.0)], gc.UNIT_DISC)
        seg = gc.complete_segment(u, (0.0, 1.0), (-0.5, 0.0), ds=1e-2)
        period = seg.s_end - seg.s_graph_end
        assert period == pytest.approx(2.0, abs=1e-12)
        ext = gc.extend_periodic(seg, seg.s_end + 3.5 * period)
        # the visit points recur with the period and the curve keeps unit speed
        for j in range(3):
            s_j = seg.s_visit + j * period
            idx = int(np.argmin(np.abs(ext.s - s_j)))
            assert np.allclose(ext.phi[idx], (-0.5, 0.0), atol=1e-9)
        ds = np.diff(ext.s)
        dphi = np.linalg.norm(np.diff(ext.phi, axis=0), axis=1)
        dphi0 = np.diff(ext.phi0)
        assert np.max(np.abs(dphi0 + dphi - ds)) <= 1e-12

    def test_degenerate_excursion_rejected(self):
        u = gc.constant_path((0.0, 0.0), 1.0, gc.UNIT_DISC)
        seg = gc.complete_segment(u, (0.0, 1.0), (0.0, 0.0), ds=1e-2)
        with pytest.raises(gc.ConfigError):
            gc.extend_periodic(seg, 10.0)


class TestBuildCompletion:
    def test_ac_control_trivial_partition_is_arc_length(self):
        u = gc.piecewise_affine([0.0, 1.0], [(1.0, 0.0), (0.0, 0.5)], gc.UNIT_DISC)
        comp = gc.build_completion(u, partition=[0.0, 1.0])
        assert comp.stc.descriptor == "finite"
        assert not np.any(comp.stc.plateau_flags)
        assert comp.stc.s_final == pytest.approx(1.0 + gc.total_variation(u), abs=1e-9)
        assert comp.clock.finite_limit == pytest.approx(comp.stc.s_final)

    def test_spiral_geometric_partition_ledger_bounds(self):
        u = sc.spiral_control(1.0)
        comp = gc.build_completion(u, s_max=51.0)
        assert comp.stc.descriptor == "truncated"
        for entry in comp.ledger:
            assert entry.lower_bound - 1e-9 <= entry.s_visit <= entry.s_end
            assert entry.s_end <= entry.upper_bound + 1e-9

    def test_bv_jump_variation_dominated_by_lift(self):
        u = gc.piecewise_affine(
            [0.0, 0.5, 1.0],
            [(1.0, 0.0), (0.6, 0.0), (0.0, 0.6)],
            gc.UNIT_DISC,
            right_values=[None, (-0.2, 0.4), None],
        )
        comp = gc.build_completion(u, partition=[0.0, 1.0])
        lift_var = float(comp.stc.chord_variation()[-1])
        assert gc.total_variation(u) <= lift_var + 1e-9

    def test_identity_on_grid(self):
        u = sc.spiral_control(1.0)
        comp = gc.build_completion(u, s_max=51.0)
        rep = gc.verify_feasibility(comp.stc, tol=1e-6)
        assert rep.passed
        assert rep.max_ids_residual <= 1e-6

    def test_divergent_horizons_grow(self):
        u = sc.spiral_control(1.0)
        comp = gc.build_completion(u, s_max=51.0)
        ends = np.cumsum([e.s_end for e in comp.ledger])
        assert np.all(np.diff(ends) > 0)
        assert ends[-1] >= 51.0 - comp.ledger[-1].s_end

    def test_clock_matches_segment_boundaries(self):
        u = sc.spiral_control(1.0)
        part = [0.0] + [sc.spiral_clip_time(1.0, j) for j in range(1, 5)]
        comp = gc.build_completion(u, partition=part, s_max=40.0)
        for j, t in enumerate(part[1:], start=1):
            expected = t + gc.total_variation(u, (0.0, t))
            assert float(comp.clock.at(t)) == pytest.approx(expected, abs=1e-6)

    def test_partition_validation(self):
        u = gc.constant_path((0.0, 0.0), 1.0, gc.UNIT_DISC)
        with pytest.raises(gc.ConfigError):
            gc.build_completion(u, partition=[0.1, 0.5])
        with pytest.raises(gc.ConfigError):
            gc.build_completion(u, s_max=0.5)

    def test_s_max_smaller_than_first_interval(self):
        u = sc.spiral_control(1.0)
        with pytest.raises(gc.ConfigError):
            gc.build_completion(u, partition=[0.0, 0.99], s_max=1.01)

    def test_plateau_loop_diagnostic(self):
        u = sc.spiral_control(1.0)
        # geometric partition: every covered interval detours to the terminal
        # value, so loop variation keeps accumulating under truncation
        geo = gc.plateau_diagnostic(gc.build_completion(u, s_max=51.0).stc)
        assert geo.total > 1.0 and not geo.bounded
        # full-turn partition: the detours are degenerate, no loops at all
        part = [0.0] + [sc.spiral_clip_time(1.0, j) for j in range(1, 8)]
        turn = gc.plateau_diagnostic(gc.build_completion(u, partition=part, s_max=48.0).stc)
        assert turn.total == 0.0 and turn.bounded
        # finite-variation jump: one bridge, finite measure
        uj = gc.piecewise_affine(
            [0.0, 0.5, 1.0],
            [(1.0, 0.0), (0.6, 0.0), (0.0, 0.6)],
            gc.UNIT_DISC,
            right_values=[None, (-0.2, 0.4), None],
        )
        fin = gc.plateau_diagnostic(gc.build_completion(uj, partition=[0.0, 1.0]).stc)
        assert fin.bounded
        assert fin.total == pytest.approx(0.8944271909999159, abs=1e-9)


class TestArcLengthReparam:
    def test_unit_speed_input_is_fixed_point(self):
        s = np.linspace(0.0, 2.0, 201)
        phi0 = np.minimum(s, 1.0)
        ang = np.maximum(s - 1.0, 0.0)
        phi = np.stack((np.cos(ang), np.sin(ang)), axis=1)
        out = gc.arc_length_reparam(s, phi0, phi, horizon=1.0, descriptor="truncated")
        # grid preserved up to the chord defect of the sampled circle
        assert np.max(np.abs(out.grid - s)) <= 1e-4
        assert gc.verify_feasibility(out, tol=1e-9).passed

    def test_double_speed_curve_halves_parameter(self):
        lam = np.linspace(0.0, 0.5, 101)
        phi0 = 2.0 * lam
        phi = np.zeros((101, 1))
        out = gc.arc_length_reparam(lam, phi0, phi, horizon=1.0)
        assert out.grid[-1] == pytest.approx(1.0)
        assert np.allclose(out.phi0, out.grid)

    def test_decreasing_phi0_rejected(self):
        lam = np.array([0.0, 0.5, 1.0])
        phi0 = np.array([0.0, 0.6, 0.4])
        with pytest.raises(gc.InvariantViolation):
            gc.arc_length_reparam(lam, phi0, np.zeros((3, 1)), horizon=1.0)

    def test_deadline_circle_is_unit_speed(self):
        stc = sc.deadline_circle(1.0, 21.0, ds=21.0 / 2**12)
        rep = gc.verify_feasibility(stc, tol=1e-5)
        assert rep.passed

    def test_hand_built_half_speed_fails(self):
        s = np.linspace(0.0, 1.0, 11)
        phi0 = 0.5 * s
        phi = np.zeros((11, 1))
        stc = gc.SpaceTimeControl(
            grid=s, phi0=phi0, phi=phi, psi=np.zeros((11, 0)), horizon=1.0, descriptor="finite"
        )
        rep = gc.verify_feasibility(stc)
        assert not rep.passed
        assert rep.max_speed_residual == pytest.approx(0.5, abs=1e-12)
