import math

import numpy as np
import pytest

import gcimpulse as gc
from gcimpulse import scenarios as sc

T = 1.0


class TestDynamics:
    def test_field_values_at_reference_point(self):
        dyn = sc.example_dynamics()
        x = (1.0, 0.0, 1.0)
        u = (1.0, 0.0)
        assert dyn.fields[0](x, u) == (1.0, 0.0, 0.0)
        assert dyn.fields[1](x, u) == (0.0, 1.0, -1.0)
        assert dyn.drift is None

    def test_cutoff_kills_fields_far_out(self):
        dyn = sc.example_dynamics()
        x = (4.0, 1.0, 1.0)
        assert dyn.fields[0](x, (1.0, 0.0)) == (0.0, 0.0, 0.0)
        assert dyn.fields[1](x, (1.0, 0.0)) == (0.0, 0.0, 0.0)

    def test_cutoff_profile(self):
        assert sc.cutoff((3.0, 0.0, 0.0)) == 1.0
        assert sc.cutoff((0.0, 4.0, 0.0)) == 0.0
        assert sc.cutoff((3.5, 0.0, 0.0)) == pytest.approx(0.5)

    def test_sublinearity_spot_check(self):
        dyn = sc.example_dynamics()
        assert dyn.sublinearity_check(gc.UNIT_DISC, samples=500, seed=1) <= 1.0


class TestSpiral:
    def test_initial_and_clip_values(self):
        u = sc.spiral_control(T)
        assert u.value(0.0) == (1.0, 0.0)
        for k in (1, 3, 7):
            tk = sc.spiral_clip_time(T, k)
            val = u.value(tk)
            assert math.dist(val, (1.0, 0.0)) <= 1e-7

    def test_variation_closed_form(self):
        u = sc.spiral_control(T)
        for t in (0.2, 0.5, 0.8):
            assert gc.total_variation(u, (0.0, t)) == pytest.approx(t / (T * (T - t)))

    def test_speed_matches_derivative_norm(self):
        u = sc.spiral_control(T)
        for t in (0.1, 0.6, 0.85):
            d = u.derivative(t)
            assert math.hypot(*d) == pytest.approx(u.speed(t), rel=1e-12)


class TestClosedFormOracle:
    def test_starts_at_one(self):
        x3 = sc.closed_form_x3(sc.clipped_spiral(T, 2))
        assert x3(0.0) == 1.0

    def test_spiral_midpoint(self):
        x3 = sc.closed_form_x3(sc.clipped_spiral(T, 5))
        assert x3(0.5) == pytest.approx(math.exp(-1.0 / T))

    def test_constant_control_gives_one(self):
        u = gc.constant_path((1.0, 0.0), T, gc.UNIT_DISC)
        x3 = sc.closed_form_x3(u)
        assert x3(0.7) == 1.0

    def test_off_circle_control_rejected(self):
        u = gc.piecewise_affine([0.0, 1.0], [(1.0, 0.0), (0.0, 1.0)], gc.UNIT_DISC)
        with pytest.raises((gc.DomainError, gc.PreconditionError)):
            sc.closed_form_x3(u)

    def test_jumpy_control_rejected(self):
        u = gc.piecewise_affine(
            [0.0, 0.5, 1.0],
            [(1.0, 0.0), (1.0, 0.0), (1.0, 0.0)],
            gc.UNIT_DISC,
            right_values=[None, (-1.0, 0.0), None],
        )
        with pytest.raises(gc.PreconditionError):
            sc.closed_form_x3(u)


class TestPayoff:
    def test_idle_control_costs_nothing(self):
        u = gc.constant_path((1.0, 0.0), T, gc.UNIT_DISC)
        assert sc.payoff(lambda t: 1.0, u) == 0.0

    def test_circle_arc_payoff_matches_quadrature(self):
        u = sc.circle_path([0.0, 1.0], [0.0, 1.0])
        x3 = sc.closed_form_x3(u)
        J = sc.payoff(x3, u)
        # drift part + integral of exp(-t) dt
        ts = np.linspace(0.0, 1.0, 20001)
        drift = np.trapezoid(np.abs(1.0 - np.cos(ts)) + np.abs(np.sin(ts)), ts)
        assert J == pytest.approx(drift + (1.0 - math.exp(-1.0)), abs=1e-6)

    def test_late_spiral_bracket(self):
        for k in (5, 10):
            J, x4 = sc.late_spiral_cost_pair(T, k)
            assert 1.0 - 1e-4 <= J <= 1.0 + 3.0 / k + 1e-4
            assert abs(J - x4) <= 1e-6

    def test_lower_bound_from_variation(self):
        # any circle run from (1, 0): J >= 1 - exp(-variation)
        rng = np.random.default_rng(3)
        for _ in range(5):
            angles = np.concatenate(([0.0], rng.uniform(-4.0, 4.0, 2)))
            u = sc.circle_path([0.0, 0.6, 1.0], angles)
            x3 = sc.closed_form_x3(u)
            J = sc.payoff(x3, u)
            assert J >= 1.0 - math.exp(-gc.total_variation(u)) - 1e-8

    def test_divergent_path_needs_explicit_end(self):
        u = sc.late_spiral(T, 5)
        with pytest.raises(gc.PreconditionError):
            sc.payoff(lambda t: 1.0, u)


class TestExtendedPayoff:
    def test_drift_only_control_costs_nothing(self):
        s = np.linspace(0.0, 1.0, 101)
        stc = gc.SpaceTimeControl(
            grid=s, phi0=s.copy(), phi=np.tile([1.0, 0.0], (101, 1)),
            psi=np.zeros((101, 0)), horizon=1.0, descriptor="finite", feasible=True,
        )
        xi = gc.integrate_spacetime(sc.example_dynamics(), sc.X0, stc)
        assert sc.extended_payoff(stc, xi, 1.0) == 0.0

    def test_deadline_circle_truncations(self):
        stc = sc.deadline_circle(T, T + 8.0, ds=9.0 / 2**13)
        xi = gc.integrate_spacetime(sc.example_dynamics(), sc.X0, stc)
        for lam in (2.0, 5.0, 8.0):
            val = sc.extended_payoff(stc, xi, T + lam)
            assert val == pytest.approx(1.0 - math.exp(-lam), abs=1e-5)

    def test_circular_plateau_contribution(self):
        # unit-speed circle of length 2 pi at frozen time contributes 1 - exp(-2 pi)
        stc = sc.deadline_circle(T, T + 2.0 * math.pi, ds=(T + 2 * math.pi) / 2**13)
        xi = gc.integrate_spacetime(sc.example_dynamics(), sc.X0, stc)
        val = sc.extended_payoff(stc, xi, T + 2.0 * math.pi)
        assert val == pytest.approx(1.0 - math.exp(-2.0 * math.pi), abs=1e-6)


class TestAugmentedCost:
    def test_idle_control_keeps_cost_zero(self):
        dyn4 = sc.augment_cost(sc.example_dynamics(), sc.example_payoff_spec(T))
        u = gc.constant_path((1.0, 0.0), T, gc.UNIT_DISC)
        traj = gc.caratheodory(dyn4, sc.X0 + (0.0,), u, cells=64)
        assert np.all(traj.states[:, 3] == 0.0)

    def test_deadline_circle_cost_state_matches_payoff(self):
        dyn4 = sc.augment_cost(sc.example_dynamics(), sc.example_payoff_spec(T))
        lam = 5.0
        stc = sc.deadline_circle(T, T + lam, ds=(T + lam) / 2**17)
        xi4 = gc.integrate_spacetime(dyn4, sc.X0 + (0.0,), stc)
        xi = gc.Trajectory(grid=xi4.grid, states=xi4.states[:, :3], domain="s")
        two_routes = sc.extended_payoff(stc, xi, T + lam)
        assert abs(float(xi4.states[-1, 3]) - two_routes) <= 1e-8

    def test_late_spiral_cost_state_in_bracket(self):
        k = 10
        _, x4 = sc.late_spiral_cost_pair(T, k)
        assert 1.0 - 1e-4 <= x4 <= 1.0 + 3.0 / k + 1e-4


class TestTargetResidual:
    def test_late_spiral_terminal_approaches_target(self):
        spec = sc.example_payoff_spec(T)
        dists = []
        for k in (5, 10, 20):
            xT = sc.late_spiral_terminal(T, k)
            dists.append(spec.target_distance(xT, (1.0, 0.0)))
        assert all(d <= 1e-6 for d in dists)
        assert all(b <= a + 1e-9 for a, b in zip(dists, dists[1:]))


class TestRegistry:
    def test_fixture_names(self):
        reg = sc.fixture_registry()
        assert {"winding3d", "spiral", "late-spiral", "deadline-circle"} <= set(reg)
        assert reg["spiral"](T).divergent
