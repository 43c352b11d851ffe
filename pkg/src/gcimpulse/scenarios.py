"""Executable fixtures: the 3-d winding system, reference controls with
closed-form solutions, payoff functionals, and the cost-augmented system.

The core system lives in R^3: two planar control components steer (x1, x2)
directly while x3 is damped at the signed angular rate swept by the
control, so x3 along an absolutely continuous run from the unit circle is
the exponential of minus the swept angle. A Lipschitz cutoff keeps the
fields sublinear far from the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .completion import SpaceTimeControl
from .errors import DomainError, PreconditionError
from .ode import Dynamics, Trajectory, Vec, caratheodory
from .paths import (
    UNIT_DISC,
    AffineSegment,
    AnalyticSegment,
    ControlPath,
    total_variation,
)

X0 = (1.0, 0.0, 1.0)
U0 = (1.0, 0.0)


def cutoff(x: Sequence[float]) -> float:
    """1 inside |x| <= 3, 0 outside |x| >= 4, linear in |x| in between."""
    r = math.sqrt(sum(c * c for c in x))
    if r <= 3.0:
        return 1.0
    if r >= 4.0:
        return 0.0
    return 4.0 - r


def _g1(x: Vec, u: Vec) -> Vec:
    e = cutoff(x)
    return (e, 0.0, e * x[2] * x[1])


def _g2(x: Vec, u: Vec) -> Vec:
    e = cutoff(x)
    return (0.0, e, -e * x[2] * x[0])


def example_dynamics() -> Dynamics:
    # |(g1, g2)| <= sqrt(2 + 2*(x3*|x12|)^2) <= sqrt(2)*sqrt(1+16^2) on the
    # cutoff support, so M = 23 dominates the linear-growth bound there.
    return Dynamics(
        n=3,
        m=2,
        fields=(_g1, _g2),
        drift=None,
        sublinear_const=23.0,
        lipschitz_const=40.0,
        box_radius=6.0,
    )


# ---------------------------------------------------------------------------
# reference controls
# ---------------------------------------------------------------------------


def spiral_control(T: float) -> ControlPath:
    """Unit-circle control winding faster and faster toward the horizon.

    The swept angle is 1/(T-t) - 1/T, so the speed is (T-t)^-2 and the
    variation on [0, t] is t/(T(T-t)), divergent at T. The declared value
    at T is (1, 0)."""

    def theta(t: float) -> float:
        return 1.0 / (T - t) - 1.0 / T

    def value(t: float) -> tuple[float, float]:
        a = theta(t)
        return (math.cos(a), math.sin(a))

    def speed(t):
        return (T - t) ** -2.0

    def derivative(t: float) -> tuple[float, float]:
        a = theta(t)
        r = (T - t) ** -2.0
        return (-math.sin(a) * r, math.cos(a) * r)

    def variation(a, b):
        return 1.0 / (T - b) - 1.0 / (T - a)

    seg = AnalyticSegment(
        value=value,
        speed=speed,
        derivative=derivative,
        variation=variation,
        winding_primitive=variation,
        divergent_end=True,
        family="spiral",
        params=(T,),
    )
    return ControlPath(
        horizon=T,
        breakpoints=(0.0, T),
        segments=(seg,),
        control_set=UNIT_DISC,
        terminal_value=(1.0, 0.0),
    )


def spiral_clip_time(T: float, k: int) -> float:
    """The k-th full-turn time 2 k pi T^2 / (1 + 2 k pi T), where the spiral
    is back at (1, 0)."""
    return 2.0 * k * math.pi * T * T / (1.0 + 2.0 * k * math.pi * T)


def clipped_spiral(T: float, k: int) -> ControlPath:
    """Spiral frozen at its k-th full turn; absolutely continuous on [0, T]."""
    tk = spiral_clip_time(T, k)
    spiral = spiral_control(T)
    seg = spiral.segments[0]
    assert isinstance(seg, AnalyticSegment)
    uk = seg.value(tk)
    head = AnalyticSegment(
        value=seg.value,
        speed=seg.speed,
        derivative=seg.derivative,
        variation=seg.variation,
        winding_primitive=seg.winding_primitive,
        family="spiral-head",
        params=(T, float(k)),
    )
    return ControlPath(
        horizon=T,
        breakpoints=(0.0, tk, T),
        segments=(head, AffineSegment(uk, uk)),
        control_set=UNIT_DISC,
    )


def late_spiral(T: float, k: int) -> ControlPath:
    """Constant at (1, 0) until T - 1/k, then an unclipped spiral burst.

    The swept angle on the burst is 1/(T-t) - k, so the third state is
    exp(k - 1/(T-t)) there; the variation is infinite yet the winding-
    weighted cost stays finite."""
    if k <= 1.0 / T:
        raise PreconditionError("need k > 1/T so the burst fits in the horizon")
    t_burst = T - 1.0 / k

    def value(t: float) -> tuple[float, float]:
        a = 1.0 / (T - t) - k
        return (math.cos(a), math.sin(a))

    def speed(t):
        return (T - t) ** -2.0

    def derivative(t: float) -> tuple[float, float]:
        a = 1.0 / (T - t) - k
        r = (T - t) ** -2.0
        return (-math.sin(a) * r, math.cos(a) * r)

    def variation(a, b):
        return 1.0 / (T - b) - 1.0 / (T - a)

    burst = AnalyticSegment(
        value=value,
        speed=speed,
        derivative=derivative,
        variation=variation,
        winding_primitive=variation,
        divergent_end=True,
        family="late-spiral",
        params=(T, float(k)),
    )
    return ControlPath(
        horizon=T,
        breakpoints=(0.0, t_burst, T),
        segments=(AffineSegment((1.0, 0.0), (1.0, 0.0)), burst),
        control_set=UNIT_DISC,
        terminal_value=(1.0, 0.0),
    )


def circle_path(times: Sequence[float], angles: Sequence[float]) -> ControlPath:
    """Unit-circle control with piecewise-affine swept angle.

    Exact variation per piece is |rate| times the duration, and the signed
    winding is the angle increment, so both are closed-form."""
    ts = [float(t) for t in times]
    an = [float(a) for a in angles]
    segs = []
    for i in range(len(ts) - 1):
        a0, a1 = an[i], an[i + 1]
        t0, t1 = ts[i], ts[i + 1]
        rate = (a1 - a0) / (t1 - t0)

        def value(t, a0=a0, t0=t0, rate=rate):
            a = a0 + rate * (t - t0)
            return (math.cos(a), math.sin(a))

        def derivative(t, a0=a0, t0=t0, rate=rate):
            a = a0 + rate * (t - t0)
            return (-math.sin(a) * rate, math.cos(a) * rate)

        segs.append(
            AnalyticSegment(
                value=value,
                speed=lambda t, rate=rate: abs(rate),
                derivative=derivative,
                variation=lambda a, b, rate=rate: abs(rate) * (b - a),
                winding_primitive=lambda a, b, rate=rate: rate * (b - a),
                family="circle-arc",
                params=(a0, rate, t0),
            )
        )
    return ControlPath(
        horizon=ts[-1], breakpoints=tuple(ts), segments=tuple(segs), control_set=UNIT_DISC
    )


def deadline_circle(T: float, s_max: float, ds: float | None = None) -> SpaceTimeControl:
    """Unit-speed space-time control: pure time flow at u = (1, 0) up to the
    deadline, then the unit circle traversed forever at frozen time T.

    Sampled with a grid node exactly at s = T; truncated at s_max."""
    if s_max <= T:
        raise DomainError("s_max must exceed the deadline")
    if ds is None:
        ds = 51.0 / 2**14
    n1 = max(2, math.ceil(T / ds))
    n2 = max(2, math.ceil((s_max - T) / ds))
    s1 = np.linspace(0.0, T, n1 + 1)
    s2 = np.linspace(T, s_max, n2 + 1)
    s = np.concatenate((s1, s2[1:]))
    phi0 = np.minimum(s, T)
    ang = np.maximum(s - T, 0.0)
    phi = np.stack((np.cos(ang), np.sin(ang)), axis=1)
    phi[s <= T, 0] = 1.0
    phi[s <= T, 1] = 0.0
    return SpaceTimeControl(
        grid=s,
        phi0=phi0,
        phi=phi,
        psi=np.zeros((s.size, 0)),
        horizon=T,
        descriptor="truncated",
        feasible=True,
    )


def deadline_circle_visits(T: float, s_max: float) -> np.ndarray:
    """Pseudo-times T + 2 pi j where the frozen-time circle is back at (1, 0)."""
    j = np.arange(1, int((s_max - T) / (2.0 * math.pi)) + 1)
    return T + 2.0 * math.pi * j


def deadline_circle_xi3(s: np.ndarray | float, T: float) -> np.ndarray | float:
    """Closed-form third state along the deadline-circle control."""
    return np.where(np.asarray(s) < T, 1.0, np.exp(-(np.asarray(s) - T)))


# ---------------------------------------------------------------------------
# closed-form oracles
# ---------------------------------------------------------------------------


def closed_form_x3(path: ControlPath) -> Callable[[float], float]:
    """Oracle for the third state along circle-valued absolutely continuous
    controls: exp of minus the swept signed angle up to t.

    Requires every piece to be either constant or analytic with a declared
    winding primitive, and values on the unit circle; otherwise the oracle
    is invalid."""
    if path.jumps:
        raise PreconditionError("oracle needs an absolutely continuous control")
    for i, seg in enumerate(path.segments):
        if isinstance(seg, AffineSegment):
            if seg.start != seg.end:
                raise PreconditionError("oracle invalid: non-constant straight piece leaves the circle")
            if abs(math.hypot(*seg.start) - 1.0) > 1e-9:
                raise DomainError("oracle invalid: control leaves the unit circle")
        else:
            if seg.winding_primitive is None:
                raise PreconditionError("analytic piece lacks a winding primitive")
            a, b = path.breakpoints[i], path.breakpoints[i + 1]
            for w in (0.0, 0.37, 0.81):
                tq = a + w * (b - a) * (0.999 if seg.divergent_end else 1.0)
                if abs(math.hypot(*seg.value(tq)) - 1.0) > 1e-9:
                    raise DomainError("oracle invalid: control leaves the unit circle")

    def x3(t: float) -> float:
        total = 0.0
        for i, seg in enumerate(path.segments):
            a, b = path.breakpoints[i], path.breakpoints[i + 1]
            if t <= a:
                break
            hi = min(t, b)
            if isinstance(seg, AnalyticSegment):
                total += seg.winding_primitive(a, hi)
        return math.exp(-total)

    return x3


# ---------------------------------------------------------------------------
# payoff functionals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PayoffSpec:
    """Running cost with a drift part and a control-speed-weighted part,
    plus the closed target set the terminal pair must approach."""

    horizon: float
    ell_drift: Callable[[Vec, Vec, Vec], float]
    ell_impulse: Callable[[Vec, Vec], float]
    target_distance: Callable[[Vec, Vec], float]


def _drift_cost(x: Vec, u: Vec, v: Vec) -> float:
    return abs(1.0 - u[0]) + abs(u[1])


def _impulse_cost(x: Vec, u: Vec) -> float:
    return abs(x[2])


def _target_distance(x: Vec, u: Vec) -> float:
    # target: (x1, x2) in the disc, x3 = 0, u in the disc
    dx = max(math.hypot(x[0], x[1]) - 1.0, 0.0)
    du = max(math.hypot(u[0], u[1]) - 1.0, 0.0)
    return math.sqrt(dx * dx + x[2] * x[2] + du * du)


def example_payoff_spec(T: float) -> PayoffSpec:
    return PayoffSpec(
        horizon=T,
        ell_drift=_drift_cost,
        ell_impulse=_impulse_cost,
        target_distance=_target_distance,
    )


def payoff_grid(path: ControlPath, t_end: float, arc_step: float = math.pi / 32, t_step: float = 1e-3) -> np.ndarray:
    """Quadrature grid resolving both time and control arc length."""
    nodes = [np.asarray([0.0])]
    for i, seg in enumerate(path.segments):
        a, b = path.breakpoints[i], path.breakpoints[i + 1]
        if t_end <= a:
            break
        hi = min(b, t_end)
        n_t = max(1, math.ceil((hi - a) / t_step))
        base = np.linspace(a, hi, n_t + 1)
        if isinstance(seg, AnalyticSegment):
            var = seg.variation(a, hi) if seg.variation is not None else None
            if var is not None and var > arc_step:
                levels = np.linspace(0.0, var, math.ceil(var / arc_step) + 1)
                lo = np.full(levels.shape, a)
                up = np.full(levels.shape, hi)
                for _ in range(60):
                    mid = 0.5 * (lo + up)
                    below = seg.variation(a, mid) < levels
                    lo = np.where(below, mid, lo)
                    up = np.where(below, up, mid)
                base = np.union1d(base, 0.5 * (lo + up))
        nodes.append(base)
    grid = np.unique(np.concatenate(nodes))
    return grid[grid <= t_end + 1e-15]


def payoff(
    x3: Callable[[float], float] | Trajectory,
    path: ControlPath,
    t_end: float | None = None,
    grid: np.ndarray | None = None,
) -> float:
    """Quadrature of the running cost |1-u1| + |u2| + |x3| |du/dt|.

    Composite Simpson per cell with the control's exact speed. For
    divergent controls pass ``t_end`` strictly inside the horizon (the
    winding-weighted part converges; the drift tail is O(T - t_end));
    ``math.inf`` is returned if partial sums blow past 1e9."""
    T = path.horizon
    if t_end is None:
        if path.divergent:
            raise PreconditionError("divergent control: pass t_end < horizon")
        t_end = T
    if grid is None:
        grid = payoff_grid(path, t_end)
    if isinstance(x3, Trajectory):
        traj = x3
        x3_fn = lambda t: float(traj.at(t)[2])  # noqa: E731
    else:
        x3_fn = x3

    # resolve the segment per cell so endpoint evaluations never pick up a
    # neighbouring piece's speed
    bps = np.asarray(path.breakpoints)
    seg_of = np.clip(
        np.searchsorted(bps, 0.5 * (grid[:-1] + grid[1:]), side="right") - 1,
        0,
        len(path.segments) - 1,
    )
    total = 0.0
    for i in range(grid.size - 1):
        a, b = float(grid[i]), float(grid[i + 1])
        h = b - a
        seg = path.segments[int(seg_of[i])]
        if isinstance(seg, AffineSegment):
            lo, hi = path.breakpoints[seg_of[i]], path.breakpoints[seg_of[i] + 1]
            sp = seg.length / (hi - lo)

            def ell(t: float) -> float:
                w = (t - lo) / (hi - lo)
                u = tuple(p + w * (q - p) for p, q in zip(seg.start, seg.end))
                return abs(1.0 - u[0]) + abs(u[1]) + abs(x3_fn(t)) * sp

        else:

            def ell(t: float, seg=seg) -> float:
                u = seg.value(t)
                return abs(1.0 - u[0]) + abs(u[1]) + abs(x3_fn(t)) * seg.speed(t)

        total += (h / 6.0) * (ell(a) + 4.0 * ell(0.5 * (a + b)) + ell(b))
        if total > 1e9:
            return math.inf
    return total


def extended_payoff(stc: SpaceTimeControl, xi: Trajectory, s_cut: float) -> float:
    """Pseudo-time payoff: drift cost weighted by the time rate plus the
    third state weighted by the control rate, integrated up to s_cut by the
    trapezoid rule on the control grid. Monotone in s_cut."""
    s = stc.grid
    if s_cut > s[-1] + 1e-9:
        raise DomainError("s_cut beyond the sampled control")
    phi = stc.phi
    x3 = np.abs(xi.states[:, 2]) if xi.states.shape[1] >= 3 else np.abs(xi.states[:, -1])
    drift = np.abs(1.0 - phi[:, 0]) + np.abs(phi[:, 1])
    mask = s[1:] <= s_cut + 1e-15
    dphi0 = np.diff(stc.phi0)[mask]
    dphi = np.linalg.norm(np.diff(phi, axis=0), axis=1)[mask]
    davg = 0.5 * (drift[:-1] + drift[1:])[mask]
    xavg = 0.5 * (x3[:-1] + x3[1:])[mask]
    total = float(np.sum(davg * dphi0) + np.sum(xavg * dphi))
    # fractional cell up to s_cut
    idx = int(np.count_nonzero(mask))
    if idx < s.size - 1 and s_cut > s[idx] + 1e-15:
        w = (s_cut - s[idx]) / (s[idx + 1] - s[idx])
        phi_cut = phi[idx] + w * (phi[idx + 1] - phi[idx])
        drift_cut = abs(1.0 - phi_cut[0]) + abs(phi_cut[1])
        x3_cut = x3[idx] + w * (x3[idx + 1] - x3[idx])
        total += 0.5 * (drift[idx] + drift_cut) * w * (stc.phi0[idx + 1] - stc.phi0[idx])
        total += 0.5 * (x3[idx] + x3_cut) * float(np.linalg.norm(phi_cut - phi[idx]))
    return total


def augment_cost(dyn: Dynamics, spec: PayoffSpec) -> Dynamics:
    """Append a running-cost state: its rate is the drift cost plus the
    impulse cost times the control speed. Starts from 0."""
    base_drift = dyn.drift
    base_speed = dyn.speed_rows
    nb = dyn.n

    def drift(x: Vec, u: Vec, v: Vec) -> Vec:
        head = base_drift(x[:nb], u, v) if base_drift is not None else (0.0,) * nb
        return head + (spec.ell_drift(x[:nb], u, v),)

    def speed_rows(x: Vec, u: Vec) -> Vec:
        head = base_speed(x[:nb], u) if base_speed is not None else (0.0,) * nb
        return head + (spec.ell_impulse(x[:nb], u),)

    def lift(g: Callable[[Vec, Vec], Vec]) -> Callable[[Vec, Vec], Vec]:
        def wrapped(x: Vec, u: Vec) -> Vec:
            return g(x[:nb], u) + (0.0,)

        return wrapped

    return Dynamics(
        n=nb + 1,
        m=dyn.m,
        fields=tuple(lift(g) for g in dyn.fields),
        drift=drift,
        speed_rows=speed_rows,
        sublinear_const=dyn.sublinear_const + 3.0,
        lipschitz_const=dyn.lipschitz_const,
        box_radius=dyn.box_radius + 10.0,
    )


def late_spiral_cost_pair(
    T: float, k: int, delta: float = 1e-3, arc_step: float = math.pi / 48
) -> tuple[float, float]:
    """Payoff of the late-burst control by two routes and one extrapolation.

    Returns (J, x4(T)) where both are Richardson-extrapolated in the
    truncation delta (halving once): J from oracle quadrature, x4 from
    integrating the cost-augmented system on the same grids. The drift tail
    beyond the truncation is linear in delta, so 2 f(d/2) - f(d) removes it."""
    path = late_spiral(T, k)
    x3 = closed_form_x3(path)
    dyn4 = augment_cost(example_dynamics(), example_payoff_spec(T))
    vals_j = []
    vals_x4 = []
    for d in (delta, 0.5 * delta):
        t_end = T - d
        grid = payoff_grid(path, t_end, arc_step=arc_step, t_step=T / 64.0)
        vals_j.append(payoff(x3, path, t_end=t_end, grid=grid))
        traj = caratheodory(dyn4, X0 + (0.0,), path, grid=grid)
        vals_x4.append(float(traj.states[-1, 3]))
    j_r = 2.0 * vals_j[1] - vals_j[0]
    x4_r = 2.0 * vals_x4[1] - vals_x4[0]
    return j_r, x4_r


def late_spiral_terminal(T: float, k: int, dyn: Dynamics | None = None, turns: int | None = None) -> Vec:
    """Terminal state of the late-burst run, read along the aligned times
    where the control is back at (1, 0): the k-th alignment gives
    x3 = exp(-2 pi k)."""
    if dyn is None:
        dyn = example_dynamics()
    if turns is None:
        turns = k
    path = late_spiral(T, k)
    t_star = T - 1.0 / (k + 2.0 * math.pi * turns)
    grid = payoff_grid(path, t_star, arc_step=math.pi / 32, t_step=T / 64.0)
    traj = caratheodory(dyn, X0, path, grid=grid)
    return traj.final_state


def variation_lower_bound_gap(path: ControlPath, x3_terminal: float) -> float:
    """x3(T) - exp(-Var(u)): nonnegative for circle-valued runs from (1, 0)."""
    return x3_terminal - math.exp(-total_variation(path))


# ---------------------------------------------------------------------------
# fixture registry
# ---------------------------------------------------------------------------


def fixture_registry() -> dict[str, Callable[..., object]]:
    return {
        "winding3d": example_dynamics,
        "spiral": spiral_control,
        "clipped-spiral": clipped_spiral,
        "late-spiral": late_spiral,
        "deadline-circle": deadline_circle,
        "circle-path": circle_path,
        "payoff-spec": example_payoff_spec,
    }
