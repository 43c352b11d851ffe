"""Fixed-step integration of the time-domain and space-time systems.

The right-hand sides are affine in the control rates, so on each grid cell
the rates are exact difference quotients and classical fourth-order steps
are taken per cell. States are handled as plain float tuples in the hot
loop; trajectories are stored as arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .completion import CompletionResult, SpaceTimeControl
from .errors import DiagnosticError, DomainError, PreconditionError
from .paths import AffineSegment, Clock, ControlPath, ControlSet, OrdinaryControl

Vec = tuple[float, ...]

RK_REFINE_TOL = 1e-7
RK_MAX_STEPS = 2**20


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dynamics:
    """Control-affine dynamics.

    ``drift`` is multiplied by the time rate (dt/ds in pseudo-time, 1 in
    real time), each entry of ``fields`` by the matching control rate, and
    ``speed_rows``, when present, by the Euclidean norm of the control rate
    (used for cost augmentation). ``sublinear_const`` is the constant M in
    the linear-growth bound; ``box_radius`` bounds the region the dynamics
    were declared on, and integration aborts if the state leaves it.
    """

    n: int
    m: int
    fields: tuple[Callable[[Vec, Vec], Vec], ...]
    drift: Callable[[Vec, Vec, Vec], Vec] | None = None
    speed_rows: Callable[[Vec, Vec], Vec] | None = None
    sublinear_const: float = 1.0
    lipschitz_const: float = 1.0
    box_radius: float = float("inf")

    def __post_init__(self) -> None:
        if len(self.fields) != self.m:
            raise PreconditionError("need one vector field per impulsive control dimension")

    def sublinearity_check(
        self,
        control_set: ControlSet,
        ordinary_values: Sequence[Vec] = ((0.0,),),
        samples: int = 200,
        seed: int = 0,
    ) -> float:
        """Spot-check |(g0, g1, .., gm)| <= M(1 + |(x, u)|) by random sampling
        on the declared box; returns the worst ratio (should be <= 1)."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        r = min(self.box_radius, 1e6)
        for _ in range(samples):
            x = tuple(rng.uniform(-r, r, self.n))
            if control_set.kind == "ball":
                raw = rng.normal(size=control_set.dim)
                raw *= control_set.radius * rng.uniform() ** (1.0 / control_set.dim) / np.linalg.norm(raw)
                u = tuple(np.asarray(control_set.center) + raw)
            else:
                u = tuple(rng.uniform(lo, hi) for lo, hi in zip(control_set.lower, control_set.upper))
            v = ordinary_values[int(rng.integers(len(ordinary_values)))]
            total = 0.0
            if self.drift is not None:
                total += sum(c * c for c in self.drift(x, u, v))
            for g in self.fields:
                total += sum(c * c for c in g(x, u))
            bound = self.sublinear_const * (1.0 + math.sqrt(sum(c * c for c in x) + sum(c * c for c in u)))
            worst = max(worst, math.sqrt(total) / bound)
        return worst


def equiboundedness_log_bound(dyn: Dynamics, x0: Sequence[float], span: float) -> float:
    """log of (|x0| + (m+1) M S) * exp((m+1) M S), safe against overflow."""
    x0n = math.sqrt(sum(float(c) ** 2 for c in x0))
    a = (dyn.m + 1) * dyn.sublinear_const * span
    return math.log(x0n + a) + a


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    """Grid-sampled state curve with linear interpolation."""

    grid: np.ndarray
    states: np.ndarray
    domain: str = "s"  # "s" (pseudo-time) or "t" (real time)

    def __post_init__(self) -> None:
        g = np.ascontiguousarray(np.asarray(self.grid, dtype=float))
        x = np.ascontiguousarray(np.asarray(self.states, dtype=float))
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "states", x)
        if g.ndim != 1 or x.shape[0] != g.size:
            raise PreconditionError("trajectory grid and states must match")
        if np.any(np.diff(g) <= 0):
            raise PreconditionError("trajectory grid must be strictly increasing")
        g.flags.writeable = False
        x.flags.writeable = False

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def at(self, q: float | np.ndarray) -> np.ndarray:
        qa = np.asarray(q, dtype=float)
        if np.any(qa < self.grid[0] - 1e-9) or np.any(qa > self.grid[-1] + 1e-9):
            raise DomainError("trajectory queried outside its grid span")
        return np.stack(
            [np.interp(qa, self.grid, self.states[:, j]) for j in range(self.n)], axis=-1
        )

    @property
    def final_state(self) -> Vec:
        return tuple(self.states[-1])


# ---------------------------------------------------------------------------
# shared stepper
# ---------------------------------------------------------------------------


def _rhs_factory(dyn: Dynamics):
    drift = dyn.drift
    fields = dyn.fields
    speed_rows = dyn.speed_rows
    n = dyn.n

    def rhs(x: Vec, u: Vec, v: Vec, a: float, b: Vec, bnorm: float) -> Vec:
        acc = [0.0] * n
        if a != 0.0 and drift is not None:
            d = drift(x, u, v)
            for i in range(n):
                acc[i] += a * d[i]
        for j, bj in enumerate(b):
            if bj != 0.0:
                g = fields[j](x, u)
                for i in range(n):
                    acc[i] += bj * g[i]
        if speed_rows is not None and bnorm != 0.0:
            sr = speed_rows(x, u)
            for i in range(n):
                acc[i] += bnorm * sr[i]
        return tuple(acc)

    return rhs


def _check_box(x: Vec, radius: float, where: float) -> None:
    if sum(c * c for c in x) > radius * radius:
        raise DiagnosticError(
            f"state left the declared box (|x| > {radius}) at parameter {where}; enlarge the box"
        )


# ---------------------------------------------------------------------------
# space-time integration
# ---------------------------------------------------------------------------


def integrate_spacetime(
    dyn: Dynamics,
    x0: Sequence[float],
    stc: SpaceTimeControl,
    substeps: int = 1,
    waive_feasibility: bool = False,
) -> Trajectory:
    """Integrate the space-time system along the control grid.

    Rates dphi0/ds and dphi/ds are exact per-cell difference quotients, so
    on plateaus only the impulsive part acts and on pure-drift cells only
    the drift does; cells where nothing moves leave the state bitwise
    unchanged.
    """
    if stc.feasible is None and not waive_feasibility:
        raise PreconditionError("feasibility unverified: verify or waive explicitly")
    if dyn.m != stc.m:
        raise PreconditionError("control dimension mismatch between dynamics and control")
    rhs = _rhs_factory(dyn)
    s = stc.grid
    phi = stc.phi
    phi0 = stc.phi0
    npts = s.size
    m = dyn.m
    has_psi = stc.psi.shape[1] > 0
    psi_rows = [tuple(row) for row in stc.psi] if has_psi else None
    v0: Vec = (0.0,)
    out = np.empty((npts, dyn.n))
    x = tuple(float(c) for c in x0)
    out[0] = x
    radius = dyn.box_radius
    use_norm = dyn.speed_rows is not None
    for i in range(npts - 1):
        ds = s[i + 1] - s[i]
        a = (phi0[i + 1] - phi0[i]) / ds
        b = tuple((phi[i + 1, j] - phi[i, j]) / ds for j in range(m))
        bnorm = math.sqrt(sum(c * c for c in b)) if use_norm else 0.0
        u_lo = tuple(phi[i])
        v = psi_rows[i] if has_psi else v0
        h = ds / substeps
        for k in range(substeps):
            u1 = tuple(u_lo[j] + b[j] * (k * h) for j in range(m))
            um = tuple(u_lo[j] + b[j] * ((k + 0.5) * h) for j in range(m))
            u2 = tuple(u_lo[j] + b[j] * ((k + 1.0) * h) for j in range(m))
            k1 = rhs(x, u1, v, a, b, bnorm)
            x2 = tuple(x[j] + 0.5 * h * k1[j] for j in range(dyn.n))
            k2 = rhs(x2, um, v, a, b, bnorm)
            x3 = tuple(x[j] + 0.5 * h * k2[j] for j in range(dyn.n))
            k3 = rhs(x3, um, v, a, b, bnorm)
            x4 = tuple(x[j] + h * k3[j] for j in range(dyn.n))
            k4 = rhs(x4, u2, v, a, b, bnorm)
            x = tuple(
                x[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
                for j in range(dyn.n)
            )
        out[i + 1] = x
        if radius != float("inf") and (i & 63) == 0:
            _check_box(x, radius, float(s[i + 1]))
    if radius != float("inf"):
        _check_box(x, radius, float(s[-1]))
    return Trajectory(grid=s, states=out, domain="s")


def integrate_spacetime_refined(
    dyn: Dynamics,
    x0: Sequence[float],
    stc: SpaceTimeControl,
    tol: float = RK_REFINE_TOL,
    max_steps: int = RK_MAX_STEPS,
    waive_feasibility: bool = False,
) -> tuple[Trajectory, float, int]:
    """Halve the step until successive refinements agree below ``tol``.

    Returns (finest trajectory, measured refinement delta, substeps used).
    """
    cells = stc.grid.size - 1
    substeps = 1
    prev = integrate_spacetime(dyn, x0, stc, substeps, waive_feasibility)
    delta = math.inf
    while cells * substeps * 2 <= max_steps:
        substeps *= 2
        cur = integrate_spacetime(dyn, x0, stc, substeps, waive_feasibility)
        delta = float(np.max(np.abs(cur.states - prev.states)))
        prev = cur
        if delta < tol:
            break
    return prev, delta, substeps


# ---------------------------------------------------------------------------
# time-domain (Caratheodory) integration
# ---------------------------------------------------------------------------


def _time_grid_for(path: ControlPath, a: float, b: float, cells: int) -> np.ndarray:
    base = np.linspace(a, b, cells + 1)
    bps = [t for t in path.breakpoints if a < t < b]
    grid = np.unique(np.concatenate((base, np.asarray(bps))))
    return grid


def caratheodory(
    dyn: Dynamics,
    x0: Sequence[float],
    path: ControlPath,
    ordinary: OrdinaryControl | None = None,
    grid: np.ndarray | None = None,
    cells: int = 2**14,
    substeps: int = 1,
) -> Trajectory:
    """Integrate the time-domain system with exact segment derivatives.

    The control must be absolutely continuous on the grid span: any
    declared jump inside it is a contract violation, and a divergent tail
    requires the grid to stop short of the horizon.
    """
    if grid is None:
        t_end = path.horizon
        if path.divergent:
            raise PreconditionError("divergent control: pass a grid stopping before the horizon")
        grid = _time_grid_for(path, 0.0, t_end, cells)
    grid = np.asarray(grid, dtype=float)
    a, b = float(grid[0]), float(grid[-1])
    if path.has_jump_inside(a, b):
        raise PreconditionError("control jumps inside the integration span")
    if path.divergent and b >= path.horizon:
        raise PreconditionError("grid reaches the divergent endpoint")
    inner = [t for t in path.breakpoints if a < t < b]
    if inner and not np.all(np.isin(inner, grid)):
        # cells must never straddle a segment boundary
        grid = np.union1d(grid, np.asarray(inner))
    rhs = _rhs_factory(dyn)
    n, m = dyn.n, dyn.m
    use_norm = dyn.speed_rows is not None
    vfun = ordinary.value if ordinary is not None else None
    x = tuple(float(c) for c in x0)
    out = np.empty((grid.size, n))
    out[0] = x
    v0: Vec = (0.0,)
    radius = dyn.box_radius
    bps = path.breakpoints
    seg_of = np.clip(np.searchsorted(bps, 0.5 * (grid[:-1] + grid[1:]), side="right") - 1, 0, len(path.segments) - 1)
    for i in range(grid.size - 1):
        t0 = grid[i]
        h_cell = grid[i + 1] - t0
        seg = path.segments[int(seg_of[i])]
        if isinstance(seg, AffineSegment):
            lo, hi = bps[seg_of[i]], bps[seg_of[i] + 1]
            slope = tuple((q - p) / (hi - lo) for p, q in zip(seg.start, seg.end))
            base = tuple(p + (t0 - lo) / (hi - lo) * (q - p) for p, q in zip(seg.start, seg.end))
            value = lambda t, b0=base, sl=slope, tt=t0: tuple(b0[j] + sl[j] * (t - tt) for j in range(m))  # noqa: E731
            deriv = lambda t, sl=slope: sl  # noqa: E731
        else:
            value = seg.value
            deriv = seg.derivative
            if deriv is None:
                raise PreconditionError("analytic segment lacks a derivative evaluator")
        v = vfun(float(t0)) if vfun is not None else v0
        h = h_cell / substeps
        for k in range(substeps):
            ta = t0 + k * h
            tm = t0 + (k + 0.5) * h
            tb = t0 + (k + 1.0) * h
            ba = deriv(ta)
            bm = deriv(tm)
            bb = deriv(tb)
            na = math.sqrt(sum(c * c for c in ba)) if use_norm else 0.0
            nm = math.sqrt(sum(c * c for c in bm)) if use_norm else 0.0
            nb = math.sqrt(sum(c * c for c in bb)) if use_norm else 0.0
            k1 = rhs(x, value(ta), v, 1.0, ba, na)
            x2 = tuple(x[j] + 0.5 * h * k1[j] for j in range(n))
            k2 = rhs(x2, value(tm), v, 1.0, bm, nm)
            x3 = tuple(x[j] + 0.5 * h * k2[j] for j in range(n))
            k3 = rhs(x3, value(tm), v, 1.0, bm, nm)
            x4 = tuple(x[j] + h * k3[j] for j in range(n))
            k4 = rhs(x4, value(tb), v, 1.0, bb, nb)
            x = tuple(
                x[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) for j in range(n)
            )
        out[i + 1] = x
        if radius != float("inf") and (i & 63) == 0:
            _check_box(x, radius, float(grid[i + 1]))
    return Trajectory(grid=grid, states=out, domain="t")


def caratheodory_sampled(
    dyn: Dynamics,
    x0: Sequence[float],
    t_nodes: np.ndarray,
    u_nodes: np.ndarray,
    ordinary: OrdinaryControl | None = None,
) -> Trajectory:
    """Time-domain integration of a control given by samples.

    The control is taken affine on each cell, so its rate is the exact
    difference quotient there.
    """
    t = np.asarray(t_nodes, dtype=float)
    u = np.atleast_2d(np.asarray(u_nodes, dtype=float))
    if u.shape[0] != t.size:
        u = u.T
    rhs = _rhs_factory(dyn)
    n, m = dyn.n, dyn.m
    use_norm = dyn.speed_rows is not None
    vfun = ordinary.value if ordinary is not None else None
    v0: Vec = (0.0,)
    x = tuple(float(c) for c in x0)
    out = np.empty((t.size, n))
    out[0] = x
    for i in range(t.size - 1):
        h = t[i + 1] - t[i]
        b = tuple((u[i + 1, j] - u[i, j]) / h for j in range(m))
        bnorm = math.sqrt(sum(c * c for c in b)) if use_norm else 0.0
        v = vfun(float(t[i])) if vfun is not None else v0
        u_lo = tuple(u[i])
        um = tuple(u_lo[j] + 0.5 * h * b[j] for j in range(m))
        u_hi = tuple(u[i + 1])
        k1 = rhs(x, u_lo, v, 1.0, b, bnorm)
        x2 = tuple(x[j] + 0.5 * h * k1[j] for j in range(n))
        k2 = rhs(x2, um, v, 1.0, b, bnorm)
        x3 = tuple(x[j] + 0.5 * h * k2[j] for j in range(n))
        k3 = rhs(x3, um, v, 1.0, b, bnorm)
        x4 = tuple(x[j] + h * k3[j] for j in range(n))
        k4 = rhs(x4, u_hi, v, 1.0, b, bnorm)
        x = tuple(x[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) for j in range(n))
        out[i + 1] = x
    return Trajectory(grid=t, states=out, domain="t")


# ---------------------------------------------------------------------------
# composing with clocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClockedSolution:
    """State curve in real time obtained as xi composed with the clock,
    plus the terminal record at the horizon."""

    traj: Trajectory
    horizon: float
    terminal_state: Vec
    terminal_residual: float
    terminal_source: str  # "finite" or "diagnostic"

    def at(self, t: float | np.ndarray) -> np.ndarray:
        tq = np.asarray(t, dtype=float)
        end = np.isclose(tq, self.horizon, rtol=0.0, atol=1e-12)
        inner = self.traj.at(np.where(end, self.traj.grid[-1], np.minimum(tq, self.traj.grid[-1])))
        term = np.asarray(self.terminal_state)
        if inner.ndim == 1:
            return term if bool(end) else inner
        return np.where(end[..., None], term[None, :], inner)


def clocked_solution(
    xi: Trajectory,
    clock: Clock,
    t_grid: np.ndarray | None = None,
    terminal_visits: np.ndarray | None = None,
) -> ClockedSolution:
    """x(t) = xi(sigma(t)) by interpolation, with the terminal value read at
    the final pseudo-time for finite clocks, or along the recorded visit
    sequence (with its achieved residual) for divergent ones."""
    ts = clock.times if t_grid is None else np.asarray(t_grid, dtype=float)
    sq = np.asarray(clock.at(ts), dtype=float)
    if sq.max() > xi.grid[-1] + 1e-9:
        if clock.finite_limit is not None:
            raise DomainError("clock range exceeds the integrated trajectory")
        sq = np.minimum(sq, xi.grid[-1])
    xvals = xi.at(sq)
    if clock.finite_limit is not None:
        s_end = min(clock.finite_limit, float(xi.grid[-1]))
        term = tuple(np.asarray(xi.at(s_end), dtype=float))
        resid = 0.0
        source = "finite"
    else:
        if terminal_visits is None or len(terminal_visits) == 0:
            raise DomainError("divergent clock needs a terminal visit sequence")
        vis = np.asarray(terminal_visits, dtype=float)
        vis = vis[vis <= xi.grid[-1] + 1e-9]
        if vis.size == 0:
            raise DomainError("no terminal visit lies inside the integrated span")
        term = tuple(np.asarray(xi.at(float(vis[-1])), dtype=float))
        if vis.size >= 2:
            prev = np.asarray(xi.at(float(vis[-2])), dtype=float)
            resid = float(np.linalg.norm(np.asarray(term) - prev))
        else:
            resid = math.inf
        source = "diagnostic"
    keep = np.concatenate(([True], np.diff(ts) > 0))
    return ClockedSolution(
        traj=Trajectory(grid=ts[keep], states=np.atleast_2d(xvals)[keep], domain="t"),
        horizon=clock.horizon,
        terminal_state=term,
        terminal_residual=resid,
        terminal_source=source,
    )


def solve_completion(
    dyn: Dynamics,
    x0: Sequence[float],
    completion: CompletionResult,
    substeps: int = 1,
) -> tuple[Trajectory, ClockedSolution]:
    """Integrate a completion and compose with its clock."""
    xi = integrate_spacetime(dyn, x0, completion.stc, substeps=substeps)
    sol = clocked_solution(xi, completion.clock, terminal_visits=completion.terminal_visits)
    return xi, sol


def consistency_check(
    dyn: Dynamics,
    x0: Sequence[float],
    path: ControlPath,
    ordinary: OrdinaryControl | None,
    completion: CompletionResult,
    t_star: float,
    cells: int = 2**12,
    substeps: int = 1,
) -> float:
    """Sup deviation on [0, t_star] between the clock-composed solution and
    the direct time-domain solution (the control must be absolutely
    continuous there). Large values indicate completions whose plateaus
    have a net effect.

    The test grid includes the completion's own time nodes, where the
    composed solution needs no pseudo-time interpolation."""
    if path.has_jump_inside(0.0, t_star):
        raise PreconditionError("consistency check needs an absolutely continuous control")
    grid = _time_grid_for(path, 0.0, t_star, cells)
    anchors = completion.clock.times
    grid = np.union1d(grid, anchors[(anchors > 0.0) & (anchors < t_star)])
    direct = caratheodory(dyn, x0, path, ordinary, grid=grid, substeps=substeps)
    xi = integrate_spacetime(dyn, x0, completion.stc, substeps=substeps)
    sol = clocked_solution(xi, completion.clock, t_grid=grid, terminal_visits=completion.terminal_visits)
    return float(np.max(np.abs(sol.traj.states - direct.states)))


def uniform_convergence_probe(
    dyn: Dynamics,
    x0: Sequence[float],
    stc: SpaceTimeControl,
    perturbed: Sequence[SpaceTimeControl],
    substeps: int = 1,
) -> list[float]:
    """Sup distance of each perturbed trajectory to the base one, measured
    at the base grid nodes over the common span."""
    base = integrate_spacetime(dyn, x0, stc, substeps=substeps, waive_feasibility=True)
    sups = []
    for other in perturbed:
        tr = integrate_spacetime(dyn, x0, other, substeps=substeps, waive_feasibility=True)
        s_hi = min(base.grid[-1], tr.grid[-1])
        nodes = base.grid[base.grid <= s_hi + 1e-12]
        sups.append(float(np.max(np.abs(tr.at(nodes) - base.at(nodes)))))
    return sups
