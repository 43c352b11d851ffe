"""Smoothing of clocks and absolutely continuous approximating sequences.

A clock is smoothed by convolving an odd-reflection extension with an even
compactly supported bump; clocks with a finite limit get a square-root tail
that blows up at the horizon, divergent ones are smoothed interval by
interval between continuity anchors, where the smoothed clock matches the
original exactly. On top of the smoothed clocks, absolutely continuous
controls are assembled that replay the completion up to a visit marker and
bridge straight to the terminal value; certificates then measure how well
the resulting runs anchor the terminal state along arc-length markers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .completion import CompletionResult, SpaceTimeControl
from .errors import ConfigError, DomainError, PreconditionError
from .ode import (
    ClockedSolution,
    Dynamics,
    Trajectory,
    caratheodory,
    caratheodory_sampled,
    clocked_solution,
    integrate_spacetime,
)
from .paths import Clock, ControlPath, ControlSet, OrdinaryControl

_KERNEL_NODES = 257


# ---------------------------------------------------------------------------
# mollifiers
# ---------------------------------------------------------------------------


def _bump(r: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r)
    inside = np.abs(r) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


@dataclass(frozen=True)
class Mollifier:
    """Even smooth bump with compact support, normalized to unit mass.

    The base profile lives on [-1, 1]; ``kernel`` rescales it to the
    support [-w/(2h), w/(2h)] and returns symmetric quadrature nodes with
    exactly normalized weights, so convolution preserves affine functions
    and anchors at odd-reflection points exactly.
    """

    profile: Callable[[np.ndarray], np.ndarray] = _bump
    quad_nodes: int = 4097

    def __post_init__(self) -> None:
        r = np.linspace(-1.0, 1.0, self.quad_nodes)
        coarse = np.trapezoid(self.profile(r), r)
        r2 = np.linspace(-1.0, 1.0, 2 * self.quad_nodes - 1)
        fine = np.trapezoid(self.profile(r2), r2)
        if abs(coarse - fine) > 1e-8 * fine:
            raise ConfigError("mollifier profile is not resolved to quadrature tolerance")
        vals = self.profile(r)
        if not np.allclose(vals, vals[::-1], rtol=0.0, atol=1e-15):
            raise ConfigError("mollifier profile must be even")
        object.__setattr__(self, "_mass", float(fine))

    def kernel(self, width: float, h: float, nodes: int = _KERNEL_NODES) -> tuple[np.ndarray, np.ndarray]:
        if h < 1.0:
            raise ConfigError("scale h must be at least 1 to keep the support contained")
        half = width / (2.0 * h)
        r = np.linspace(-half, half, nodes)
        w = self.profile(r / half)
        w[0] = 0.0
        w[-1] = 0.0
        w = w / w.sum()
        return r, w


# ---------------------------------------------------------------------------
# smoothed clocks
# ---------------------------------------------------------------------------


def _sigma_arrays(clock: Clock) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(times, right limits, left limits) for vectorized evaluation."""
    lo, hi = clock._side_values()
    return clock.times, hi, lo


def _sigma_eval(
    times: np.ndarray,
    hi: np.ndarray,
    lo: np.ndarray,
    tq: np.ndarray,
    jump_times: np.ndarray | None = None,
    jump_mids: np.ndarray | None = None,
) -> np.ndarray:
    """Piecewise-linear clock evaluation (vectorized).

    Between nodes the right limit of the left node joins the left limit of
    the right node. Exactly at a jump time the symmetric representative
    (the midpoint of the jump interval) is returned: convolution against an
    integrable kernel must not depend on the value chosen on a null set,
    and quadrature nodes do land on jump times.
    """
    idx = np.clip(np.searchsorted(times, tq, side="right") - 1, 0, times.size - 2)
    t0 = times[idx]
    t1 = times[idx + 1]
    w = np.clip((tq - t0) / (t1 - t0), 0.0, 1.0)
    out = hi[idx] * (1.0 - w) + lo[idx + 1] * w
    if jump_times is not None and jump_times.size:
        for tj, mid in zip(jump_times, jump_mids):
            out = np.where(tq == tj, mid, out)
    return out


def _pava_nondecreasing(y: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators projection onto nondecreasing sequences."""
    vals: list[float] = []
    counts: list[int] = []
    for v in y:
        vals.append(float(v))
        counts.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v2, c2 = vals.pop(), counts.pop()
            v1, c1 = vals.pop(), counts.pop()
            vals.append((v1 * c1 + v2 * c2) / (c1 + c2))
            counts.append(c1 + c2)
    out = np.empty_like(y)
    pos = 0
    for v, c in zip(vals, counts):
        out[pos : pos + c] = v
        pos += c
    return out


@dataclass(frozen=True)
class MollifiedClock:
    """Strictly increasing absolutely continuous surrogate of a clock.

    ``raw`` holds the convolution output before the slope repair and the
    jump-value pinning. For finite-limit clocks the table ends at the tail
    junction and the map continues as s_bar * sqrt((T - t_bar)/(T - t)),
    which is onto the half line.
    """

    horizon: float
    scale: float
    case: str  # "finite-limit" or "divergent"
    times: np.ndarray
    values: np.ndarray
    raw: np.ndarray
    tail: tuple[float, float] | None  # (t_bar, s_bar)
    repair_max: float
    anchor_snap_max: float
    pinned: tuple[float, ...]

    def sigma_at(self, t: float | np.ndarray) -> np.ndarray | float:
        tq = np.asarray(t, dtype=float)
        if np.any(tq < 0.0) or np.any(tq >= self.horizon):
            raise DomainError("smoothed clock is defined on [0, horizon)")
        out = np.interp(tq, self.times, self.values)
        if self.tail is not None:
            t_bar, s_bar = self.tail
            mask = tq > t_bar
            if np.any(mask):
                out = np.where(mask, s_bar * np.sqrt((self.horizon - t_bar) / (self.horizon - tq)), out)
        return float(out) if np.isscalar(t) else out

    def phi0_at(self, s: float | np.ndarray) -> np.ndarray | float:
        sq = np.asarray(s, dtype=float)
        if np.any(sq < -1e-12):
            raise DomainError("inverse queried at negative pseudo-time")
        out = np.interp(sq, self.values, self.times)
        if self.tail is not None:
            t_bar, s_bar = self.tail
            mask = sq > s_bar
            if np.any(mask):
                ratio = np.where(mask, s_bar / np.where(mask, sq, 1.0), 0.0)
                out = np.where(mask, self.horizon - ratio**2 * (self.horizon - t_bar), out)
        elif np.any(sq > self.values[-1] + 1e-9):
            raise DomainError("inverse queried beyond the smoothed clock range")
        return float(out) if np.isscalar(s) else out


def _convolve(
    times: np.ndarray,
    hi: np.ndarray,
    lo: np.ndarray,
    t_out: np.ndarray,
    r: np.ndarray,
    w: np.ndarray,
    reflect_lo: tuple[float, float],
    reflect_hi: tuple[float, float],
    jump_times: np.ndarray | None = None,
    jump_mids: np.ndarray | None = None,
) -> np.ndarray:
    """Weighted sum of the odd-reflected clock at t_out - r.

    ``reflect_lo``/``reflect_hi`` are the (time, value) centers of the odd
    reflections at the lower and upper ends of the covered interval.
    """
    t_lo, v_lo = reflect_lo
    t_hi, v_hi = reflect_hi
    out = np.empty_like(t_out)
    chunk = max(1, 2_000_000 // max(r.size, 1))
    for start in range(0, t_out.size, chunk):
        tq = t_out[start : start + chunk, None] - r[None, :]
        below = tq < t_lo
        above = tq > t_hi
        arg = np.where(below, 2.0 * t_lo - tq, np.where(above, 2.0 * t_hi - tq, tq))
        vals = _sigma_eval(times, hi, lo, np.clip(arg, t_lo, t_hi), jump_times, jump_mids)
        vals = np.where(below, 2.0 * v_lo - vals, np.where(above, 2.0 * v_hi - vals, vals))
        out[start : start + chunk] = vals @ w
    return out


def mollify_clock(
    clock: Clock,
    h: float,
    mollifier: Mollifier | None = None,
    coarsen: int = 1,
) -> MollifiedClock:
    """Smooth a clock at scale h.

    Finite-limit clocks are extended by odd reflection at both ends of
    [0, T], convolved, and continued by a square-root blow-up tail past a
    continuity time close to the horizon, making the result onto the half
    line. Divergent clocks are convolved interval by interval between
    their continuity anchors, where the smoothed clock equals the original
    exactly (anchor values snapped to remove quadrature rounding). The
    unit slope bound is preserved by the convolution, re-checked, and
    repaired by isotonic projection; declared values at jump times are
    restored by two concatenated linear interpolations around each jump.
    """
    if mollifier is None:
        mollifier = Mollifier()
    if h < 1.0:
        raise ConfigError("scale h must be at least 1")
    times, hi, lo = _sigma_arrays(clock)
    jump_times = np.asarray([j.time for j in clock.jumps])
    jump_mids = np.asarray([0.5 * (j.s_lo + j.s_hi) for j in clock.jumps])
    T = clock.horizon
    t_out = clock.times[::coarsen]
    if t_out[-1] != clock.times[-1]:
        t_out = np.append(t_out, clock.times[-1])
    for j in clock.jumps:
        if j.time not in t_out:
            t_out = np.union1d(t_out, [j.time])

    snap_max = 0.0
    if clock.finite_limit is not None:
        case = "finite-limit"
        s_bar_lim = float(clock.finite_limit)
        times_e = times
        hi_e, lo_e = hi, lo
        if times[-1] < T:
            times_e = np.append(times, T)
            hi_e = np.append(hi, s_bar_lim)
            lo_e = np.append(lo, s_bar_lim)
        if T not in t_out:
            t_out = np.append(t_out, T)
        r, w = mollifier.kernel(T, h)
        raw = _convolve(times_e, hi_e, lo_e, t_out, r, w, (0.0, 0.0), (T, s_bar_lim), jump_times, jump_mids)
        # anchors of the odd reflection are exact up to rounding: snap them
        for t_a, v_a in ((0.0, 0.0), (T, s_bar_lim)):
            i = int(np.searchsorted(t_out, t_a))
            if i < t_out.size and t_out[i] == t_a:
                snap_max = max(snap_max, abs(raw[i] - v_a))
                raw[i] = v_a
    else:
        case = "divergent"
        if clock.partition is None or clock.partition.size < 2:
            raise ConfigError("divergent clock needs a continuity-anchor partition")
        part = np.asarray(clock.partition, dtype=float)
        if part[-1] < t_out[-1] - 1e-12:
            part = np.append(part, t_out[-1])
        for t_a in part:
            if t_a not in t_out and t_a <= t_out[-1]:
                t_out = np.union1d(t_out, [t_a])
        raw = np.empty_like(t_out)
        for i in range(part.size - 1):
            a, b = float(part[i]), float(part[i + 1])
            sel = (t_out >= a) & (t_out <= b) if i == part.size - 2 else (t_out >= a) & (t_out < b)
            if not np.any(sel):
                continue
            v_a = float(_sigma_eval(times, hi, lo, np.asarray([a]))[0]) if a > times[0] else float(clock.values[0])
            v_b = float(_sigma_eval(times, hi, lo, np.asarray([b]))[0])
            r, w = mollifier.kernel(b - a, h)
            raw[sel] = _convolve(times, hi, lo, t_out[sel], r, w, (a, v_a), (b, v_b), jump_times, jump_mids)
            for t_a2, v_a2 in ((a, v_a), (b, v_b)):
                j = int(np.searchsorted(t_out, t_a2))
                if j < t_out.size and t_out[j] == t_a2 and sel[j]:
                    snap_max = max(snap_max, abs(raw[j] - v_a2))
                    raw[j] = v_a2

    # slope repair: sigma(t) - t must be nondecreasing
    gap = raw - t_out
    repaired = _pava_nondecreasing(gap)
    repair_max = float(np.max(np.abs(repaired - gap))) if gap.size else 0.0
    values = repaired + t_out

    # restore declared values at jump times by two linear interpolations
    pinned: list[float] = []
    for j in clock.jumps:
        tau, target = j.time, j.s_at
        if tau >= t_out[-1]:
            continue
        k = int(np.searchsorted(t_out, tau))
        if k >= t_out.size or t_out[k] != tau:
            continue
        span = 1
        ok = False
        while k - span >= 0 and k + span < t_out.size:
            ta, tb = t_out[k - span], t_out[k + span]
            va, vb = values[k - span], values[k + span]
            if (
                va < target < vb
                and (target - va) >= (tau - ta)
                and (vb - target) >= (tb - tau)
            ):
                ok = True
                break
            span += 1
        if ok:
            left = slice(k - span, k + 1)
            right = slice(k, k + span + 1)
            values[left] = np.interp(t_out[left], [ta, tau], [va, target])
            values[right] = np.interp(t_out[right], [tau, tb], [target, vb])
            pinned.append(float(tau))

    tail = None
    if clock.finite_limit is not None:
        # pick a continuity node near the horizon and branch to the tail there
        target_t = T * (1.0 - 1.0 / (4.0 * h))
        jt = {j.time for j in clock.jumps}
        k = int(np.searchsorted(t_out, target_t, side="right")) - 1
        while k > 0 and (t_out[k] in jt or t_out[k] >= T):
            k -= 1
        t_bar = float(t_out[k])
        s_bar = float(values[k])
        if s_bar < 2.0 * (T - t_bar):
            raise ConfigError("scale too small: blow-up tail would violate the slope bound")
        tail = (t_bar, s_bar)
        t_keep = k + 1
        t_out = t_out[:t_keep]
        values = values[:t_keep]
        raw = raw[:t_keep]

    return MollifiedClock(
        horizon=T,
        scale=float(h),
        case=case,
        times=t_out,
        values=values,
        raw=raw,
        tail=tail,
        repair_max=repair_max,
        anchor_snap_max=snap_max,
        pinned=tuple(pinned),
    )


# ---------------------------------------------------------------------------
# approximating sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApproxMember:
    k: int
    scale: float | None
    certified: bool
    clock_error: float
    traj_error: float
    marker: float
    t_nodes: np.ndarray
    u_nodes: np.ndarray
    traj: Trajectory
    path: ControlPath | None = None

    def u_at(self, t: float) -> np.ndarray:
        if self.path is not None and t <= self.path.horizon:
            return np.asarray(self.path.value(float(t)))
        return np.stack(
            [np.interp(t, self.t_nodes, self.u_nodes[:, j]) for j in range(self.u_nodes.shape[1])],
            axis=-1,
        )

    @property
    def terminal_state(self) -> np.ndarray:
        return self.traj.states[-1]

    @property
    def terminal_control(self) -> np.ndarray:
        return self.u_nodes[-1]

    def arc_value(self, t: np.ndarray | float) -> np.ndarray | float:
        """t + Var_[0,t] of the member control (polygonal for sampled ones)."""
        if self.path is not None:
            tq = np.atleast_1d(np.asarray(t, dtype=float))
            out = np.array([q + self.path.variation_to(float(q)) for q in tq])
            return float(out[0]) if np.isscalar(t) else out
        steps = np.linalg.norm(np.diff(self.u_nodes, axis=0), axis=1)
        cum = np.concatenate(([0.0], np.cumsum(steps)))
        return np.interp(t, self.t_nodes, self.t_nodes + cum)

    def solve_arc(self, level: float) -> float | None:
        """Invert t + Var_[0,t](u_k) = level by monotone bisection."""
        T = float(self.t_nodes[-1])
        lo, hi = float(self.t_nodes[0]), T
        if self.arc_value(hi) < level:
            return None
        if self.arc_value(lo) > level:
            return None
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self.arc_value(mid) < level:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ApproxSequence:
    mode: str
    members: tuple[ApproxMember, ...]
    markers: np.ndarray
    u_terminal: tuple[float, ...]
    limit: ClockedSolution
    xi: Trajectory
    completion: CompletionResult
    variation_envelope: Callable[[float], float]
    equibound: float


def _default_scale_schedule(k: int) -> float:
    return float(k * k)


def _r_prime(dyn: Dynamics, x_sup: float, xi_sup: float, T: float, control_set: ControlSet) -> float:
    r = x_sup + 2.0 * xi_sup + 1.0
    a = (dyn.m + 1) * dyn.sublinear_const * (T + control_set.bridge_constant * control_set.diameter)
    if a > 700.0:
        return math.inf
    return (r + a) * math.exp(a)


def build_approx_sequence(
    completion: CompletionResult,
    dyn: Dynamics,
    x0: Sequence[float],
    k_list: Sequence[int],
    control_set: ControlSet,
    mode: str = "mollified",
    path: ControlPath | None = None,
    ordinary: OrdinaryControl | None = None,
    mollifier: Mollifier | None = None,
    scale_schedule: Callable[[int], float] | None = None,
    scale_cap: float = 2.0**10,
    subsample: int = 8,
    xi: Trajectory | None = None,
) -> ApproxSequence:
    """Absolutely continuous runs approximating a completion's solution.

    ``mollified`` members replay the control along a smoothed clock up to
    the k-th visit marker and bridge straight to the terminal value; the
    smoothing scale is escalated by doubling (never below the schedule)
    until the measured clock-inverse and trajectory surrogates drop below
    1/k, and members that exhaust the cap are reported uncertified rather
    than silently accepted. ``clip`` members freeze the original control at
    the k-th partition time (absolutely continuous inputs only).
    """
    ks = sorted(int(k) for k in k_list)
    if mollifier is None:
        mollifier = Mollifier()
    if scale_schedule is None:
        scale_schedule = _default_scale_schedule
    stc = completion.stc
    grid = stc.grid
    if xi is None:
        xi = integrate_spacetime(dyn, x0, stc)
    limit = clocked_solution(xi, completion.clock, terminal_visits=completion.terminal_visits)

    finite = stc.descriptor == "finite"
    if finite:
        base = float(grid[-1])
        step = max(1.0, control_set.diameter)
        markers = base + step * np.arange(1, max(ks) + 1)
    else:
        markers = np.asarray(completion.terminal_visits, dtype=float)
        if markers.size < max(ks):
            raise ConfigError(
                f"completion exposes {markers.size} visit markers, need {max(ks)}"
            )
    u_T = completion.u_terminal
    T = stc.horizon

    members: list[ApproxMember] = []
    sup_sigma: list[Callable[[np.ndarray], np.ndarray]] = []
    if mode == "clip":
        if path is None:
            raise PreconditionError("clip mode needs the original control path")
        if path.jumps:
            raise PreconditionError("clip mode needs an absolutely continuous control")
        for k in ks:
            t_k = float(completion.partition[k]) if k < completion.partition.size else float(
                completion.partition[-1]
            )
            member = _clip_member(
                path, dyn, x0, ordinary, k, t_k, float(markers[k - 1]), grid, markers[:k]
            )
            members.append(member)
    elif mode == "mollified":
        ladder_cache: dict[float, MollifiedClock] = {}
        sub = grid[::subsample]
        if sub[-1] != grid[-1]:
            sub = np.append(sub, grid[-1])
        phi0_ref = np.interp(sub, grid, stc.phi0)
        stc_sub = SpaceTimeControl(
            grid=sub,
            phi0=phi0_ref,
            phi=stc.phi_at(sub),
            psi=np.zeros((sub.size, 0)),
            horizon=T,
            descriptor=stc.descriptor,
            feasible=True,
        )
        xi_sub = integrate_spacetime(dyn, x0, stc_sub)
        h_prev = 0.0
        for k in ks:
            s_k = float(markers[k - 1])
            win = sub <= s_k + 1e-12
            target = 1.0 / k
            h = max(2.0, 2.0 * h_prev, float(scale_schedule(k)))
            h = min(2.0 ** math.ceil(math.log2(h)), float(scale_cap))
            certified = False
            while True:
                if h not in ladder_cache:
                    ladder_cache[h] = mollify_clock(
                        completion.clock, h, mollifier, coarsen=max(1, subsample)
                    )
                mol = ladder_cache[h]
                phi0_h = np.asarray(mol.phi0_at(np.minimum(sub, _phi0_domain(mol))))
                eps_clock = float(np.max(np.abs(phi0_h[win] - phi0_ref[win])))
                xi_h = _integrate_with_clock(dyn, x0, stc_sub, phi0_h)
                eps_traj = float(
                    np.max(np.linalg.norm(xi_h.states[win] - xi_sub.states[win], axis=1))
                )
                if eps_clock <= target and eps_traj <= target:
                    certified = True
                    break
                if h >= scale_cap:
                    break
                h *= 2.0
            mol_fine = mollify_clock(completion.clock, h, mollifier, coarsen=1)
            member = _mollified_member(
                mol_fine, completion, dyn, x0, ordinary, k, s_k, eps_clock, eps_traj, certified, u_T
            )
            members.append(member)
            sup_sigma.append(lambda t, m=mol_fine: np.asarray(m.sigma_at(t)))
            h_prev = h
    else:
        raise ConfigError(f"unknown mode {mode!r}")

    chordvar = stc.chord_variation()

    def envelope(t: float) -> float:
        s_ref = float(completion.clock.at(min(t, float(completion.clock.times[-1]))))
        s_env = s_ref + 1.0
        for fn in sup_sigma:
            tt = min(t, T * (1.0 - 1e-12))
            s_env = max(s_env, float(fn(np.asarray(tt))))
        s_env = min(s_env, float(grid[-1]))
        return float(np.interp(s_env, grid, chordvar)) + control_set.bridge_constant * control_set.diameter

    x_sup = float(np.max(np.abs(limit.traj.states)))
    xi_sup = float(np.max(np.abs(xi.states)))
    return ApproxSequence(
        mode=mode,
        members=tuple(members),
        markers=markers,
        u_terminal=tuple(u_T),
        limit=limit,
        xi=xi,
        completion=completion,
        variation_envelope=envelope,
        equibound=_r_prime(dyn, x_sup, xi_sup, T, control_set),
    )


def _phi0_domain(mol: MollifiedClock) -> float:
    return math.inf if mol.tail is not None else float(mol.values[-1])


def _integrate_with_clock(
    dyn: Dynamics, x0: Sequence[float], stc: SpaceTimeControl, phi0_h: np.ndarray
) -> Trajectory:
    """Integrate the space-time system with the original phi but the
    smoothed time component."""
    swapped = SpaceTimeControl(
        grid=stc.grid,
        phi0=np.maximum.accumulate(phi0_h),
        phi=stc.phi,
        psi=stc.psi,
        horizon=stc.horizon,
        descriptor=stc.descriptor,
        feasible=True,
    )
    return integrate_spacetime(dyn, x0, swapped, waive_feasibility=True)


def _mollified_member(
    mol: MollifiedClock,
    completion: CompletionResult,
    dyn: Dynamics,
    x0: Sequence[float],
    ordinary: OrdinaryControl | None,
    k: int,
    s_k: float,
    eps_clock: float,
    eps_traj: float,
    certified: bool,
    u_T: Sequence[float],
) -> ApproxMember:
    stc = completion.stc
    grid = stc.grid
    T = stc.horizon
    if s_k <= grid[-1] + 1e-12:
        s_nodes = grid[grid <= s_k + 1e-12]
        if abs(s_nodes[-1] - s_k) > 1e-9:
            s_nodes = np.append(s_nodes, s_k)
        u_vals = stc.phi_at(s_nodes)
    else:
        extra = np.linspace(float(grid[-1]), s_k, 65)
        s_nodes = np.concatenate((grid, extra[1:]))
        u_vals = stc.phi_at(np.minimum(s_nodes, grid[-1]))
    t_nodes = np.asarray(mol.phi0_at(s_nodes))
    keep = np.concatenate(([True], np.diff(t_nodes) > 1e-15))
    t_nodes = t_nodes[keep]
    u_vals = u_vals[keep]
    tau = float(t_nodes[-1])
    if tau >= T:
        raise ConfigError("smoothed clock reached the horizon before the marker")
    # straight bridge from phi(s_k) to the terminal value on (tau, T]
    n_b = 32
    tb = np.linspace(tau, T, n_b + 1)[1:]
    w = (tb - tau) / (T - tau)
    ub = u_vals[-1][None, :] + w[:, None] * (np.asarray(u_T)[None, :] - u_vals[-1][None, :])
    t_all = np.concatenate((t_nodes, tb))
    u_all = np.concatenate((u_vals, ub))
    traj = caratheodory_sampled(dyn, x0, t_all, u_all, ordinary)
    return ApproxMember(
        k=k,
        scale=mol.scale,
        certified=certified,
        clock_error=eps_clock,
        traj_error=eps_traj,
        marker=s_k,
        t_nodes=t_all,
        u_nodes=u_all,
        traj=traj,
    )


def _clip_member(
    path: ControlPath,
    dyn: Dynamics,
    x0: Sequence[float],
    ordinary: OrdinaryControl | None,
    k: int,
    t_k: float,
    s_k: float,
    grid: np.ndarray,
    arc_markers: np.ndarray = np.empty(0),
) -> ApproxMember:
    import dataclasses

    from .paths import AffineSegment, AnalyticSegment, ControlPath as CP

    if t_k >= path.horizon - 1e-12:
        # degenerate clip: the member replays the control itself
        t_k = path.horizon
        clipped = path
    else:
        u_k = path.value(t_k)
        head_bps = [b for b in path.breakpoints if b < t_k]
        segs = []
        for i, b in enumerate(head_bps):
            seg = path.segments[i]
            if isinstance(seg, AnalyticSegment) and seg.divergent_end:
                # restricted to [0, t_k] the piece has finite variation
                seg = dataclasses.replace(seg, divergent_end=False)
            segs.append(seg)
        bps = tuple(head_bps) + (t_k, path.horizon)
        segs.append(AffineSegment(u_k, u_k))
        clipped = CP(
            horizon=path.horizon,
            breakpoints=bps,
            segments=tuple(segs),
            control_set=path.control_set,
            jumps=(),
        )
    ds = float(np.median(np.diff(grid))) if grid.size > 1 else 1e-3
    arc_total = t_k + clipped.variation_to(t_k)
    n = max(64, math.ceil(arc_total / ds))
    levels = np.linspace(0.0, arc_total, n + 1)
    lo = np.zeros_like(levels)
    hi = np.full_like(levels, t_k)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        vals = np.array([m + clipped.variation_to(float(m)) for m in mid])
        below = vals < levels
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    t_head = 0.5 * (lo + hi)
    t_head[0], t_head[-1] = 0.0, t_k
    # place the arc-marker times on the grid so certificate residuals are
    # read at integrated nodes rather than interpolated between them
    taus = []
    for level in np.asarray(arc_markers, dtype=float):
        lo_m, hi_m = 0.0, t_k
        if level <= arc_total:
            for _ in range(80):
                mid = 0.5 * (lo_m + hi_m)
                if mid + clipped.variation_to(mid) < level:
                    lo_m = mid
                else:
                    hi_m = mid
            taus.append(0.5 * (lo_m + hi_m))
    t_grid = np.unique(
        np.concatenate((t_head, np.asarray(taus), np.linspace(t_k, path.horizon, 33)))
    )
    traj = caratheodory(dyn, x0, clipped, ordinary, grid=t_grid)
    u_nodes = np.array([clipped.value(float(t)) for t in t_grid])
    return ApproxMember(
        k=k,
        scale=None,
        certified=True,
        clock_error=0.0,
        traj_error=0.0,
        marker=s_k,
        t_nodes=t_grid,
        u_nodes=u_nodes,
        traj=traj,
        path=clipped,
    )


# ---------------------------------------------------------------------------
# certificates and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateRow:
    j: int
    marker: float
    solved: tuple[tuple[int, float], ...]  # (k, tau_k^j)
    residuals: tuple[tuple[int, float], ...]
    inapplicable: tuple[int, ...]

    @property
    def worst(self) -> float:
        return max((r for _, r in self.residuals), default=math.nan)


@dataclass(frozen=True)
class CertificateReport:
    rows: tuple[CertificateRow, ...]
    monotone: bool
    bounded: bool | None
    passed: bool

    def __str__(self) -> str:
        lines = [f"terminal certificate: {'PASS' if self.passed else 'FAIL'}"]
        for row in self.rows:
            lines.append(
                f"  j={row.j} marker={row.marker:.6f} worst-residual={row.worst:.3e}"
                + (f" inapplicable k: {list(row.inapplicable)}" if row.inapplicable else "")
            )
        return "\n".join(lines)


def terminal_certificate(
    seq: ApproxSequence,
    j_list: Sequence[int] | None = None,
    bound: Callable[[int], float] | None = None,
    bound_floor: float = 1e-6,
    monotone_slack: float = 1e-9,
) -> CertificateReport:
    """Check that the approximating runs anchor their terminal pair along
    the arc-length markers.

    For each j the time tau solving t + Var_[0,t](u_k) = marker_j is found
    by monotone bisection and the distance between (x_k, u_k)(tau) and the
    terminal pair is recorded; cells whose marker exceeds the member's
    total arc are reported inapplicable. PASS requires the per-j worst
    residual to be nonincreasing (within slack) and, when a bound schedule
    is given, dominated by bound(j) + bound_floor.
    """
    ks = [m.k for m in seq.members]
    js = sorted(j_list) if j_list is not None else ks
    rows: list[CertificateRow] = []
    for j in js:
        if j > seq.markers.size or not any(k > j for k in ks):
            continue
        level = float(seq.markers[j - 1])
        solved: list[tuple[int, float]] = []
        residuals: list[tuple[int, float]] = []
        inapplicable: list[int] = []
        for member in seq.members:
            if member.k <= j:
                continue
            tau = member.solve_arc(level)
            if tau is None or tau >= member.traj.grid[-1]:
                inapplicable.append(member.k)
                continue
            solved.append((member.k, tau))
            x_tau = member.traj.at(tau)
            u_tau = member.u_at(tau)
            xt = member.terminal_state
            ut = member.terminal_control
            resid = math.sqrt(
                float(np.sum((x_tau - xt) ** 2)) + float(np.sum((u_tau - ut) ** 2))
            )
            residuals.append((member.k, resid))
        rows.append(
            CertificateRow(
                j=j,
                marker=level,
                solved=tuple(solved),
                residuals=tuple(residuals),
                inapplicable=tuple(inapplicable),
            )
        )
    worsts = [r.worst for r in rows if r.residuals]
    monotone = all(b <= a + monotone_slack for a, b in zip(worsts, worsts[1:]))
    bounded: bool | None = None
    if bound is not None:
        bounded = all(
            row.worst <= bound(row.j) + bound_floor for row in rows if row.residuals
        )
    # the residuals must actually approach zero, not merely avoid growing
    decayed = bool(worsts) and worsts[-1] <= max(bound_floor, 0.5 * worsts[0])
    passed = monotone and decayed and (bounded is not False)
    return CertificateReport(rows=tuple(rows), monotone=monotone, bounded=bounded, passed=passed)


@dataclass(frozen=True)
class WellposednessReport:
    ks: tuple[int, ...]
    sup_errors: tuple[float, ...]
    terminal_errors: tuple[float, ...]
    variations: tuple[float, ...]
    monotone: bool
    final_below: bool
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.monotone and self.final_below

    def __str__(self) -> str:
        lines = [f"well-posedness: {'PASS' if self.passed else 'FAIL'} (tol {self.tolerance:.1e})"]
        for k, e, te in zip(self.ks, self.sup_errors, self.terminal_errors):
            lines.append(f"  k={k:3d} sup-error={e:.6e} terminal-error={te:.3e}")
        return "\n".join(lines)


def wellposedness_report(
    seq: ApproxSequence,
    t_grid: np.ndarray,
    tolerance: float = 1e-3,
    monotone_slack: float = 0.0,
) -> WellposednessReport:
    """Sup error of each member against the limit solution on the test grid,
    with the horizon endpoint included via the terminal records."""
    tg = np.asarray(t_grid, dtype=float)
    tg = tg[tg < seq.limit.horizon]
    x_ref = seq.limit.at(tg)
    x_T = np.asarray(seq.limit.terminal_state)
    sups: list[float] = []
    terms: list[float] = []
    variations: list[float] = []
    for member in seq.members:
        xm = member.traj.at(np.minimum(tg, member.traj.grid[-1]))
        err = float(np.max(np.linalg.norm(xm - x_ref, axis=1)))
        term = float(np.linalg.norm(member.terminal_state - x_T))
        sups.append(max(err, term))
        terms.append(term)
        t_probe = float(tg[-1]) if tg.size else 0.0
        variations.append(float(member.arc_value(t_probe)) - t_probe)
    monotone = all(b <= a + monotone_slack for a, b in zip(sups, sups[1:]))
    final_below = bool(sups) and sups[-1] <= tolerance
    return WellposednessReport(
        ks=tuple(m.k for m in seq.members),
        sup_errors=tuple(sups),
        terminal_errors=tuple(terms),
        variations=tuple(variations),
        monotone=monotone,
        final_below=final_below,
        tolerance=tolerance,
    )
