"""Path algebra for impulsive controls.

Controls are piecewise paths into a compact convex control set. Affine
pieces carry their endpoints; analytic pieces carry closed-form evaluators
together with their speed, so total variation on any subinterval is exact
rather than estimated from samples. Monotone clocks and their 1-Lipschitz
pseudo-inverses live here as well.

Conventions: paths are right-continuous at jump times, i.e. the value at a
jump time equals the declared right limit. Variation over [a, b] therefore
counts a jump at b but not a jump at a.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InvariantViolation, PreconditionError

_MEMBERSHIP_TOL = 1e-9
_JOIN_TOL = 1e-7


# ---------------------------------------------------------------------------
# control sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ControlSet:
    """Compact convex control set with straight-segment bridges.

    Supported kinds are axis-aligned boxes, Euclidean balls and convex
    polytopes given by half-spaces. Convexity means any two points are
    joined by the straight segment between them, whose variation equals
    their distance, so the bridging constant is 1.
    """

    kind: str
    dim: int
    center: tuple[float, ...] = ()
    radius: float = 0.0
    lower: tuple[float, ...] = ()
    upper: tuple[float, ...] = ()
    halfspaces: tuple[tuple[float, ...], ...] = ()
    vertices: tuple[tuple[float, ...], ...] = ()
    bridge_constant: float = 1.0

    @staticmethod
    def ball(center: Sequence[float], radius: float) -> "ControlSet":
        if radius <= 0:
            raise InvariantViolation("ball radius must be positive")
        return ControlSet(kind="ball", dim=len(center), center=tuple(map(float, center)), radius=float(radius))

    @staticmethod
    def box(lower: Sequence[float], upper: Sequence[float]) -> "ControlSet":
        lo = tuple(map(float, lower))
        hi = tuple(map(float, upper))
        if len(lo) != len(hi) or any(a > b for a, b in zip(lo, hi)):
            raise InvariantViolation("box bounds must satisfy lower <= upper componentwise")
        return ControlSet(kind="box", dim=len(lo), lower=lo, upper=hi)

    @staticmethod
    def polytope(halfspaces: Sequence[Sequence[float]], vertices: Sequence[Sequence[float]]) -> "ControlSet":
        """Half-spaces are rows (a_1 .. a_d, b) meaning a.u <= b; vertices are
        used for the diameter and must be consistent with the half-spaces."""
        hs = tuple(tuple(map(float, row)) for row in halfspaces)
        vs = tuple(tuple(map(float, v)) for v in vertices)
        if not hs or not vs:
            raise InvariantViolation("polytope needs half-spaces and vertices")
        dim = len(hs[0]) - 1
        out = ControlSet(kind="polytope", dim=dim, halfspaces=hs, vertices=vs)
        for v in vs:
            if not out.contains(v):
                raise InvariantViolation("polytope vertex violates its half-spaces")
        return out

    def contains(self, u: Sequence[float], tol: float = _MEMBERSHIP_TOL) -> bool:
        if len(u) != self.dim:
            return False
        if self.kind == "ball":
            return math.dist(u, self.center) <= self.radius + tol
        if self.kind == "box":
            return all(lo - tol <= x <= hi + tol for x, lo, hi in zip(u, self.lower, self.upper))
        return all(sum(a * x for a, x in zip(row[:-1], u)) <= row[-1] + tol for row in self.halfspaces)

    @property
    def diameter(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.radius
        if self.kind == "box":
            return math.sqrt(sum((hi - lo) ** 2 for lo, hi in zip(self.lower, self.upper)))
        return max(
            math.dist(v, w) for i, v in enumerate(self.vertices) for w in self.vertices[i:]
        )


UNIT_DISC = ControlSet.ball((0.0, 0.0), 1.0)


# ---------------------------------------------------------------------------
# segments and jumps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineSegment:
    """Straight piece between two control values."""

    start: tuple[float, ...]
    end: tuple[float, ...]

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)


@dataclass(frozen=True)
class AnalyticSegment:
    """Closed-form piece.

    ``value`` and ``speed`` are mandatory. ``derivative`` enables exact
    time-domain integration, ``variation`` gives the exact variation on a
    subinterval (quadrature of the speed otherwise), ``winding_primitive``
    (when the piece stays on the unit circle) gives the exact integral of
    u1*du2 - u2*du1. ``divergent_end`` marks unbounded variation as t
    approaches the right endpoint, in which case evaluators are only valid
    strictly inside the piece.
    """

    value: Callable[[float], tuple[float, ...]]
    speed: Callable[[float], float]
    derivative: Callable[[float], tuple[float, ...]] | None = None
    variation: Callable[[float, float], float] | None = None
    winding_primitive: Callable[[float, float], float] | None = None
    divergent_end: bool = False
    family: str = ""
    params: tuple[float, ...] = ()


Segment = AffineSegment | AnalyticSegment


@dataclass(frozen=True)
class Jump:
    time: float
    left: tuple[float, ...]
    right: tuple[float, ...]

    @property
    def magnitude(self) -> float:
        return math.dist(self.left, self.right)


def _simpson_speed(seg: AnalyticSegment, a: float, b: float, panels: int = 256) -> float:
    """Composite Simpson quadrature of a segment's declared speed."""
    if b <= a:
        return 0.0
    n = 2 * panels
    h = (b - a) / n
    total = seg.speed(a) + seg.speed(b)
    for i in range(1, n):
        total += (4.0 if i % 2 else 2.0) * seg.speed(a + i * h)
    return total * h / 3.0


# ---------------------------------------------------------------------------
# control paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ControlPath:
    """Piecewise control path u : [0, T] -> U with declared jump structure.

    ``breakpoints`` has K+1 strictly increasing entries starting at 0 and
    ending at T; ``segments`` has K entries, one per interval. Jumps may
    only sit at interior breakpoints or at T, and their left/right values
    must match the adjacent segment limits.
    """

    horizon: float
    breakpoints: tuple[float, ...]
    segments: tuple[Segment, ...]
    control_set: ControlSet
    jumps: tuple[Jump, ...] = ()
    terminal_value: tuple[float, ...] | None = None
    _seg_var: tuple[float, ...] = field(default=(), repr=False)
    _cum_var: tuple[float, ...] = field(default=(), repr=False)
    _jump_times: tuple[float, ...] = field(default=(), repr=False)
    _cum_jump: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        T = self.horizon
        bp = self.breakpoints
        if T <= 0:
            raise InvariantViolation("horizon must be positive")
        if len(bp) != len(self.segments) + 1:
            raise InvariantViolation("need one segment per breakpoint interval")
        if bp[0] != 0.0 or abs(bp[-1] - T) > 1e-12:
            raise InvariantViolation("breakpoints must run from 0 to the horizon")
        if any(b1 >= b2 for b1, b2 in zip(bp, bp[1:])):
            raise InvariantViolation("breakpoints must be strictly increasing")
        jt = [j.time for j in self.jumps]
        if any(t1 >= t2 for t1, t2 in zip(jt, jt[1:])):
            raise InvariantViolation("jumps must be ordered by time")
        interior = set(bp[1:])
        for j in self.jumps:
            if j.time not in interior:
                raise InvariantViolation(f"jump at {j.time} is not at a breakpoint")
        self._check_joins()
        self._check_membership()
        sv, cv = self._segment_variations()
        object.__setattr__(self, "_seg_var", sv)
        object.__setattr__(self, "_cum_var", cv)
        jts = tuple(j.time for j in self.jumps)
        cj = []
        acc = 0.0
        for j in self.jumps:
            acc += j.magnitude
            cj.append(acc)
        object.__setattr__(self, "_jump_times", jts)
        object.__setattr__(self, "_cum_jump", tuple(cj))

    # -- structure checks ---------------------------------------------------

    def _seg_left_limit(self, i: int) -> tuple[float, ...]:
        seg = self.segments[i]
        if isinstance(seg, AffineSegment):
            return seg.end
        if seg.divergent_end:
            if self.terminal_value is None:
                raise InvariantViolation("divergent segment needs a declared terminal value")
            return self.terminal_value
        return seg.value(self.breakpoints[i + 1])

    def _seg_right_limit(self, i: int) -> tuple[float, ...]:
        seg = self.segments[i]
        if isinstance(seg, AffineSegment):
            return seg.start
        return seg.value(self.breakpoints[i])

    def _check_joins(self) -> None:
        jump_at = {j.time: j for j in self.jumps}
        for i in range(len(self.segments)):
            t = self.breakpoints[i + 1]
            left = self._seg_left_limit(i)
            j = jump_at.get(t)
            if i + 1 < len(self.segments):
                right = self._seg_right_limit(i + 1)
            elif j is not None:
                right = j.right
            else:
                right = left
            if j is None:
                if math.dist(left, right) > _JOIN_TOL:
                    raise InvariantViolation(f"segments disagree at t={t} without a declared jump")
            else:
                if math.dist(j.left, left) > _JOIN_TOL or math.dist(j.right, right) > _JOIN_TOL:
                    raise InvariantViolation(f"jump at t={t} does not match adjacent segment limits")

    def _check_membership(self, samples_per_segment: int = 17) -> None:
        U = self.control_set
        for i, seg in enumerate(self.segments):
            if isinstance(seg, AffineSegment):
                # convexity: endpoint membership covers the whole piece
                if not (U.contains(seg.start) and U.contains(seg.end)):
                    raise DomainError("affine segment leaves the control set")
            else:
                a, b = self.breakpoints[i], self.breakpoints[i + 1]
                hi = b if not seg.divergent_end else a + 0.999 * (b - a)
                for k in range(samples_per_segment):
                    t = a + (hi - a) * k / (samples_per_segment - 1)
                    if not U.contains(seg.value(t)):
                        raise DomainError(f"control value at t={t} leaves the control set")
        for j in self.jumps:
            if not (U.contains(j.left) and U.contains(j.right)):
                raise DomainError("jump values leave the control set")
        if self.terminal_value is not None and not U.contains(self.terminal_value):
            raise DomainError("terminal value leaves the control set")

    def _segment_variations(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        per = []
        for i, seg in enumerate(self.segments):
            a, b = self.breakpoints[i], self.breakpoints[i + 1]
            if isinstance(seg, AffineSegment):
                per.append(seg.length)
            elif seg.divergent_end:
                per.append(math.inf)
            elif seg.variation is not None:
                per.append(seg.variation(a, b))
            else:
                per.append(_simpson_speed(seg, a, b))
        cum = [0.0]
        for v in per:
            cum.append(cum[-1] + v)
        return tuple(per), tuple(cum)

    # -- basic queries ------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.control_set.dim

    @property
    def divergent(self) -> bool:
        """True when the variation blows up approaching the horizon."""
        return any(isinstance(s, AnalyticSegment) and s.divergent_end for s in self.segments)

    @property
    def initial_value(self) -> tuple[float, ...]:
        return self.value(0.0)

    def _segment_index(self, t: float) -> int:
        if not 0.0 <= t <= self.horizon:
            raise DomainError(f"t={t} outside [0, {self.horizon}]")
        return min(bisect_right(self.breakpoints, t) - 1, len(self.segments) - 1)

    def value(self, t: float) -> tuple[float, ...]:
        """u(t), right-continuous at jumps; at T the declared terminal value wins."""
        if t == self.horizon:
            for j in self.jumps:
                if j.time == t:
                    return j.right
            if self.terminal_value is not None:
                return self.terminal_value
            return self._seg_left_limit(len(self.segments) - 1)
        i = self._segment_index(t)
        seg = self.segments[i]
        if isinstance(seg, AffineSegment):
            a, b = self.breakpoints[i], self.breakpoints[i + 1]
            w = (t - a) / (b - a)
            return tuple(p + w * (q - p) for p, q in zip(seg.start, seg.end))
        return seg.value(t)

    def left_value(self, t: float) -> tuple[float, ...]:
        for j in self.jumps:
            if j.time == t:
                return j.left
        return self.value(t)

    def derivative(self, t: float) -> tuple[float, ...]:
        """Exact pointwise derivative inside a segment (right derivative at nodes)."""
        i = self._segment_index(t)
        seg = self.segments[i]
        a, b = self.breakpoints[i], self.breakpoints[i + 1]
        if isinstance(seg, AffineSegment):
            return tuple((q - p) / (b - a) for p, q in zip(seg.start, seg.end))
        if seg.derivative is None:
            raise PreconditionError("analytic segment lacks a derivative evaluator")
        return seg.derivative(t)

    def speed(self, t: float) -> float:
        i = self._segment_index(t)
        seg = self.segments[i]
        if isinstance(seg, AffineSegment):
            return seg.length / (self.breakpoints[i + 1] - self.breakpoints[i])
        return seg.speed(t)

    def has_jump_inside(self, a: float, b: float) -> bool:
        return any(a < j.time <= b for j in self.jumps)

    # -- variation ----------------------------------------------------------

    def variation_to(self, t: float) -> float:
        """Cumulative variation Var_[0,t], counting jumps at times <= t.

        The same accumulation is used for every query, so differences of
        this function are additive over adjacent intervals up to rounding.
        """
        if not 0.0 <= t <= self.horizon:
            raise DomainError(f"t={t} outside [0, {self.horizon}]")
        i = self._segment_index(t)
        seg = self.segments[i]
        a, b = self.breakpoints[i], self.breakpoints[i + 1]
        parts = [self._cum_var[i]]
        if t > a:
            if isinstance(seg, AffineSegment):
                parts.append(seg.length * (t - a) / (b - a))
            elif seg.divergent_end and t >= b:
                return math.inf
            elif seg.variation is not None:
                parts.append(seg.variation(a, t))
            else:
                parts.append(_simpson_speed(seg, a, t))
        k = bisect_right(self._jump_times, t)
        if k:
            parts.append(self._cum_jump[k - 1])
        return math.fsum(parts)


def total_variation(path: ControlPath, interval: tuple[float, float] | None = None) -> float:
    """Total variation of the path over [a, b] (whole horizon by default).

    Exact per-segment sums plus jump magnitudes; returns ``inf`` when the
    interval reaches into a divergent tail. Additive over adjacent
    intervals by construction.
    """
    a, b = interval if interval is not None else (0.0, path.horizon)
    if not (0.0 <= a <= b <= path.horizon):
        raise DomainError(f"interval [{a}, {b}] outside [0, {path.horizon}]")
    ca, cb = path.variation_to(a), path.variation_to(b)
    if math.isinf(cb):
        return math.inf
    return cb - ca


def discontinuity_set(path: ControlPath) -> list[tuple[float, tuple, tuple, tuple]]:
    """Ordered jump records (time, left limit, value, right limit).

    Paths are right-continuous, so the value at a jump equals its right
    limit.
    """
    return [(j.time, j.left, j.right, j.right) for j in path.jumps]


# -- constructors -----------------------------------------------------------


def constant_path(value: Sequence[float], horizon: float, control_set: ControlSet) -> ControlPath:
    v = tuple(map(float, value))
    return ControlPath(
        horizon=horizon,
        breakpoints=(0.0, float(horizon)),
        segments=(AffineSegment(v, v),),
        control_set=control_set,
    )


def piecewise_affine(
    times: Sequence[float],
    values: Sequence[Sequence[float]],
    control_set: ControlSet,
    right_values: Sequence[Sequence[float] | None] | None = None,
) -> ControlPath:
    """Continuous piecewise-affine path, with optional jumps.

    ``values[i]`` is the left limit at ``times[i]``; when ``right_values[i]``
    is given and differs, a jump is declared there and the next piece starts
    from it.
    """
    ts = tuple(map(float, times))
    vals = [tuple(map(float, v)) for v in values]
    rvals = list(right_values) if right_values is not None else [None] * len(ts)
    segments: list[Segment] = []
    jumps: list[Jump] = []
    cur = vals[0]
    if rvals[0] is not None:
        cur = tuple(map(float, rvals[0]))
    for i in range(1, len(ts)):
        left = vals[i]
        segments.append(AffineSegment(cur, left))
        r = rvals[i]
        if r is not None and math.dist(left, tuple(r)) > 0:
            right = tuple(map(float, r))
            jumps.append(Jump(ts[i], left, right))
            cur = right
        else:
            cur = left
    return ControlPath(
        horizon=ts[-1],
        breakpoints=ts,
        segments=tuple(segments),
        control_set=control_set,
        jumps=tuple(jumps),
    )


# ---------------------------------------------------------------------------
# ordinary (non-impulsive) controls
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrdinaryControl:
    """Measurable ordinary control v : [0, T] -> V, evaluated pointwise."""

    horizon: float
    dim: int
    evaluator: Callable[[float], tuple[float, ...]]

    def value(self, t: float) -> tuple[float, ...]:
        if not 0.0 <= t <= self.horizon:
            raise DomainError(f"t={t} outside [0, {self.horizon}]")
        return self.evaluator(t)


def constant_ordinary(horizon: float, value: Sequence[float] = (0.0,)) -> OrdinaryControl:
    v = tuple(map(float, value))
    return OrdinaryControl(horizon=horizon, dim=len(v), evaluator=lambda t: v)


def piecewise_constant_ordinary(
    times: Sequence[float], values: Sequence[Sequence[float]], horizon: float
) -> OrdinaryControl:
    ts = np.asarray(times, dtype=float)
    vs = [tuple(map(float, v)) for v in values]

    def ev(t: float) -> tuple[float, ...]:
        i = int(np.searchsorted(ts, t, side="right")) - 1
        return vs[max(0, min(i, len(vs) - 1))]

    return OrdinaryControl(horizon=horizon, dim=len(vs[0]), evaluator=ev)


# ---------------------------------------------------------------------------
# clocks and pseudo-inverses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClockJump:
    """Plateau of the pseudo-inverse: sigma jumps from s_lo to s_hi at time."""

    time: float
    s_lo: float
    s_hi: float
    s_at: float  # declared sigma(time), inside [s_lo, s_hi]


@dataclass(frozen=True)
class Clock:
    """Monotone map t -> s with slope at least 1 and recorded jump intervals.

    ``times``/``values`` give sigma at sample nodes (the declared value at a
    jump time); interpolation between nodes is linear from the right limit
    of the left node to the left limit of the right node. ``finite_limit``
    is the limit of sigma(t) as t approaches the horizon when finite,
    ``None`` for divergent clocks. ``partition`` optionally records
    continuity anchor times used by piecewise smoothing.
    """

    horizon: float
    times: np.ndarray
    values: np.ndarray
    jumps: tuple[ClockJump, ...] = ()
    finite_limit: float | None = None
    partition: np.ndarray | None = None
    slope_tol: float = 1e-10

    def __post_init__(self) -> None:
        ts = np.ascontiguousarray(np.asarray(self.times, dtype=float))
        vs = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "times", ts)
        object.__setattr__(self, "values", vs)
        if ts.ndim != 1 or ts.shape != vs.shape or ts.size < 2:
            raise InvariantViolation("clock needs matching 1-d sample arrays")
        if ts[0] != 0.0:
            raise InvariantViolation("clock samples must start at t=0")
        if np.any(np.diff(ts) <= 0):
            raise InvariantViolation("clock sample times must be strictly increasing")
        jt = [j.time for j in self.jumps]
        if any(a >= b for a, b in zip(jt, jt[1:])):
            raise InvariantViolation("clock jumps must be ordered and disjoint")
        for j in self.jumps:
            if not (j.s_lo <= j.s_at <= j.s_hi) or j.s_lo >= j.s_hi:
                raise InvariantViolation("clock jump interval is degenerate or misdeclared")
        lo, hi = self._side_values()
        incr = lo[1:] - hi[:-1]
        dt = np.diff(ts)
        if np.any(incr - dt < -self.slope_tol * np.maximum(1.0, np.abs(vs[1:]))):
            raise InvariantViolation("clock violates the unit slope bound")
        ts.flags.writeable = False
        vs.flags.writeable = False

    def _side_values(self) -> tuple[np.ndarray, np.ndarray]:
        """Left/right limits of sigma at each sample node."""
        lo = self.values.copy()
        hi = self.values.copy()
        jmap = {j.time: j for j in self.jumps}
        for i, t in enumerate(self.times):
            j = jmap.get(float(t))
            if j is not None:
                lo[i] = j.s_lo
                hi[i] = j.s_hi
        return lo, hi

    def at(self, t: float | np.ndarray) -> np.ndarray | float:
        """sigma(t); declared values at jump nodes, linear in between."""
        lo, hi = self._side_values()
        tq = np.asarray(t, dtype=float)
        if np.any(tq < 0) or np.any(tq > self.horizon):
            raise DomainError("clock query outside [0, horizon]")
        idx = np.clip(np.searchsorted(self.times, tq, side="right") - 1, 0, len(self.times) - 2)
        t0 = self.times[idx]
        t1 = self.times[idx + 1]
        w = (tq - t0) / (t1 - t0)
        out = hi[idx] * (1.0 - w) + lo[idx + 1] * w
        exact = np.isin(tq, self.times)
        if np.any(exact):
            pos = np.searchsorted(self.times, tq)
            out = np.where(exact, self.values[np.clip(pos, 0, len(self.values) - 1)], out)
        return float(out) if np.isscalar(t) else out

    @property
    def divergent(self) -> bool:
        return self.finite_limit is None


def clock_from_function(
    fn: Callable[[float], float],
    times: Sequence[float],
    horizon: float,
    jumps: Sequence[ClockJump] = (),
    finite_limit: float | None = None,
    partition: Sequence[float] | None = None,
) -> Clock:
    ts = np.asarray(times, dtype=float)
    vs = np.array([fn(float(t)) for t in ts])
    part = None if partition is None else np.asarray(partition, dtype=float)
    return Clock(
        horizon=horizon, times=ts, values=vs, jumps=tuple(jumps), finite_limit=finite_limit, partition=part
    )


@dataclass(frozen=True)
class TimeChange:
    """1-Lipschitz increasing map s -> t, realized by monotone table inversion.

    Plateaus are explicit: on a clock jump interval [s_lo, s_hi] the map is
    constant at the jump time. For clocks with a finite limit S, the map is
    the horizon for all s >= S.
    """

    s_nodes: np.ndarray
    t_nodes: np.ndarray
    horizon: float
    flat_beyond: float | None  # = finite limit S, or None (domain ends at s_nodes[-1])

    def __post_init__(self) -> None:
        s = np.ascontiguousarray(np.asarray(self.s_nodes, dtype=float))
        t = np.ascontiguousarray(np.asarray(self.t_nodes, dtype=float))
        object.__setattr__(self, "s_nodes", s)
        object.__setattr__(self, "t_nodes", t)
        if np.any(np.diff(s) < 0) or np.any(np.diff(t) < -1e-12):
            raise InvariantViolation("time change nodes must be monotone")
        s.flags.writeable = False
        t.flags.writeable = False

    @property
    def s_max(self) -> float:
        return float(self.s_nodes[-1])

    def __call__(self, s: float | np.ndarray) -> np.ndarray | float:
        sq = np.asarray(s, dtype=float)
        if np.any(sq < self.s_nodes[0] - 1e-12):
            raise DomainError("time change queried left of its domain")
        if self.flat_beyond is None and np.any(sq > self.s_nodes[-1] + 1e-9):
            raise DomainError("time change queried beyond its (non-terminated) domain")
        out = np.interp(sq, self.s_nodes, self.t_nodes)
        return float(out) if np.isscalar(s) else out


def clock_pseudo_inverse(clock: Clock) -> TimeChange:
    """The increasing 1-Lipschitz map phi0 with phi0(sigma(t)) = t.

    Jump intervals of the clock become explicit flat plateaus; a finite
    limit S yields phi0(s) = horizon for s >= S.
    """
    lo, hi = clock._side_values()
    s_nodes: list[float] = []
    t_nodes: list[float] = []
    jmap = {j.time: j for j in clock.jumps}
    for i, t in enumerate(clock.times):
        j = jmap.get(float(t))
        if j is not None:
            s_nodes.extend((j.s_lo, j.s_hi))
            t_nodes.extend((float(t), float(t)))
        else:
            s_nodes.append(float(clock.values[i]))
            t_nodes.append(float(t))
    if clock.finite_limit is not None and clock.finite_limit > s_nodes[-1]:
        s_nodes.append(float(clock.finite_limit))
        t_nodes.append(clock.horizon)
    return TimeChange(
        s_nodes=np.asarray(s_nodes),
        t_nodes=np.asarray(t_nodes),
        horizon=clock.horizon,
        flat_beyond=clock.finite_limit,
    )
