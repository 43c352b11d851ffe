"""Verification suite: closed-form oracles and property sweeps.

Each check returns a CheckResult with deterministic values only (wall-clock
timings are reported separately and never enter the report text, so two
runs with the same configuration produce byte-identical reports).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import scenarios as sc
from .approx import build_approx_sequence, mollify_clock, terminal_certificate, wellposedness_report
from .completion import build_completion, complete_segment, verify_feasibility
from .ode import caratheodory, consistency_check, integrate_spacetime
from .paths import UNIT_DISC, Clock, ClockJump, ControlPath, piecewise_affine

RK_TOL = 1e-7


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    values: dict[str, float] = field(default_factory=dict)
    notes: str = ""
    runtime: float = 0.0  # seconds; excluded from report text

    def report_lines(self) -> list[str]:
        lines = [f"check {self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for key in sorted(self.values):
            lines.append(f"  {key} = {self.values[key]!r}")
        if self.notes:
            lines.append(f"  note: {self.notes}")
        return lines


def _timed(fn: Callable[[], tuple[bool, dict, str]], name: str) -> CheckResult:
    t0 = time.perf_counter()
    passed, values, notes = fn()
    return CheckResult(name=name, passed=passed, values=values, notes=notes, runtime=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------


def check_spiral_time_oracle(T: float = 1.0, t_end: float = 0.9, cells: int = 2**14) -> CheckResult:
    """Time-domain run under the spiral control against exp(-t/(T(T-t)))."""

    def run() -> tuple[bool, dict, str]:
        u = sc.spiral_control(T)
        dyn = sc.example_dynamics()
        grid = np.linspace(0.0, t_end, cells + 1)
        oracle = np.exp(-grid / (T * (T - grid)))
        errs = {}
        for label, sub in (("default", 1), ("refined_twice", 4)):
            traj = caratheodory(dyn, sc.X0, u, grid=grid, substeps=sub)
            errs[label] = float(np.max(np.abs(traj.states[:, 2] - oracle)))
        passed = errs["default"] <= 1e-4 and errs["refined_twice"] <= 1e-6
        return passed, {
            "max_err_default": errs["default"],
            "max_err_refined_twice": errs["refined_twice"],
        }, ""

    return _timed(run, "spiral-time-oracle")


def check_deadline_circle_oracle(T: float = 1.0, span: float = 20.0, cells_pow: int = 16) -> CheckResult:
    """Pseudo-time run of the deadline-circle control against exp(T - s) and
    the truncated payoff against 1 - exp(-cut)."""

    def run() -> tuple[bool, dict, str]:
        stc = sc.deadline_circle(T, T + span, ds=(T + span) / 2**cells_pow)
        dyn = sc.example_dynamics()
        xi = integrate_spacetime(dyn, sc.X0, stc)
        s = xi.grid
        tail = s >= T
        err = float(np.max(np.abs(xi.states[tail, 2] - np.exp(-(s[tail] - T)))))
        cuts = [T + span / 4.0, T + span / 2.0, T + span]
        payoffs = [sc.extended_payoff(stc, xi, c) for c in cuts]
        target = 1.0 - math.exp(-span)
        pay_err = abs(payoffs[-1] - target)
        monotone = payoffs[0] < payoffs[1] < payoffs[2]
        passed = err <= 1e-6 and pay_err <= 1e-6 and monotone
        return passed, {
            "max_xi3_err": err,
            "payoff_at_cut": payoffs[-1],
            "payoff_err": pay_err,
            "payoff_quarter": payoffs[0],
            "payoff_half": payoffs[1],
        }, ""

    return _timed(run, "deadline-circle-oracle")


def check_payoff_bracket(T: float = 1.0, ks: Sequence[int] = (5, 10, 20)) -> CheckResult:
    """Late-burst controls: payoff inside [1, 1 + 3/k] and equal to the
    cost-state terminal value."""

    def run() -> tuple[bool, dict, str]:
        values: dict[str, float] = {}
        passed = True
        for k in ks:
            J, x4 = sc.late_spiral_cost_pair(T, k)
            values[f"J_k{k}"] = J
            values[f"match_k{k}"] = abs(J - x4)
            ok = (1.0 - 1e-4 <= J <= 1.0 + 3.0 / k + 1e-4) and abs(J - x4) <= 1e-6
            passed = passed and ok
        return passed, values, ""

    return _timed(run, "payoff-bracket")


def _random_bv_path(rng: np.random.Generator, max_jumps: int = 5) -> ControlPath:
    n_nodes = int(rng.integers(3, 7))
    times = np.concatenate(([0.0], np.sort(rng.uniform(0.05, 0.95, n_nodes - 2)), [1.0]))
    while np.any(np.diff(times) < 1e-3):
        times = np.concatenate(([0.0], np.sort(rng.uniform(0.05, 0.95, n_nodes - 2)), [1.0]))

    def draw() -> tuple[float, float]:
        v = rng.normal(size=2)
        v *= rng.uniform() ** 0.5 / np.linalg.norm(v)
        return (float(v[0]), float(v[1]))

    values = [draw() for _ in times]
    n_j = int(rng.integers(0, max_jumps + 1))
    jump_at = set(rng.choice(np.arange(1, len(times)), size=min(n_j, len(times) - 1), replace=False).tolist())
    rights = [draw() if i in jump_at else None for i in range(len(times))]
    return piecewise_affine(times, values, UNIT_DISC, right_values=rights)


def check_segment_bounds(count: int = 50, seed: int = 20260808) -> CheckResult:
    """Randomized covered intervals: the visit/end markers sit between the
    sharp lower bound and twice-variation upper bound, and the curve covers
    the control graph."""

    def run() -> tuple[bool, dict, str]:
        rng = np.random.default_rng(seed)
        worst_lower = 0.0
        worst_upper = 0.0
        worst_cover = 0.0
        passed = True
        for _ in range(count):
            path = _random_bv_path(rng)
            target = rng.normal(size=2)
            target *= rng.uniform() ** 0.5 / np.linalg.norm(target)
            seg = complete_segment(path, (0.0, 1.0), tuple(target), ds=2e-3)
            lo = seg.lower_bound
            up = seg.upper_bound(path.control_set.bridge_constant)
            worst_lower = max(worst_lower, lo - seg.s_visit)
            worst_upper = max(worst_upper, seg.s_visit - seg.s_end, seg.s_end - up)
            if lo - seg.s_visit > 1e-9 or seg.s_visit > seg.s_end + 1e-9 or seg.s_end > up + 1e-9:
                passed = False
            ts = np.linspace(0.0, 1.0, 101)
            pts = np.array([(t, *path.value(float(t))) for t in ts])
            curve = np.column_stack((seg.phi0, seg.phi))
            d2 = ((pts[:, None, :] - curve[None, :, :]) ** 2).sum(axis=2)
            cover = float(np.sqrt(d2.min(axis=1).max()))
            worst_cover = max(worst_cover, cover)
            if cover > 4e-3:
                passed = False
        return passed, {
            "worst_lower_violation": worst_lower,
            "worst_upper_violation": worst_upper,
            "worst_cover_distance": worst_cover,
        }, f"{count} randomized covered intervals"

    return _timed(run, "interval-bounds")


def check_arc_identity(T: float = 1.0, seed: int = 4, extra: Sequence = ()) -> CheckResult:
    """Unit-speed arc identity s = phi0(s) + Var(phi) on every completion
    produced here, at relative tolerance 1e-6."""

    def run() -> tuple[bool, dict, str]:
        rng = np.random.default_rng(seed)
        worst = 0.0
        spiral = sc.spiral_control(T)
        completions = [
            build_completion(spiral, s_max=T + 50.0),
            build_completion(
                spiral,
                partition=[0.0] + [sc.spiral_clip_time(T, j) for j in range(1, 9)],
                s_max=T + 56.0,
            ),
            build_completion(
                piecewise_affine(
                    [0.0, 0.5, 1.0],
                    [(1.0, 0.0), (0.2, 0.1), (0.0, 0.8)],
                    UNIT_DISC,
                    right_values=[None, (-0.4, -0.2), None],
                ),
                partition=[0.0, 1.0],
            ),
        ]
        for _ in range(5):
            completions.append(build_completion(_random_bv_path(rng), partition=[0.0, 1.0]))
        completions.extend(extra)
        for comp in completions:
            rep = verify_feasibility(comp.stc, tol=1e-6)
            worst = max(worst, rep.max_ids_residual, rep.max_speed_residual)
            if not rep.passed:
                return False, {"worst_residual": worst}, "a completion failed feasibility"
        return True, {"worst_residual": worst}, f"{len(completions)} completions checked"

    return _timed(run, "arc-identity")


def check_consistency(T: float = 1.0, count: int = 20, seed: int = 99) -> CheckResult:
    """Clock-composed versus direct time-domain runs for randomized
    absolutely continuous controls; tolerance 5x the step-refinement gate."""

    def run() -> tuple[bool, dict, str]:
        rng = np.random.default_rng(seed)
        dyn = sc.example_dynamics()
        worst = 0.0
        for _ in range(count):
            n_nodes = int(rng.integers(3, 6))
            times = np.concatenate(([0.0], np.sort(rng.uniform(0.1, 0.9, n_nodes - 2)), [T]))
            vals = [(1.0, 0.0)]
            for _ in range(len(times) - 1):
                v = rng.normal(size=2)
                v *= rng.uniform() ** 0.5 / np.linalg.norm(v)
                vals.append((float(v[0]), float(v[1])))
            u = piecewise_affine(times, vals, UNIT_DISC)
            # pseudo-time resolution fine enough that composing through the
            # clock interpolates well below the deviation gate
            comp = build_completion(u, partition=[0.0, T], ds=2.5e-4)
            dev = consistency_check(dyn, sc.X0, u, None, comp, 0.9 * T, cells=2**11)
            worst = max(worst, dev)
        return worst <= 5.0 * RK_TOL, {"worst_deviation": worst}, f"{count} controls"

    return _timed(run, "clock-consistency")


def _curved_jump_clock(T: float = 1.0) -> Clock:
    ts = np.linspace(0.0, T, 2001)
    vs = np.where(ts < 0.5, ts + ts**2, ts + ts**2 + 1.0)
    jump = ClockJump(time=0.5, s_lo=0.75, s_hi=1.75, s_at=1.75)
    return Clock(horizon=T, times=ts, values=vs, jumps=(jump,), finite_limit=float(T + T * T + 1.0))


def check_mollification(
    T: float = 1.0,
    seed: int = 5,
    pairs: int = 1000,
    scales: Sequence[float] = (4.0, 8.0, 16.0, 32.0),
) -> CheckResult:
    """Slope bound, anchor equalities and jump-midpoint convergence of the
    smoothed clocks, on the jump clock and the spiral clock."""

    def run() -> tuple[bool, dict, str]:
        rng = np.random.default_rng(seed)
        values: dict[str, float] = {}
        passed = True

        clock = _curved_jump_clock(T)
        errs = []
        for h in scales:
            mol = mollify_clock(clock, h)
            raw = float(np.interp(0.5, mol.times, mol.raw))
            errs.append(abs(raw - 1.25))
            t2 = np.sort(rng.uniform(0.0, T - 1e-9, (pairs, 2)), axis=1)
            gaps = np.asarray(mol.sigma_at(t2[:, 1])) - np.asarray(mol.sigma_at(t2[:, 0]))
            margin = float(np.min(gaps - (t2[:, 1] - t2[:, 0])))
            values[f"slope_margin_h{int(h)}"] = margin
            values[f"repair_h{int(h)}"] = mol.repair_max
            passed = passed and margin >= -1e-10
        ratio = (scales[-1] / scales[-2]) ** 2
        extrap = abs((ratio * errs[-1] - errs[-2]) / (ratio - 1.0))
        values[f"midpoint_err_h{int(scales[-1])}"] = errs[-1]
        values["midpoint_err_extrapolated"] = extrap
        passed = passed and errs[-1] <= 1e-3 and extrap <= 1e-3

        spiral = sc.spiral_control(T)
        comp = build_completion(
            spiral,
            partition=[0.0] + [sc.spiral_clip_time(T, j) for j in range(1, 8)],
            s_max=T + 48.0,
        )
        mol2 = mollify_clock(comp.clock, 16.0)
        anchors = comp.clock.partition[(comp.clock.partition > 0) & (comp.clock.partition < mol2.times[-1])]
        anchor_err = float(
            np.max(np.abs(np.asarray(mol2.sigma_at(anchors)) - np.asarray(comp.clock.at(anchors))))
        )
        values["anchor_err"] = anchor_err
        t_max = float(mol2.times[-1])
        t2 = np.sort(rng.uniform(0.0, t_max, (pairs, 2)), axis=1)
        gaps = np.asarray(mol2.sigma_at(t2[:, 1])) - np.asarray(mol2.sigma_at(t2[:, 0]))
        margin2 = float(np.min(gaps - (t2[:, 1] - t2[:, 0])))
        values["slope_margin_spiral"] = margin2
        values["repair_spiral"] = mol2.repair_max
        passed = passed and anchor_err == 0.0 and margin2 >= 0.0
        return passed, values, ""

    return _timed(run, "clock-smoothing")


def check_wellposedness(
    T: float = 1.0, ks: Sequence[int] = (4, 8, 16, 32), tolerance: float = 1e-3
) -> CheckResult:
    """Approximating runs of the spiral solution: sup-grid errors decrease
    and end below the certification tolerance; the terminal certificate
    passes with the winding decay bound."""

    def run() -> tuple[bool, dict, str]:
        dyn = sc.example_dynamics()
        u = sc.spiral_control(T)
        k_max = max(ks)
        part = [0.0] + [sc.spiral_clip_time(T, j) for j in range(1, k_max + 2)]
        s_max = part[-1] + 2.0 * math.pi * (k_max + 1) + 1.0
        comp = build_completion(u, partition=part, s_max=s_max)
        values: dict[str, float] = {}

        seq = build_approx_sequence(comp, dyn, sc.X0, ks, UNIT_DISC, mode="mollified", path=u)
        t_grid = np.linspace(0.0, 0.8 * T, 81)
        rep = wellposedness_report(seq, t_grid, tolerance=tolerance)
        for k, e in zip(rep.ks, rep.sup_errors):
            values[f"sup_err_k{k}"] = e
        values["terminal_err_final"] = rep.terminal_errors[-1]
        ok_seq = rep.passed and all(m.certified for m in seq.members)

        cert_ks = [j for j in (1, 2, 4, 8) if j <= max(ks)]
        clip = build_approx_sequence(comp, dyn, sc.X0, cert_ks, UNIT_DISC, mode="clip", path=u)

        def bound(j: int) -> float:
            tj = sc.spiral_clip_time(T, j)
            return math.exp(-tj / (T * (T - tj)))

        cert = terminal_certificate(clip, bound=bound, bound_floor=1e-6)
        for row in cert.rows:
            values[f"cert_residual_j{row.j}"] = row.worst
        passed = ok_seq and cert.passed
        return passed, values, "mollified sequence + clipped certificate"

    return _timed(run, "wellposedness")


def check_winding_floor(T: float = 1.0, count: int = 50, seed: int = 17) -> CheckResult:
    """Circle-valued runs from (1, 0): the third state at the horizon
    dominates exp(-variation) up to 1e-8."""

    def run() -> tuple[bool, dict, str]:
        rng = np.random.default_rng(seed)
        dyn = sc.example_dynamics()
        worst = 0.0
        for _ in range(count):
            n_nodes = int(rng.integers(2, 6))
            times = np.concatenate(([0.0], np.sort(rng.uniform(0.1, 0.9, n_nodes - 1)), [T]))
            angles = np.concatenate(([0.0], rng.uniform(-2.5 * math.pi, 2.5 * math.pi, n_nodes)))
            u = sc.circle_path(times, angles)
            traj = caratheodory(dyn, sc.X0, u, cells=2**12)
            gap = sc.variation_lower_bound_gap(u, float(traj.states[-1, 2]))
            worst = min(worst, gap)
        return worst >= -1e-8, {"worst_gap": worst}, f"{count} circle controls"

    return _timed(run, "winding-floor")


# ---------------------------------------------------------------------------
# suite
# ---------------------------------------------------------------------------


def run_suite(
    T: float = 1.0,
    segment_count: int = 50,
    consistency_count: int = 20,
    winding_count: int = 50,
    wellposedness_ks: Sequence[int] = (4, 8, 16, 32),
    wellposedness_tol: float = 1e-3,
    payoff_ks: Sequence[int] = (5, 10, 20),
    smoothing_scales: Sequence[float] = (4.0, 8.0, 16.0, 32.0),
    seed: int = 20260808,
) -> list[CheckResult]:
    return [
        check_spiral_time_oracle(T),
        check_deadline_circle_oracle(T),
        check_payoff_bracket(T, payoff_ks),
        check_arc_identity(T, seed=seed + 1),
        check_segment_bounds(segment_count, seed=seed),
        check_consistency(T, consistency_count, seed=seed + 2),
        check_mollification(T, seed=seed + 3, scales=smoothing_scales),
        check_wellposedness(T, wellposedness_ks, tolerance=wellposedness_tol),
        check_winding_floor(T, winding_count, seed=seed + 4),
    ]


def format_report(results: Sequence[CheckResult]) -> str:
    lines = ["verification report"]
    for r in results:
        lines.extend(r.report_lines())
    n_fail = sum(1 for r in results if not r.passed)
    lines.append(f"summary: {len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
