"""Acceptance gate: one test per criterion, at the stated tolerances.

Each test prints a single PASS/FAIL line (run pytest with -s or check the
captured output). The heavy checks are the same ones the CLI `verify`
command runs, so the gate and the shipped verification agree by
construction.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

import gcimpulse as gc
from gcimpulse import checks, scenarios as sc

T = 1.0


def _emit(name: str, passed: bool, detail: str) -> None:
    print(f"[acceptance] {name}: {'PASS' if passed else 'FAIL'} ({detail})")


def test_criterion_1_spiral_time_oracle():
    t0 = time.perf_counter()
    result = checks.check_spiral_time_oracle(T=T, t_end=0.9, cells=2**14)
    elapsed = time.perf_counter() - t0
    v = result.values
    detail = (
        f"err_default={v['max_err_default']:.2e} <= 1e-4, "
        f"err_refined={v['max_err_refined_twice']:.2e} <= 1e-6, runtime={elapsed:.1f}s < 5s"
    )
    passed = result.passed and elapsed < 5.0
    _emit("1 spiral time-domain oracle", passed, detail)
    assert v["max_err_default"] <= 1e-4
    assert v["max_err_refined_twice"] <= 1e-6
    assert elapsed < 5.0


def test_criterion_2_spacetime_oracle():
    result = checks.check_deadline_circle_oracle(T=T, span=20.0, cells_pow=16)
    v = result.values
    detail = (
        f"xi3_err={v['max_xi3_err']:.2e} <= 1e-6, payoff_err={v['payoff_err']:.2e} <= 1e-6, "
        f"monotone {v['payoff_quarter']:.6f} < {v['payoff_half']:.6f} < {v['payoff_at_cut']:.6f}"
    )
    _emit("2 pseudo-time oracle + truncated payoff", result.passed, detail)
    assert v["max_xi3_err"] <= 1e-6
    assert abs(v["payoff_at_cut"] - (1.0 - math.exp(-20.0))) <= 1e-6
    assert v["payoff_quarter"] < v["payoff_half"] < v["payoff_at_cut"]


def test_criterion_3_payoff_bracket():
    result = checks.check_payoff_bracket(T=T, ks=(5, 10, 20))
    v = result.values
    detail = ", ".join(
        f"J(k={k})={v[f'J_k{k}']:.6f} in [1-1e-4, 1+3/{k}+1e-4], |J-x4|={v[f'match_k{k}']:.1e}"
        for k in (5, 10, 20)
    )
    _emit("3 payoff bracket + cost-state match", result.passed, detail)
    for k in (5, 10, 20):
        assert 1.0 - 1e-4 <= v[f"J_k{k}"] <= 1.0 + 3.0 / k + 1e-4
        assert v[f"match_k{k}"] <= 1e-6


def test_criterion_4_arc_identity():
    result = checks.check_arc_identity(T=T)
    detail = f"worst relative residual {result.values['worst_residual']:.2e} <= 1e-6"
    _emit("4 unit-speed arc identity", result.passed, detail)
    assert result.passed
    assert result.values["worst_residual"] <= 1e-6


def test_criterion_5_interval_bounds():
    result = checks.check_segment_bounds(count=50, seed=20260808)
    v = result.values
    detail = (
        f"worst lower violation {v['worst_lower_violation']:.2e} <= 1e-9, "
        f"worst upper violation {v['worst_upper_violation']:.2e} <= 1e-9"
    )
    _emit("5 covered-interval bounds (50 randomized)", result.passed, detail)
    assert v["worst_lower_violation"] <= 1e-9
    assert v["worst_upper_violation"] <= 1e-9
    assert result.passed


def test_criterion_6_consistency():
    result = checks.check_consistency(T=T, count=20, seed=20260810)
    detail = f"worst deviation {result.values['worst_deviation']:.2e} <= 5e-7"
    _emit("6 clock consistency (20 randomized)", result.passed, detail)
    assert result.values["worst_deviation"] <= 5.0 * checks.RK_TOL


def test_criterion_7_mollification():
    result = checks.check_mollification(T=T, pairs=1000)
    v = result.values
    worst_margin = min(val for key, val in v.items() if key.startswith("slope_margin"))
    worst_repair = max(val for key, val in v.items() if key.startswith("repair"))
    detail = (
        f"worst slope margin {worst_margin:.2e} >= -1e-10 pre-repair, repair {worst_repair:.1e}, "
        f"anchors exact ({v['anchor_err']!r}), midpoint extrapolated {v['midpoint_err_extrapolated']:.2e} <= 1e-3"
    )
    _emit("7 clock smoothing", result.passed, detail)
    assert worst_margin >= -1e-10
    assert v["anchor_err"] == 0.0
    assert v["midpoint_err_h32"] <= 1e-3
    assert v["midpoint_err_extrapolated"] <= 1e-3
    # post-repair slope violations are exactly zero on stored nodes
    clock = checks._curved_jump_clock(T)
    mol = gc.mollify_clock(clock, 32.0)
    assert float(np.min(np.diff(mol.values) - np.diff(mol.times))) >= 0.0


def test_criterion_8_wellposedness():
    result = checks.check_wellposedness(T=T, ks=(4, 8, 16, 32))
    v = result.values
    sups = [v[f"sup_err_k{k}"] for k in (4, 8, 16, 32)]
    detail = (
        "sup errors "
        + " > ".join(f"{e:.2e}" for e in sups)
        + f", final <= 1e-3; certificate residuals j=1: {v['cert_residual_j1']:.3e}"
    )
    _emit("8 well-posedness + terminal certificate", result.passed, detail)
    assert all(b < a for a, b in zip(sups, sups[1:])), "sup errors must decrease"
    assert sups[-1] <= 1e-3

    def bound(j: int) -> float:
        tj = sc.spiral_clip_time(T, j)
        return math.exp(-tj / (T * (T - tj)))

    for j in (1, 2, 4):
        assert v[f"cert_residual_j{j}"] <= bound(j) + 1e-6
    assert result.passed


def test_criterion_9_winding_floor():
    result = checks.check_winding_floor(T=T, count=50, seed=20260814)
    detail = f"worst gap x3(T) - exp(-Var) = {result.values['worst_gap']:.2e} >= -1e-8"
    _emit("9 variation lower bound (50 randomized)", result.passed, detail)
    assert result.values["worst_gap"] >= -1e-8


TRIMMED_CONFIG = """\
[run]
scenario = "spiral"
seed = 20260808

[tolerances]
certification = 5e-2

[approximate]
k_list = [2, 4]

[suite]
segment_count = 8
consistency_count = 3
winding_count = 5
payoff_k_list = [5]
"""


def test_criterion_10_determinism(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(TRIMMED_CONFIG)
    reports = []
    for run in ("a", "b"):
        out = tmp_path / run
        proc = subprocess.run(
            [sys.executable, "-m", "gcimpulse.cli", "verify", "--config", str(cfg), "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stdout + proc.stderr
        reports.append((out / "report.txt").read_bytes())
    identical = reports[0] == reports[1]
    _emit("10 determinism", identical, f"two verify runs, {len(reports[0])} report bytes")
    assert identical
