"""Text formats: scenario files for control paths and CSV artifact dumps.

CSV files use '.' decimal separators, a header row, newline-terminated
records and shortest round-trip float formatting, so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .completion import CompletionResult, SpaceTimeControl
from .errors import ConfigError
from .ode import Trajectory
from .paths import AffineSegment, ControlPath, ControlSet, Jump
from .scenarios import late_spiral, spiral_control


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(path: str | Path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_control_csv(path: str | Path, control: ControlPath, samples: int = 513) -> Path:
    t_hi = control.horizon * (1.0 - 1e-9) if control.divergent else control.horizon
    ts = np.linspace(0.0, t_hi, samples)
    header = ["t"] + [f"u{i+1}" for i in range(control.dim)] + ["cumulative_variation"]
    rows = []
    for t in ts:
        u = control.value(float(t))
        rows.append([float(t), *[float(c) for c in u], control.variation_to(float(t))])
    return write_csv(path, header, rows)


def write_trajectory_csv(path: str | Path, traj: Trajectory) -> Path:
    header = [traj.domain] + [f"x{i+1}" for i in range(traj.n)]
    rows = ([float(g), *map(float, row)] for g, row in zip(traj.grid, traj.states))
    return write_csv(path, header, rows)


def write_completion_csv(path: str | Path, stc: SpaceTimeControl) -> Path:
    header = ["s", "phi0"] + [f"phi{i+1}" for i in range(stc.m)]
    header += [f"psi{i+1}" for i in range(stc.psi.shape[1])] + ["plateau"]
    flags = np.concatenate(([False], stc.plateau_flags))
    rows = (
        [float(s), float(p0), *map(float, phi), *map(float, psi), int(fl)]
        for s, p0, phi, psi, fl in zip(stc.grid, stc.phi0, stc.phi, stc.psi, flags)
    )
    return write_csv(path, header, rows)


def format_ledger(result: CompletionResult) -> str:
    lines = ["# covered-interval ledger", "# index t_lo t_hi variation gap s_visit s_end lower upper"]
    for e in result.ledger:
        lines.append(
            f"{e.index} {_fmt(e.t_lo)} {_fmt(e.t_hi)} {_fmt(e.variation)} {_fmt(e.terminal_gap)} "
            f"{_fmt(e.s_visit)} {_fmt(e.s_end)} {_fmt(e.lower_bound)} {_fmt(e.upper_bound)}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# scenario text format for control paths
# ---------------------------------------------------------------------------


def control_set_to_dict(cs: ControlSet) -> dict:
    d = {"kind": cs.kind, "dim": cs.dim}
    if cs.kind == "ball":
        d |= {"center": list(cs.center), "radius": cs.radius}
    elif cs.kind == "box":
        d |= {"lower": list(cs.lower), "upper": list(cs.upper)}
    else:
        d |= {"halfspaces": [list(r) for r in cs.halfspaces], "vertices": [list(v) for v in cs.vertices]}
    return d


def control_set_from_dict(d: dict) -> ControlSet:
    if d["kind"] == "ball":
        return ControlSet.ball(d["center"], d["radius"])
    if d["kind"] == "box":
        return ControlSet.box(d["lower"], d["upper"])
    return ControlSet.polytope(d["halfspaces"], d["vertices"])


_ANALYTIC_FAMILIES = {
    "spiral": lambda params: spiral_control(params[0]).segments[0],
    "late-spiral": lambda params: late_spiral(params[0], int(params[1])).segments[1],
}


def control_path_to_dict(path: ControlPath) -> dict:
    segments = []
    for seg in path.segments:
        if isinstance(seg, AffineSegment):
            segments.append({"kind": "affine", "start": list(seg.start), "end": list(seg.end)})
        else:
            if not seg.family or seg.family not in _ANALYTIC_FAMILIES:
                raise ConfigError(
                    f"analytic segment family {seg.family!r} is not serializable"
                )
            segments.append({"kind": "analytic", "family": seg.family, "params": list(seg.params)})
    return {
        "horizon": path.horizon,
        "breakpoints": list(path.breakpoints),
        "segments": segments,
        "jumps": [
            {"time": j.time, "left": list(j.left), "right": list(j.right)} for j in path.jumps
        ],
        "control_set": control_set_to_dict(path.control_set),
        "terminal_value": list(path.terminal_value) if path.terminal_value else None,
    }


def control_path_from_dict(d: dict) -> ControlPath:
    segments = []
    for s in d["segments"]:
        if s["kind"] == "affine":
            segments.append(AffineSegment(tuple(s["start"]), tuple(s["end"])))
        else:
            family = s["family"]
            if family not in _ANALYTIC_FAMILIES:
                raise ConfigError(f"unknown analytic family {family!r}")
            segments.append(_ANALYTIC_FAMILIES[family](s["params"]))
    return ControlPath(
        horizon=d["horizon"],
        breakpoints=tuple(d["breakpoints"]),
        segments=tuple(segments),
        control_set=control_set_from_dict(d["control_set"]),
        jumps=tuple(Jump(j["time"], tuple(j["left"]), tuple(j["right"])) for j in d["jumps"]),
        terminal_value=tuple(d["terminal_value"]) if d.get("terminal_value") else None,
    )


def save_scenario(path: str | Path, control: ControlPath) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(control_path_to_dict(control), indent=2, sort_keys=True) + "\n")
    return path


def load_scenario(path: str | Path) -> ControlPath:
    return control_path_from_dict(json.loads(Path(path).read_text()))
