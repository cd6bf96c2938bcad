"""Time loop driving a scenario and writing its artifacts."""

from __future__ import annotations

import logging
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import StepFailure
from ..fem import DirectSolver, solve_step
from . import postprocess as post
from .config import ScenarioConfig
from .output import export_csv, export_vtk, sha256, write_manifest
from .scenarios import Scenario, build_scenario

log = logging.getLogger(__name__)

CURVE_UNITS = {
    "time": "s", "displacement": "m", "force": "MN/m", "injected_volume": "m^3",
    "pressure": "MPa", "crack_extent": "m", "mass_change": "kg/m",
    "outflow": "kg/(m s)",
}
PROFILE_UNITS = {"x": "m", "m": "kg/m^3", "m_e": "kg/m^3", "m_p": "kg/m^3",
                 "p": "MPa", "w": "m", "d": "-"}


@dataclass
class StepRecord:
    step: int
    time: float
    iterations: int
    residual_norms: list
    max_local_iterations: int
    plastic_points: int
    mass_balance: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class RunResult:
    """Outcome of :func:`simulate` or :func:`run`."""

    scenario: Scenario
    state: object
    records: list = field(default_factory=list)
    curves: dict = field(default_factory=dict)
    failed_step: int | None = None
    error: str | None = None
    files: list = field(default_factory=list)
    manifest: dict | None = None

    @property
    def ok(self) -> bool:
        return self.failed_step is None


def mass_balance(disc, state_n, state, tau) -> float:
    """Relative defect of ``sum int (m - m_n) dV + tau * outflow``."""
    change = post.total_mass_change(disc, state.qp.m, state_n.qp.m)
    flow = tau * post.boundary_outflow(disc, state.h)
    scale = max(abs(change), abs(flow), np.sum(disc.geometry.dV) * 1e-30)
    return abs(change + flow) / scale


def _curve_row(sc: Scenario, state, report) -> dict:
    cfg = sc.config
    row = {"step": state.step, "time": state.time}
    if cfg.scenario == "footing":
        row["displacement"] = sc.prescribed_displacement(state.step)
        row["force"] = (0.0 if report is None
                        else post.footing_force(report.reaction, sc.loaded_dofs))
    elif cfg.scenario == "injection":
        row["injected_volume"] = sc.injected_mass(state.step) / sc.params.rho_f
        row["pressure"] = post.probe_pressure(state, sc.params, sc.probe_element)
        row["crack_extent"] = post.crack_extent(sc.mesh, state.d, sc.line_y)
    else:
        row["mass_change"] = post.total_mass_change(
            sc.disc, state.qp.m, np.zeros_like(state.qp.m))
        row["outflow"] = post.boundary_outflow(sc.disc, state.h)
    return row


def simulate(sc: Scenario, callback=None) -> RunResult:
    """Run all steps of ``sc`` in memory.

    ``callback(state_n, state, report, bcs)`` is called after every accepted
    step.  A :class:`StepFailure` stops the loop and is recorded in the
    result rather than raised.
    """
    solver = DirectSolver()
    state = sc.initial_state()
    result = RunResult(sc, state)
    rows = [_curve_row(sc, state, None)]
    for step in range(1, sc.steps + 1):
        bcs = sc.bcs(step)
        try:
            new, report = solve_step(sc.disc, state, bcs, sc.tau, sc.params,
                                     sc.options, solver)
        except StepFailure as exc:
            result.failed_step, result.error = step, str(exc)
            log.error("%s", exc)
            break
        record = StepRecord(step, new.time, report.iterations, report.residual_norms,
                            report.max_local_iterations, report.plastic_points,
                            mass_balance(sc.disc, state, new, sc.tau))
        result.records.append(record)
        rows.append(_curve_row(sc, new, report))
        log.info("step %d t=%.6g its=%d residual=%.3e", step, new.time,
                 report.iterations, report.residual_norms[-1])
        if callback is not None:
            callback(state, new, report, bcs)
        state = new
    result.state = state
    result.curves = {k: np.array([r[k] for r in rows]) for k in rows[0]}
    return result


def _write_fields(sc: Scenario, state, out: Path, files: list) -> None:
    path = out / f"fields_{state.step:06d}.vtk"
    export_vtk(sc.mesh, path, post.point_fields(sc.disc, state),
               post.cell_fields(sc.disc, state, sc.params))
    files.append(path)
    if sc.line_y is not None:
        path = out / f"profile_y{sc.line_y:g}_{state.step:06d}.csv"
        export_csv(post.line_profile(sc.disc, state, sc.params, sc.line_y), path,
                   PROFILE_UNITS)
        files.append(path)


def run(cfg: ScenarioConfig, output_dir=None) -> RunResult:
    """Build, run and export one scenario; the manifest is written last."""
    out = Path(output_dir or cfg.output_dir)
    started = time.time()
    sc = build_scenario(cfg)
    files: list = []
    every = cfg.output_every

    def on_step(state_n, state, report, bcs):
        if every and state.step % every == 0 and state.step != sc.steps:
            _write_fields(sc, state, out, files)

    result = simulate(sc, on_step)
    _write_fields(sc, result.state, out, files)
    curve = out / f"{cfg.scenario}_curve.csv"
    export_csv(result.curves, curve, CURVE_UNITS)
    files.append(curve)

    result.files = files
    result.manifest = {
        "config": cfg.to_dict(),
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_clock_s": time.time() - started,
        "status": "completed" if result.ok else "failed",
        "failed_step": result.failed_step,
        "error": result.error,
        "steps": [r.to_dict() for r in result.records],
        "checksums": {p.name: sha256(p) for p in files},
    }
    write_manifest(out / "manifest.json", result.manifest)
    return result
