"""Simulation driver: runs a registered case and writes snapshots, per-step
diagnostics, convergence tables and a reproducibility manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__
from .cases import ADVECTION_CE, ADVECTION_CI, Case, cells_per_axis, get_case
from .config import ExperimentConfig
from .core import (NEUMANN, PERIODIC, ErrorReport, fit_orders, linf_error, linf_norm, snapshot_csv,
                   total_variation, write_atomic)
from .isentropic import EulerParams, SolverError, SolverOptions, StepStats, cached_solver, default_cfl
from .model_advection import (AdvectionParams, PulseBounds, advect_step_ars222, advect_step_mood,
                              advect_step_o1, advect_step_tvd_ap)

log = logging.getLogger(__name__)

REFERENCE_FACTOR = 4


class SolverFailure(RuntimeError):
    """A step could not be completed; carries the step index."""

    def __init__(self, step: int, t: float, cause: Exception):
        super().__init__(f"step {step} (t = {t:.6g}) failed: {cause}")
        self.step, self.t, self.cause = step, t, cause


@dataclass
class RunResult:
    case: str
    scheme: str
    eps: float
    gamma: float
    W: np.ndarray
    grid: object
    bcs: tuple
    t: float
    n_steps: int
    diagnostics: list = field(default_factory=list)

    @property
    def max_evaluations(self) -> int:
        return max((d["evaluations"] for d in self.diagnostics), default=0)

    @property
    def fallbacks(self) -> int:
        return sum(d["fallback"] for d in self.diagnostics)


def _tv(rho, case: Case) -> float:
    if rho.ndim == 1:
        return total_variation(rho, NEUMANN if case.bc_kind != PERIODIC else PERIODIC)
    # sum of the 1D variations along every row and column
    tv = float(np.abs(np.diff(rho, axis=0)).sum() + np.abs(np.diff(rho, axis=1)).sum())
    if case.bc_kind == PERIODIC:
        tv += float(np.abs(rho[0] - rho[-1]).sum() + np.abs(rho[:, 0] - rho[:, -1]).sum())
    return tv


def _row(n, t, dt, rho, stats: StepStats, case):
    return {
        "step": n,
        "t": t,
        "dt": dt,
        "tv_rho": _tv(rho, case),
        "linf_rho": linf_norm(rho),
        "newton_iterations": int(sum(stats.newton_iterations)),
        "evaluations": stats.evaluations,
        "fallback": int(stats.fallback),
    }


def _simulate_advection(case, scheme, eps, n, t_end, cfl, callback):
    grid, bcs, W0 = case.build(n, eps, 1.0)
    dt = (1.0 if cfl is None else cfl) * grid.dx / ADVECTION_CE
    w = W0[0].copy()
    bounds = PulseBounds.from_initial(w)
    t, k, rows = 0.0, 0, []
    # times are k * dt rather than a running sum, so t_end = m * dt takes m steps
    while t < t_end * (1 - 1e-12):
        h = dt if (k + 1) * dt < t_end * (1 - 1e-12) else t_end - k * dt
        p = AdvectionParams(ADVECTION_CE, ADVECTION_CI, eps, grid.dx, h)
        used, ev = False, 1
        try:
            if scheme == "o1":
                w = advect_step_o1(w, p)
            elif scheme == "o2":
                w = advect_step_ars222(w, p)[1]
            elif scheme == "tvdap":
                w = advect_step_tvd_ap(w, p)
            elif scheme == "mood":
                w, bounds, used = advect_step_mood(w, p, bounds)
                ev = 2 if used else 1
            else:
                raise ValueError(f"unknown scheme {scheme!r}")
        except (ValueError, ArithmeticError) as e:
            raise SolverFailure(k + 1, t, e) from e
        k += 1
        t = min(k * dt, t_end)
        st = StepStats(evaluations=ev, fallback=used)
        rows.append(_row(k, t, h, w, st, case))
        if callback is not None:
            callback(k, t, w[None], st)
    return RunResult(case.name, scheme, eps, 1.0, w[None], grid, bcs, t, k, rows)


def simulate(case, scheme: str, eps: float, n: int, t_end: float, gamma: Optional[float] = None,
             cfl: Optional[float] = None, viscosity: str = "full",
             callback: Optional[Callable] = None) -> RunResult:
    """March ``case`` with ``scheme`` on ``n`` cells per axis up to ``t_end``.

    ``callback(n, t, W, stats)`` runs after every step. Solver errors are
    re-raised as :class:`SolverFailure` with the failing step index.
    """
    case = get_case(case) if isinstance(case, str) else case
    if case.name == "advection-pulse":
        return _simulate_advection(case, scheme, eps, n, t_end, cfl, callback)
    gamma = case.gamma if gamma is None else gamma
    C = default_cfl(scheme) if cfl is None else cfl
    grid, bcs, W = case.build(n, eps, gamma)
    solver = cached_solver(grid, bcs, EulerParams(gamma, eps), SolverOptions(viscosity=viscosity))
    bounds = solver.invariant_bounds(W) if scheme == "mood" else None
    t, k, rows = 0.0, 0, []
    while t < t_end * (1 - 1e-14):
        stats = StepStats()
        try:
            dt = min(solver.cfl_dt(W, C), t_end - t)
            W, bounds = solver.step(scheme, W, t, dt, bounds, stats)
            if not np.all(np.isfinite(W)):
                raise SolverError("non-finite state")
        except (SolverError, ArithmeticError, np.linalg.LinAlgError) as e:
            raise SolverFailure(k + 1, t, e) from e
        t = t + dt if t + dt < t_end else t_end
        k += 1
        rows.append(_row(k, t, dt, W[0], stats, case))
        if callback is not None:
            callback(k, t, W, stats)
    return RunResult(case.name, scheme, eps, gamma, W, grid, bcs, t, k, rows)


# ------------------------------------------------------------------ errors
def solution_errors(res: RunResult) -> dict:
    """L-infinity errors against the exact solution of the case.

    1D: density and momentum. 2D: density and ``rho |U|``.
    """
    case = get_case(res.case)
    if case.exact is None:
        raise ValueError(f"{case.name} has no exact solution")
    Wex = case.exact(res.eps, res.gamma)(res.grid.centers(), res.t)
    if case.ndim == 1:
        return {"rho": linf_error(res.W[0], Wex[0]), "q": linf_error(res.W[1], Wex[1])}
    m = np.hypot(res.W[1], res.W[2])
    mex = np.hypot(Wex[1], Wex[2])
    return {"rho": linf_error(res.W[0], Wex[0]), "rhoU": linf_error(m, mex)}


def reference_errors(res: RunResult, reference: np.ndarray) -> dict:
    if res.W.shape[0] == 1:
        return {"w": linf_error(res.W[0], reference[0])}
    out = {"rho": linf_error(res.W[0], reference[0])}
    if res.W.shape[0] == 2:
        out["q"] = linf_error(res.W[1], reference[1])
    else:
        out["rhoU"] = linf_error(np.hypot(res.W[1], res.W[2]), np.hypot(reference[1], reference[2]))
    return out


def run_convergence(cfg: ExperimentConfig, cache=None) -> ErrorReport:
    """Errors on every grid of ``cfg.grids`` plus observed orders.

    Cases without an exact solution are compared with a first-order run on a
    grid refined ``REFERENCE_FACTOR`` times, projected by cell averaging.
    """
    from .reference import ReferenceCache, fine_grid_reference

    r = cfg.resolved()
    case = get_case(r.case)
    errors: dict = {}
    for n_total in r.grids:
        n = cells_per_axis(case, n_total)
        res = simulate(case, r.scheme, r.epsilon, n, r.tend, r.gamma, cfg.cfl, r.viscosity)
        if case.exact is not None:
            e = solution_errors(res)
        else:
            ref = fine_grid_reference(case.name, r.epsilon, n, r.tend, REFERENCE_FACTOR,
                                      gamma=r.gamma, cache=cache or ReferenceCache())
            e = reference_errors(res, ref)
        for k, v in e.items():
            errors.setdefault(k, []).append(v)
        log.info("N=%d errors %s", n_total, e)
    if case.ndim == 2:
        report = ErrorReport.for_2d(r.grids, errors)
    else:
        report = ErrorReport(list(r.grids), errors)
    return fit_orders(report)


# ----------------------------------------------------------------- output
def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def diagnostics_csv(rows) -> str:
    buf = io.StringIO()
    cols = ["step", "t", "dt", "tv_rho", "linf_rho", "newton_iterations", "evaluations", "fallback"]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def snapshot_columns(res: RunResult) -> dict:
    if res.W.shape[0] == 1:
        return {"w": res.W[0]}
    if res.W.shape[0] == 2:
        return {"rho": res.W[0], "q": res.W[1], "u": res.W[1] / res.W[0]}
    from .euler2d import EulerState2D, vorticity

    cols = {"rho": res.W[0], "qx": res.W[1], "qy": res.W[2]}
    if get_case(res.case).bc_kind == PERIODIC:
        cols["vorticity"] = vorticity(EulerState2D.from_W(res.W, res.grid, res.bcs))
    return cols


def write_manifest(out: Path, cfg: ExperimentConfig, files, extra=None) -> Path:
    manifest = {
        "version": __version__,
        "config": cfg.resolved().to_dict() | {"out": None},
        "config_sha256": cfg.digest(),
        "files": {f.name: _sha256(f) for f in files},
    }
    if extra:
        manifest.update(extra)
    path = out / "manifest.json"
    write_atomic(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def run_single(cfg: ExperimentConfig) -> dict:
    """Run one configuration and write its files into ``cfg.out``.

    Returns the paths written, keyed by role.
    """
    r = cfg.resolved()
    res = simulate(r.case, r.scheme, r.epsilon, r.cells, r.tend, r.gamma, cfg.cfl, r.viscosity)
    out = Path(r.out)
    snap = out / "snapshot.csv"
    diag = out / "diagnostics.csv"
    write_atomic(snap, snapshot_csv(res.grid.centers(), snapshot_columns(res)))
    write_atomic(diag, diagnostics_csv(res.diagnostics))
    files = [snap, diag]
    if r.plots:
        from .plotting import plot_diagnostics, plot_snapshot

        files += [plot_snapshot(res, out / "snapshot.png"), plot_diagnostics(res, out / "diagnostics.png")]
    summary = {"t": res.t, "n_steps": res.n_steps, "fallbacks": res.fallbacks,
               "max_evaluations_per_step": res.max_evaluations}
    if get_case(r.case).exact is not None:
        summary["errors"] = solution_errors(res)
    manifest = write_manifest(out, cfg, files, {"summary": summary})
    paths = {"snapshot": snap, "diagnostics": diag, "manifest": manifest, "result": res}
    return paths


def write_convergence(cfg: ExperimentConfig, report: ErrorReport) -> dict:
    r = cfg.resolved()
    out = Path(r.out)
    table = out / "convergence.csv"
    write_atomic(table, report.to_csv())
    files = [table]
    if r.plots:
        from .plotting import plot_convergence

        files.append(plot_convergence(report, out / "convergence.png"))
    manifest = write_manifest(out, cfg, files)
    return {"table": table, "manifest": manifest}
