"""Refinement-study driver and CSV / plot-data emission.

A study builds the coarse mesh of the experiment's domain, refines it
uniformly level by level, and for each level assembles, solves, and
analyzes the problem.  Levels are reported through the nominal grid
spacing 1/h = 2^level of the unit cells.  Output files are plain CSV with
deterministic formatting, so identical runs produce identical bytes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .analysis import (
    ConservationReport,
    conservation_report,
    convergence_orders,
    error_norms,
    postprocess_averages,
)
from .assembly import assemble, build_contexts
from .catalog import Experiment
from .mesh import build_coarse_mesh, classify_boundary, refine_uniform
from .solver import solve
from .weakspace import DofMap

CSV_HEADER = "inv_h,err_u,order_u,err_l0,order_l0,err_lb,order_lb"


@dataclass
class LevelResult:
    level: int
    inv_h: int
    n_lambda: int
    n_u: int
    err_u: float | None
    err_lam0: float | None
    err_lamb: float | None
    cons_max_residual: float
    cons_max_flux_jump: float
    cons_scale_f: float
    solver_residual: float
    solver_method: str
    seconds: float


@dataclass
class StudyReport:
    """Per-level results of one refinement study plus the post-processed
    solution field of the finest level when requested."""

    experiment: str
    rows: list[LevelResult] = field(default_factory=list)
    field_points: object = None

    def orders(self, key: str) -> list[float | None]:
        errs = [getattr(r, key) for r in self.rows]
        if any(e is None for e in errs) or len(errs) < 2:
            return [None] * len(errs)
        try:
            return convergence_orders(errs)
        except ValueError:
            return [None] * len(errs)

    def table(self) -> str:
        """Human-readable study table."""
        ou = self.orders("err_u")
        o0 = self.orders("err_lam0")
        ob = self.orders("err_lamb")
        lines = [
            f"{'1/h':>5} {'err_u':>12} {'order':>7} {'err_l0':>12} "
            f"{'order':>7} {'err_lb':>12} {'order':>7}"
        ]
        for i, r in enumerate(self.rows):
            lines.append(
                f"{r.inv_h:>5} {_fmt(r.err_u, '%.5e'):>12} {_fmt(ou[i], '%.3f'):>7} "
                f"{_fmt(r.err_lam0, '%.5e'):>12} {_fmt(o0[i], '%.3f'):>7} "
                f"{_fmt(r.err_lamb, '%.5e'):>12} {_fmt(ob[i], '%.3f'):>7}"
            )
        return "\n".join(lines)


def _fmt(value, spec_str) -> str:
    return "" if value is None else spec_str % value


def run_study(
    experiment: Experiment,
    levels: tuple[int, int] | None = None,
    tau: float | None = None,
    j: int | None = None,
    tol: float = 1e-11,
    collect_field: bool = False,
) -> StudyReport:
    """Run one experiment over a range of refinement levels.

    ``tau`` and ``j`` override the catalog configuration without
    duplicating the entry.  A solver failure aborts the remaining levels
    and re-raises with the partial report attached to the exception.
    """
    spec = experiment.spec
    overrides = {}
    if tau is not None:
        overrides["tau"] = tau
    if j is not None:
        overrides["j"] = j
    if overrides:
        spec = spec.with_overrides(**overrides)

    lo, hi = levels if levels is not None else experiment.levels
    if lo < 0 or hi < lo:
        raise ValueError(f"bad level range ({lo}, {hi})")

    report = StudyReport(experiment=experiment.name)
    mesh = build_coarse_mesh(spec.domain_tag)
    for _ in range(lo):
        mesh = refine_uniform(mesh)

    for level in range(lo, hi + 1):
        start = time.perf_counter()
        classification = classify_boundary(mesh, spec.beta)
        dofmap = DofMap(mesh, spec.k, spec.j, classification)
        contexts = build_contexts(mesh, spec)
        system = assemble(mesh, dofmap, spec, contexts)
        try:
            solution = solve(system, tol=tol)
        except Exception as err:
            err.partial_report = report
            raise

        if spec.exact_u is not None:
            errs = error_norms(solution, spec, mesh, contexts)
            err_u, err_l0, err_lb = errs.err_u, errs.err_lam0, errs.err_lamb
        else:
            err_u = err_l0 = err_lb = None
        cons: ConservationReport = conservation_report(solution, spec, mesh, contexts)

        report.rows.append(
            LevelResult(
                level=level,
                inv_h=2**level,
                n_lambda=dofmap.n_lambda,
                n_u=dofmap.n_u,
                err_u=err_u,
                err_lam0=err_l0,
                err_lamb=err_lb,
                cons_max_residual=cons.max_element_residual,
                cons_max_flux_jump=cons.max_flux_jump,
                cons_scale_f=cons.scale_f,
                solver_residual=solution.residual,
                solver_method=solution.info["method"],
                seconds=time.perf_counter() - start,
            )
        )

        if collect_field and level == hi:
            report.field_points = postprocess_averages(solution.u, mesh)
        if level < hi:
            mesh = refine_uniform(mesh)

    return report


def emit_csv(report: StudyReport, path) -> None:
    """Write the study table: one row per level, empty order cells on the
    first row and wherever errors are unavailable."""
    ou = report.orders("err_u")
    o0 = report.orders("err_lam0")
    ob = report.orders("err_lamb")
    lines = [CSV_HEADER]
    for i, r in enumerate(report.rows):
        lines.append(
            ",".join(
                [
                    str(r.inv_h),
                    _fmt(r.err_u, "%.12e"),
                    _fmt(ou[i], "%.6f"),
                    _fmt(r.err_lam0, "%.12e"),
                    _fmt(o0[i], "%.6f"),
                    _fmt(r.err_lamb, "%.12e"),
                    _fmt(ob[i], "%.6f"),
                ]
            )
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_plot_data(source, path) -> None:
    """Write post-processed point values as x,y,value rows.  ``source`` is
    a StudyReport carrying field points or a PostField itself."""
    pts = getattr(source, "field_points", source)
    if pts is None:
        raise ValueError("report holds no field data; run with collect_field=True")
    lines = ["x,y,value"]
    for x, y, v in zip(pts.x, pts.y, pts.value):
        lines.append(f"{x:.12e},{y:.12e},{v:.12e}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
