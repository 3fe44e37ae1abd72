"""The ``pdwg`` command line tool.

Subcommands:

    pdwg list
        Print the experiment catalog.

    pdwg run --experiment NAME [--levels N] [--tau X] [--j {k-1,k}]
             [--tol T] --out DIR
    pdwg run --config FILE.json [...] --out DIR
        Run a refinement study and write <name>.csv (and <name>_field.csv
        for experiments that emit the post-processed solution field).

    pdwg verify --experiment NAME [--levels N]
        Run the experiment and check the per-run gates: solver residual,
        system symmetry, elementwise conservation, and (for exact
        solutions) error decrease.

Exit codes: 0 success, 2 solver failure, 3 acceptance failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .assembly import ProblemSpec, assemble
from .catalog import Experiment, catalog, get_experiment
from .fields import DerivedLoad, scalar_from_config, vector_from_config
from .mesh import build_coarse_mesh, classify_boundary, refine_uniform
from .solver import SolverError
from .study import emit_csv, emit_plot_data, run_study
from .weakspace import DofMap

EXIT_OK = 0
EXIT_SOLVER_FAILURE = 2
EXIT_ACCEPTANCE_FAILURE = 3


def load_experiment_config(path) -> Experiment:
    """Build an experiment from a JSON file mirroring the problem fields.

    Required keys: name, domain, beta, tau.  Optional: c (default 0),
    exact_u, f, g, k, j, levels.  When exact_u is given, f and g default
    to the manufactured load and the exact inflow trace.
    """
    with open(path) as fh:
        cfg = json.load(fh)
    for key in ("name", "domain", "beta", "tau"):
        if key not in cfg:
            raise ValueError(f"config is missing required key {key!r}")

    beta = vector_from_config(cfg["beta"])
    c = scalar_from_config(cfg.get("c", 0.0))
    exact = scalar_from_config(cfg["exact_u"]) if "exact_u" in cfg else None
    if "f" in cfg:
        f = scalar_from_config(cfg["f"])
    elif exact is not None:
        f = DerivedLoad(exact)
    else:
        raise ValueError("config needs either f or exact_u")
    if "g" in cfg:
        g = scalar_from_config(cfg["g"])
    elif exact is not None:
        g = exact
    else:
        raise ValueError("config needs either g or exact_u")

    spec = ProblemSpec(
        beta=beta,
        c=c,
        f=f,
        g=g,
        tau=float(cfg["tau"]),
        domain_tag=cfg["domain"],
        exact_u=exact,
        k=int(cfg.get("k", 1)),
        j=int(cfg.get("j", 1)),
    )
    levels = tuple(cfg.get("levels", (0, 5)))
    outputs = ("errors", "conservation") if exact is not None else ("conservation", "field")
    return Experiment(
        name=cfg["name"],
        spec=spec,
        description=cfg.get("description", f"config {path}"),
        levels=levels,
        outputs=outputs,
    )


def _resolve_j(value: str | None, k: int) -> int | None:
    if value is None:
        return None
    if value == "k-1":
        return k - 1
    if value == "k":
        return k
    raise ValueError(f"--j must be 'k-1' or 'k', got {value!r}")


def _cmd_list(_args) -> int:
    for name, exp in catalog().items():
        print(f"{name:14s} {exp.description}")
    return EXIT_OK


def _cmd_run(args) -> int:
    if (args.experiment is None) == (args.config is None):
        print("error: provide exactly one of --experiment or --config", file=sys.stderr)
        return EXIT_ACCEPTANCE_FAILURE
    exp = (
        get_experiment(args.experiment)
        if args.experiment is not None
        else load_experiment_config(args.config)
    )
    levels = (exp.levels[0], exp.levels[0] + args.levels - 1) if args.levels else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        report = run_study(
            exp,
            levels=levels,
            tau=args.tau,
            j=_resolve_j(args.j, exp.spec.k),
            tol=args.tol,
            collect_field="field" in exp.outputs,
        )
    except SolverError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE
    emit_csv(report, out / f"{exp.name}.csv")
    if report.field_points is not None:
        emit_plot_data(report, out / f"{exp.name}_field.csv")
    print(report.table())
    worst = max(r.cons_max_residual / r.cons_scale_f for r in report.rows)
    jump = max(r.cons_max_flux_jump for r in report.rows)
    print(f"conservation: max residual/scale(f) {worst:.3e}, max flux jump {jump:.3e}")
    print(f"wrote {out / (exp.name + '.csv')}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    exp = get_experiment(args.experiment)
    levels = (0, args.levels - 1) if args.levels else (0, 3)
    failures: list[str] = []

    # Symmetry / structure gate on the finest verification level.
    spec = exp.spec
    mesh = build_coarse_mesh(spec.domain_tag)
    for _ in range(levels[1]):
        mesh = refine_uniform(mesh)
    classification = classify_boundary(mesh, spec.beta)
    dofmap = DofMap(mesh, spec.k, spec.j, classification)
    system = assemble(mesh, dofmap, spec)
    asym = abs(system.matrix - system.matrix.T)
    asym_max = asym.max() if asym.nnz else 0.0
    if asym_max > 1e-13:
        failures.append(f"matrix asymmetry {asym_max:.3e} > 1e-13")
    uu = system.matrix[dofmap.n_lambda :, dofmap.n_lambda :]
    if uu.count_nonzero():
        failures.append("primal-primal block is not identically zero")

    try:
        report = run_study(exp, levels=levels)
    except SolverError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE

    last = report.rows[-1]
    if last.cons_max_residual > 1e-9 * last.cons_scale_f:
        failures.append(
            f"conservation residual {last.cons_max_residual:.3e} exceeds "
            f"1e-9 * scale(f) = {1e-9 * last.cons_scale_f:.3e}"
        )
    if last.cons_max_flux_jump > 1e-9:
        failures.append(f"flux jump {last.cons_max_flux_jump:.3e} exceeds 1e-9")

    if spec.exact_u is not None and len(report.rows) >= 2:
        errs = [r.err_u for r in report.rows]
        machine = all(e <= 1e-8 for e in errs)
        if not machine and not errs[-1] < errs[1]:
            failures.append(f"errors do not decrease: {errs}")

    print(report.table())
    if failures:
        for f in failures:
            print(f"FAIL {exp.name}: {f}", file=sys.stderr)
        return EXIT_ACCEPTANCE_FAILURE
    print(f"PASS {exp.name}: levels {levels[0]}..{levels[1]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdwg",
        description="Primal-dual weak Galerkin transport solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a refinement study")
    p_run.add_argument("--experiment", help="catalog entry name (see 'pdwg list')")
    p_run.add_argument("--config", help="JSON problem description")
    p_run.add_argument("--levels", type=int, help="number of levels (default: catalog range)")
    p_run.add_argument("--tau", type=float, help="override the stabilization parameter")
    p_run.add_argument("--j", choices=("k-1", "k"), help="multiplier degree")
    p_run.add_argument("--tol", type=float, default=1e-11, help="solver relative residual")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_list = sub.add_parser("list", help="list catalog experiments")
    p_list.set_defaults(func=_cmd_list)

    p_verify = sub.add_parser("verify", help="run per-experiment checks")
    p_verify.add_argument("--experiment", required=True)
    p_verify.add_argument("--levels", type=int, help="number of levels (default 4)")
    p_verify.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KeyError, ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ACCEPTANCE_FAILURE


if __name__ == "__main__":
    sys.exit(main())
