"""Batch front door: JSON scenario configs in, CSV/SVG/report files out.

Subcommands mirror the tasks: eigen, steady, simulate, threshold,
sweep, verify.  Exit codes: 0 success, 1 verify-check failure,
2 validation error, 3 numerical failure, 4 hypothesis violation.
Identical config and seed produce byte-identical CSV output.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .mesh import Grid, build_grid
from .model import (
    CoefficientSpec,
    HypothesisError,
    ModelParams,
    SystemKind,
    sample_coefficients,
)
from .dynamics import (
    SolverOptions,
    State,
    StepOvershootError,
    constant_state,
    eigenfunction_state,
    integrate_to_steady,
    persistence_floor,
    random_state,
)
from .spectral import (
    ConvergenceError,
    principal_eigen,
    scalar_eigenvalue,
    scalar_problem,
    switching_problem,
)
from . import analysis as an
from . import svgplot
from .verify import GROUPS, VerifyContext, run_battery

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_HYPOTHESIS = 4

TASKS = ("eigen", "steady", "simulate", "threshold", "sweep", "verify")


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class ScenarioConfig:
    grid: Grid
    params: ModelParams
    system: SystemKind
    task: str
    output_dir: Path
    seed: int = 0
    solver: SolverOptions = field(default_factory=SolverOptions)
    threshold_name: Optional[str] = None
    sweep_parameter: Optional[str] = None
    sweep_values: Optional[list[float]] = None
    initial: Optional[dict] = None
    scan_points: int = 64
    verify_groups: Optional[list[str]] = None


def _coefficient_from_dict(data: dict, name: str) -> CoefficientSpec:
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError(f"coefficient {name!r} must be an object with a 'kind' key")
    kind = data["kind"]
    try:
        if kind == "constant":
            return CoefficientSpec.constant(data["value"])
        if kind == "cosine_profile":
            return CoefficientSpec.cosine(
                data["mean"], data["amplitude"], data.get("frequency", 1)
            )
        if kind == "samples":
            return CoefficientSpec.from_samples(data["values"])
    except KeyError as exc:
        raise ConfigError(f"coefficient {name!r} is missing field {exc}") from exc
    raise ConfigError(f"coefficient {name!r} has unknown kind {kind!r}")


def parse_config(data: dict, base_dir: Path = Path(".")) -> ScenarioConfig:
    try:
        grid_spec = data["grid"]
        grid = build_grid(grid_spec["a"], grid_spec["b"], grid_spec["n"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"invalid or missing grid section: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    try:
        p = data["params"]
        params = ModelParams(
            d1=float(p["d1"]),
            d2=float(p["d2"]),
            d3=float(p.get("d3", 1.0)),
            b=float(p.get("b", 1.0)),
            c=float(p.get("c", 1.0)),
            alpha=_coefficient_from_dict(p["alpha"], "alpha"),
            beta=_coefficient_from_dict(p["beta"], "beta"),
            m=_coefficient_from_dict(p["m"], "m"),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"invalid or missing params section: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    system_tag = data.get("system", "submodel")
    try:
        system = SystemKind(system_tag)
    except ValueError as exc:
        raise ConfigError(f"unknown system kind {system_tag!r}") from exc

    task_spec = data.get("task")
    if isinstance(task_spec, str):
        task_spec = {"name": task_spec}
    if not isinstance(task_spec, dict) or task_spec.get("name") not in TASKS:
        raise ConfigError(f"task must name one of {TASKS}")
    task = task_spec["name"]

    solver_spec = data.get("solver", {})
    solver = SolverOptions(
        dt=float(solver_spec.get("dt", 0.01)),
        tol=float(solver_spec.get("tol", 1e-9)),
        t_max=float(solver_spec.get("t_max", 2000.0)),
        sample_every=float(solver_spec.get("sample_every", 1.0)),
        store_fields=bool(solver_spec.get("store_fields", True)),
    )
    if solver.dt <= 0 or solver.tol <= 0 or solver.t_max <= 0:
        raise ConfigError("solver dt, tol, t_max must all be positive")

    threshold_name = task_spec.get("threshold_name") or task_spec.get("name_of_threshold")
    if task == "threshold":
        if threshold_name not in ("d_c", "d_0", "beta_c", "alpha_c", "mu_star", "mu_zero"):
            raise ConfigError(
                "threshold task needs threshold_name in "
                "{d_c, d_0, beta_c, alpha_c, mu_star, mu_zero}"
            )
    sweep_parameter = task_spec.get("parameter")
    sweep_values = task_spec.get("values")
    if task == "sweep":
        if sweep_parameter not in ("d3", "beta", "alpha"):
            raise ConfigError("sweep task needs parameter in {d3, beta, alpha}")
        if not isinstance(sweep_values, list) or not sweep_values:
            raise ConfigError("sweep task needs a non-empty list of values")
        sweep_values = [float(v) for v in sweep_values]

    verify_groups = task_spec.get("groups")
    if verify_groups is not None:
        if not isinstance(verify_groups, list):
            raise ConfigError("verify groups must be a list of group names")
        unknown = [gname for gname in verify_groups if gname not in GROUPS]
        if unknown:
            raise ConfigError(f"unknown verify groups: {unknown}; available: {list(GROUPS)}")

    initial = data.get("initial")
    if initial is not None and (
        not isinstance(initial, dict)
        or initial.get("kind") not in ("constant", "random", "eigenfunction")
    ):
        raise ConfigError("initial data kind must be constant, random, or eigenfunction")

    out_dir = Path(data.get("output", "out"))
    if not out_dir.is_absolute():
        out_dir = base_dir / out_dir
    return ScenarioConfig(
        grid=grid,
        params=params,
        system=system,
        task=task,
        output_dir=out_dir,
        seed=int(data.get("seed", 0)),
        solver=solver,
        threshold_name=threshold_name,
        sweep_parameter=sweep_parameter,
        sweep_values=sweep_values,
        initial=initial,
        scan_points=int(solver_spec.get("scan_points", 64)),
        verify_groups=verify_groups,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data, base_dir=path.parent)


@dataclass
class RunArtifacts:
    csv_paths: list[Path]
    svg_paths: list[Path]
    report_path: Optional[Path]
    exit_status: int


def _write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) if isinstance(x, (int, float, np.floating)) else str(x)
                             for x in row])
    return path


def _write_report(path: Path, lines: list[str]) -> Path:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _initial_state(config: ScenarioConfig) -> State:
    kind = config.system
    spec = config.initial or {"kind": "random", "low": 0.1, "high": 0.5}
    if spec["kind"] == "constant":
        return constant_state(kind, config.grid, spec["values"])
    if spec["kind"] == "random":
        return random_state(
            kind,
            config.grid,
            float(spec.get("low", 0.1)),
            float(spec.get("high", 0.5)),
            seed=int(spec.get("seed", config.seed)),
        )
    if kind.n_components != 2:
        raise ConfigError("eigenfunction initial data is only defined for two-component systems")
    coeffs = sample_coefficients(config.params, config.grid)
    eig = principal_eigen(
        switching_problem(
            config.grid, config.params.d1, config.params.d2,
            coeffs.alpha, coeffs.beta, coeffs.m,
        )
    )
    return eigenfunction_state(eig, float(spec.get("scale", 0.1)))


def _eigen_problem(config: ScenarioConfig):
    coeffs = sample_coefficients(config.params, config.grid)
    if config.system is SystemKind.LOGISTIC:
        return scalar_problem(config.grid, config.params.d3, coeffs.m)
    return switching_problem(
        config.grid, config.params.d1, config.params.d2, coeffs.alpha, coeffs.beta, coeffs.m
    )


def _task_eigen(config: ScenarioConfig, out: Path) -> RunArtifacts:
    result = principal_eigen(_eigen_problem(config))
    csv_path = _write_csv(
        out / "eigen.csv",
        ["lambda", "residual", "iterations"],
        [[result.lam, result.residual, result.iterations]],
    )
    rows = []
    for i, node in enumerate(config.grid.nodes):
        rows.append([node] + [result.eigenfunctions[k][i] for k in range(result.eigenfunctions.shape[0])])
    comps = [f"component_{k + 1}" for k in range(result.eigenfunctions.shape[0])]
    fun_path = _write_csv(out / "eigenfunctions.csv", ["x"] + comps, rows)
    svg = svgplot.line_plot(
        out / "eigenfunctions.svg",
        config.grid.nodes,
        list(result.eigenfunctions),
        comps,
        title="Principal eigenfunction",
        xlabel="x",
        ylabel="amplitude",
    )
    report = _write_report(
        out / "report.txt",
        [
            "task: eigen",
            f"principal eigenvalue: {_fmt(result.lam)}",
            f"residual: {_fmt(result.residual)}",
            f"iterations: {result.iterations}",
            "status: OK",
        ],
    )
    return RunArtifacts([csv_path, fun_path], [svg], report, EXIT_OK)


def _trajectory_rows(log) -> list[list]:
    rows = []
    for idx, t in enumerate(log.sample_times):
        for comp in range(len(log.mins[idx])):
            rows.append(
                [t, comp + 1, log.mins[idx][comp], log.maxs[idx][comp], log.masses[idx][comp]]
            )
    return rows


def _task_evolve(config: ScenarioConfig, out: Path, demand_steady: bool) -> RunArtifacts:
    initial = _initial_state(config)
    result = integrate_to_steady(
        config.system, config.params, config.grid, initial, config.solver
    )
    log = result.trajectory
    traj_path = _write_csv(
        out / "trajectory.csv", ["t", "comp", "min", "max", "mass"], _trajectory_rows(log)
    )
    rows = []
    for i, node in enumerate(config.grid.nodes):
        rows.append([node] + [result.state.components[k][i] for k in range(config.system.n_components)])
    comps = [f"component_{k + 1}" for k in range(config.system.n_components)]
    state_path = _write_csv(out / "state.csv", ["x"] + comps, rows)
    svgs = [
        svgplot.line_plot(
            out / "state.svg",
            config.grid.nodes,
            list(result.state.components),
            comps,
            title="Final state",
            xlabel="x",
            ylabel="density",
        ),
        svgplot.line_plot(
            out / "trajectory.svg",
            log.times,
            [np.asarray([m[k] for m in log.masses]) for k in range(config.system.n_components)],
            comps,
            title="Component mass over time",
            xlabel="t",
            ylabel="mass",
        ),
    ]
    floor = persistence_floor(log) if len(log.sample_times) > 1 else float(np.min(log.mins[0]))
    lines = [
        f"task: {'steady' if demand_steady else 'simulate'}",
        f"converged: {result.converged}",
        f"residual: {_fmt(result.residual)}",
        f"steps: {result.steps}",
        f"final time: {_fmt(result.state.t)}",
        f"persistence floor (post-transient): {_fmt(floor)}",
    ]
    status = EXIT_OK
    if demand_steady and not result.converged:
        lines.append("status: FAILED precondition 'steady state reached within t_max'")
        status = EXIT_NUMERICAL
    else:
        lines.append("status: OK")
    report = _write_report(out / "report.txt", lines)
    return RunArtifacts([traj_path, state_path], svgs, report, status)


def _task_threshold(config: ScenarioConfig, out: Path) -> RunArtifacts:
    name = config.threshold_name
    coeffs = sample_coefficients(config.params, config.grid)
    results = []
    if name == "d_0":
        results = an.lambda2_sign_changes(config.params, config.grid)
        if not results:
            raise ConvergenceError("no sign change of the invasion eigenvalue found for d_0")
    elif name == "mu_star":
        from .spectral import mu_star_scalar

        results = [mu_star_scalar(config.grid, coeffs.m)]
    elif name == "mu_zero":
        from .spectral import find_mu_roots, lambda_of_mu

        curve = lambda mu: lambda_of_mu(
            config.grid, config.params.d1, config.params.d2,
            coeffs.alpha, coeffs.beta, coeffs.m, mu,
        )
        results = find_mu_roots(curve, (1e-2, 1e2), name="mu_zero",
                                scan_points=config.scan_points)
        if not results:
            raise HypothesisError(
                "no critical growth scaling found; the mean growth may already be favorable"
            )
    else:
        results = [an.find_threshold(name, config.params, config.grid,
                                     scan_points=config.scan_points)]
    csv_path = _write_csv(
        out / "threshold.csv",
        ["name", "lo", "hi", "root", "residual"],
        [[r.name, r.bracket[0], r.bracket[1], r.root, r.residual] for r in results],
    )
    svgs = []
    main = results[0]
    lo, hi = main.bracket
    if name in ("d_c", "beta_c", "alpha_c"):
        lattice = np.linspace(lo if lo > 0 else hi * 1e-4, hi, 17)
        curve_vals = _threshold_curve_samples(config, coeffs, name, lattice)
        svgs.append(
            svgplot.line_plot(
                out / "threshold_curve.svg",
                lattice,
                [curve_vals],
                ["principal eigenvalue"],
                title=f"Eigenvalue curve near {name}",
                xlabel=name.split("_")[0],
                ylabel="lambda",
            )
        )
    report = _write_report(
        out / "report.txt",
        ["task: threshold", f"name: {name}"]
        + [
            f"root: {_fmt(r.root)} in ({_fmt(r.bracket[0])}, {_fmt(r.bracket[1])}), "
            f"residual {_fmt(r.residual)}, signs {r.sign_left:+d}->{r.sign_right:+d}"
            for r in results
        ]
        + ["status: OK"],
    )
    return RunArtifacts([csv_path], svgs, report, EXIT_OK)


def _threshold_curve_samples(config, coeffs, name, lattice) -> list[float]:
    params = config.params
    grid = config.grid
    if name == "d_c":
        pair = an.subsystem_steady(params, grid)
        u, v = pair.state.components
        pot = coeffs.m - u - v
        return [scalar_eigenvalue(grid, d, pot).lam for d in lattice]
    w_star = an.logistic_steady(params, grid).state.components[0]
    growth = coeffs.m - w_star
    vals = []
    for val in lattice:
        if name == "beta_c":
            problem = switching_problem(
                grid, params.d1, params.d2, coeffs.alpha, np.full(grid.n, val), growth
            )
        else:
            problem = switching_problem(
                grid, params.d1, params.d2, np.full(grid.n, val), coeffs.beta, growth
            )
        vals.append(principal_eigen(problem).lam)
    return vals


def _task_sweep(config: ScenarioConfig, out: Path) -> RunArtifacts:
    report_obj = an.sweep_outcomes(
        config.params,
        config.grid,
        config.sweep_parameter,
        config.sweep_values,
        opts=replace(config.solver, store_fields=False),
    )
    rows = []
    for p in report_obj.points:
        floors = list(p.floors) + [np.nan] * (3 - len(p.floors))
        rows.append(
            [p.value, p.lambda_uv0, p.lambda_00w, p.outcome, floors[0], floors[1], floors[2]]
        )
    csv_path = _write_csv(
        out / "sweep.csv",
        ["value", "lambda_uv0", "lambda_00w", "outcome", "floor_u", "floor_v", "floor_w"],
        rows,
    )
    svg = svgplot.line_plot(
        out / "sweep.svg",
        [p.value for p in report_obj.points],
        [
            [p.lambda_uv0 for p in report_obj.points],
            [p.lambda_00w for p in report_obj.points],
        ],
        ["invasion of w", "invasion of (u,v)"],
        title=f"Semi-trivial eigenvalues vs {report_obj.parameter}",
        xlabel=report_obj.parameter,
        ylabel="lambda",
    )
    lines = [
        "task: sweep",
        f"parameter: {report_obj.parameter}",
        f"empirical C1: {report_obj.empirical_c1}",
        f"empirical C2: {report_obj.empirical_c2}",
    ]
    failures = [p for p in report_obj.points if p.note]
    for p in report_obj.points:
        lines.append(
            f"value {_fmt(p.value)}: {p.outcome} (lambda_uv0 {_fmt(p.lambda_uv0)}, "
            f"lambda_00w {_fmt(p.lambda_00w)}){'; ' + p.note if p.note else ''}"
        )
    lines.append(f"status: {'OK' if not failures else 'PARTIAL'}")
    report = _write_report(out / "report.txt", lines)
    return RunArtifacts([csv_path], [svg], report, EXIT_OK)


def _task_verify(config: ScenarioConfig, out: Path) -> RunArtifacts:
    n_dyn = config.grid.n
    ctx = VerifyContext(
        params=config.params,
        n_dynamics=n_dyn,
        n_eigen=2 * n_dyn - 1,
        n_fine=4 * n_dyn - 3,
        domain=(config.grid.a, config.grid.b),
        seed=config.seed,
    )
    results = run_battery(ctx, groups=config.verify_groups)
    csv_path = _write_csv(
        out / "verify_results.csv",
        ["group", "check", "status", "detail"],
        [[r.group, r.name, r.status, r.detail] for r in results],
    )
    lines = ["verification report", "==================="]
    failed = 0
    for gname in dict.fromkeys(r.group for r in results):
        lines.append("")
        lines.append(f"[{gname}]")
        for r in results:
            if r.group != gname:
                continue
            lines.append(f"  {r.status:4s} {r.name}: {r.detail}")
            if r.status == "FAIL":
                failed += 1
    lines.append("")
    n_pass = sum(1 for r in results if r.status == "PASS")
    n_skip = sum(1 for r in results if r.status == "SKIP")
    lines.append(f"summary: {n_pass} passed, {failed} failed, {n_skip} skipped")
    if any("discretization" in r.detail for r in results if r.status == "FAIL"):
        lines.append("note: failures may indicate the configured resolution is too coarse")
    report = _write_report(out / "verify_report.txt", lines)
    return RunArtifacts([csv_path], [], report, EXIT_OK if failed == 0 else EXIT_CHECK_FAILED)


def run_scenario(config: ScenarioConfig) -> RunArtifacts:
    """Execute the configured task, writing all artifacts to the output directory."""
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    try:
        if config.task == "eigen":
            return _task_eigen(config, out)
        if config.task == "steady":
            return _task_evolve(config, out, demand_steady=True)
        if config.task == "simulate":
            return _task_evolve(config, out, demand_steady=False)
        if config.task == "threshold":
            return _task_threshold(config, out)
        if config.task == "sweep":
            return _task_sweep(config, out)
        return _task_verify(config, out)
    except HypothesisError as exc:
        report = _write_report(
            out / "report.txt",
            [f"task: {config.task}", f"status: FAILED precondition '{exc}'"],
        )
        return RunArtifacts([], [], report, EXIT_HYPOTHESIS)
    except (ConvergenceError, StepOvershootError, np.linalg.LinAlgError) as exc:
        report = _write_report(
            out / "report.txt",
            [f"task: {config.task}", f"status: NUMERICAL FAILURE '{exc}'"],
        )
        return RunArtifacts([], [], report, EXIT_NUMERICAL)
    except (ConfigError, ValueError) as exc:
        report = _write_report(
            out / "report.txt",
            [f"task: {config.task}", f"status: INVALID '{exc}'"],
        )
        return RunArtifacts([], [], report, EXIT_VALIDATION)


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dispersal-lab",
        description=(
            "Numerical laboratory for populations switching between two diffusion "
            "rates and their competition with a single-rate diffuser."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for task in TASKS:
        task_parser = sub.add_parser(task, help=f"run the {task} task from a JSON config")
        task_parser.add_argument("--config", required=True, help="path to the scenario JSON")
        task_parser.add_argument("--out", default=None, help="override the output directory")
        task_parser.add_argument("--seed", type=int, default=None, help="override the seed")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if config.task != args.command:
        config = replace(config, task=args.command)
    if args.out is not None:
        config = replace(config, output_dir=Path(args.out))
    if args.seed is not None:
        config = replace(config, seed=args.seed)

    artifacts = run_scenario(config)
    if artifacts.report_path is not None:
        print(artifacts.report_path.read_text(encoding="utf-8"), end="")
    return artifacts.exit_status


if __name__ == "__main__":
    sys.exit(main())
