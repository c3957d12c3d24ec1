"""Command-line front end.

Subcommands:

    algebra check <cfg>     validation, Killing form, center, semisimplicity
    euler run <cfg>         integrate the Euler system, write xi trajectory
    floquet analyze <cfg>   monodromy, classification, periodic generators
    integral find <cfg>     full pipeline; write xi(t) and the generator list
    integral verify <cfg>   integrate the flow and report conservation drift
    mp demo                 bundled Milne-Pinney showcase
    sweep <cfg>             parameter sweep producing a stability-chart CSV

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 I/O error.  Human-readable diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import itertools
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .algebra import (
    AlgebraError,
    center,
    is_semisimple,
    jacobi_residual,
    killing_gram,
)
from .config import (
    ConfigError,
    RunConfig,
    config_from_dict,
    default_x0,
    load_config,
    resolve_algebra,
    resolve_basis,
    resolve_curve,
    resolve_flow_steps,
    resolve_horizon,
    resolve_system,
)
from .dynamics import (
    DomainExit,
    conservation_report,
    first_integral,
    integrate_flow,
)
from .expressions import DomainError, ParseError, UnboundVariable
from .floquet import (
    EigenConvergenceFailure,
    NoGeneratorFound,
    NonInvertibleFundamental,
    TAG_NULL,
    TAG_OFF_CIRCLE,
    floquet_classify,
    fundamental_solution,
    integrate_euler,
    periodic_generators,
    select_generator,
)
from .milne_pinney import mp_params, mp_system
from .output import (
    fmt,
    write_classification_csv,
    write_csv,
    write_generators_csv,
    write_trajectory_csv,
    write_xi_csv,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits the process on errors; surface them as exit code 1 instead
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _add_common(sub, config_required: bool = True):
    sub.add_argument("cfg", nargs="?", default=None, help="path to the JSON config")
    sub.add_argument("--config", default=None, help="path to the JSON config (alternative to the positional)")
    sub.add_argument("--out", default=None, help="output directory (overrides the config)")
    sub.add_argument("--steps", type=int, default=None, help="steps per period (overrides the config)")
    sub.add_argument("--seed", type=int, default=None, help="seed for sample-point generation")
    sub.required_config = config_required  # type: ignore[attr-defined]


def build_parser() -> _Parser:
    parser = _Parser(prog="liefloquet", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)

    algebra = subs.add_parser("algebra", help="algebra inspection")
    algebra_subs = algebra.add_subparsers(dest="subcommand", required=True)
    check = algebra_subs.add_parser("check", help="validate and report on an algebra")
    _add_common(check)
    check.add_argument("--jacobi-tol", type=float, default=None, help="relax the Jacobi tolerance")

    euler = subs.add_parser("euler", help="Euler-system integration")
    euler_subs = euler.add_subparsers(dest="subcommand", required=True)
    _add_common(euler_subs.add_parser("run", help="integrate dxi/dt = -[phi(t), xi]"))

    floq = subs.add_parser("floquet", help="monodromy analysis")
    floq_subs = floq.add_subparsers(dest="subcommand", required=True)
    _add_common(floq_subs.add_parser("analyze", help="classification and generators"))

    integral = subs.add_parser("integral", help="first integrals")
    integral_subs = integral.add_subparsers(dest="subcommand", required=True)
    _add_common(integral_subs.add_parser("find", help="run the pipeline, write xi(t)"))
    _add_common(integral_subs.add_parser("verify", help="flow plus conservation report"))

    mp = subs.add_parser("mp", help="bundled Milne-Pinney showcase")
    mp_subs = mp.add_subparsers(dest="subcommand", required=True)
    demo = mp_subs.add_parser("demo", help="run the bundled showcase")
    _add_common(demo, config_required=False)

    sweep = subs.add_parser("sweep", help="parameter sweep")
    _add_common(sweep)
    sweep.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    return parser


def _load(args) -> RunConfig:
    path = args.config or args.cfg
    if path is None:
        raise ConfigError("a config file is required: pass it positionally or with --config")
    cfg = load_config(path)
    if args.out is not None:
        cfg = replace(cfg, output=replace(cfg.output, dir=args.out))
    if args.steps is not None:
        cfg = replace(cfg, numerics=replace(cfg.numerics, steps_per_period=args.steps))
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "jacobi_tol", None) is not None:
        cfg = replace(cfg, jacobi_tol=args.jacobi_tol)
    return cfg


def _outpath(cfg: RunConfig, suffix: str) -> Path:
    return Path(cfg.output.dir) / f"{cfg.output.prefix}_{suffix}"


def _matrix_lines(M: np.ndarray) -> str:
    return "\n".join("  [" + ", ".join(fmt(v) for v in row) + "]" for row in M)


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_algebra_check(args) -> int:
    cfg = _load(args)
    algebra = resolve_algebra(cfg)
    worst, idx = jacobi_residual(algebra.constants)
    G = killing_gram(algebra)
    zbasis = center(algebra)
    print(f"algebra: dim={algebra.dim} labels={' '.join(algebra.labels)}")
    print("antisymmetry: ok (exact)")
    print(f"jacobi: ok, max residual {worst:.3e} at (i,j,k,r)={idx}")
    print("killing gram:")
    print(_matrix_lines(G))
    print(f"center: dimension {len(zbasis)}")
    for row in zbasis:
        print("  [" + ", ".join(fmt(v) for v in row) + "]")
    print(f"semisimple: {is_semisimple(algebra)}")
    return EXIT_OK


def _cmd_euler_run(args) -> int:
    cfg = _load(args)
    algebra = resolve_algebra(cfg)
    curve = resolve_curve(cfg)
    xi0 = np.array(cfg.xi0, dtype=float) if cfg.xi0 is not None else np.eye(algebra.dim)[0]
    horizon = resolve_horizon(cfg, periods=1.0)
    steps = resolve_flow_steps(cfg, horizon)
    times, states = integrate_euler(algebra, curve, xi0, horizon, steps)
    path = _outpath(cfg, "xi.csv")
    write_xi_csv(path, times, states)
    print(f"euler: {len(times)} nodes over [0, {horizon!r}] -> {path}")
    return EXIT_OK


def _analyze(cfg: RunConfig):
    algebra = resolve_algebra(cfg)
    curve = resolve_curve(cfg)
    fund = fundamental_solution(algebra, curve, cfg.numerics.steps_per_period)
    cls = floquet_classify(algebra, fund.monodromy)
    gens = periodic_generators(algebra, fund, cls, center(algebra))
    return algebra, fund, cls, gens


def _print_classification(cls, gens) -> None:
    print("monodromy spectrum:")
    for p in cls.eigenpairs:
        print(
            f"  lambda = {fmt(p.value.real)} + {fmt(p.value.imag)}i  "
            f"|lambda| = {fmt(abs(p.value))}  admissibility = {fmt(p.admissibility)}  tag = {p.tag}"
        )
    unused = [p for p in cls.eigenpairs if p.tag in (TAG_NULL, TAG_OFF_CIRCLE)]
    if unused:
        print(f"side report: {len(unused)} eigenpair(s) produced no generator "
              f"({', '.join(p.tag for p in unused)})")
    print(f"generators: {len(gens)}")
    for g in gens:
        print(
            "  [" + ", ".join(fmt(v) for v in g.vector) + f"]  x{g.period_multiple}T  {g.provenance}"
        )


def _cmd_floquet_analyze(args) -> int:
    cfg = _load(args)
    _, fund, cls, gens = _analyze(cfg)
    print("monodromy matrix:")
    print(_matrix_lines(fund.monodromy))
    _print_classification(cls, gens)
    write_classification_csv(_outpath(cfg, "classification.csv"), cls)
    write_generators_csv(_outpath(cfg, "generators.csv"), gens)
    print(f"wrote {_outpath(cfg, 'classification.csv')} and {_outpath(cfg, 'generators.csv')}")
    return EXIT_OK


def _pick_integral(cfg: RunConfig):
    algebra, fund, cls, gens = _analyze(cfg)
    basis = resolve_basis(cfg)
    if cfg.alpha is not None:
        alpha = np.array(cfg.alpha, dtype=float)
        chosen = None
        integral = first_integral(fund, basis, alpha)
    else:
        chosen = select_generator(gens)
        if chosen is None:
            raise NoGeneratorFound(cls)
        integral = first_integral(fund, basis, chosen.vector, period_multiple=chosen.period_multiple)
    return fund, cls, gens, chosen, integral


def _cmd_integral_find(args) -> int:
    cfg = _load(args)
    fund, cls, gens, chosen, integral = _pick_integral(cfg)
    _print_classification(cls, gens)
    if chosen is not None:
        print(
            f"selected generator: [{', '.join(fmt(v) for v in integral.alpha)}] "
            f"x{chosen.period_multiple}T ({chosen.provenance})"
        )
    else:
        print(f"using alpha from config: [{', '.join(fmt(v) for v in integral.alpha)}]")
    write_xi_csv(_outpath(cfg, "xi.csv"), integral.xi_times, integral.xi_states)
    write_generators_csv(_outpath(cfg, "generators.csv"), gens)
    print(f"wrote {_outpath(cfg, 'xi.csv')} and {_outpath(cfg, 'generators.csv')}")
    return EXIT_OK


def _cmd_integral_verify(args) -> int:
    cfg = _load(args)
    fund, cls, gens, chosen, integral = _pick_integral(cfg)
    x0 = default_x0(cfg)
    if x0 is None:
        raise ConfigError("config needs an 'x0' field for integral verify")
    system = resolve_system(cfg)
    horizon = resolve_horizon(cfg, periods=2.0)
    steps = resolve_flow_steps(cfg, horizon)
    traj = integrate_flow(system, np.array(x0, dtype=float), horizon, steps)
    report = conservation_report(integral, traj)
    write_trajectory_csv(_outpath(cfg, "trajectory.csv"), traj, system.basis.space, [integral])
    print(f"closure residual: {system.closure_report:.3e}")
    print(
        f"conservation: samples={report.samples} max_abs_drift={report.max_abs_drift:.3e} "
        f"relative_drift={report.relative_drift:.3e}"
    )
    print(f"wrote {_outpath(cfg, 'trajectory.csv')}")
    return EXIT_OK


def _cmd_mp_demo(args) -> int:
    steps = args.steps if args.steps is not None else 4000
    outdir = Path(args.out) if args.out is not None else Path(".")
    params = mp_params()
    cfg = config_from_dict({"preset": "milne_pinney", "numerics": {"steps_per_period": steps}})
    algebra, fund, cls, gens = _analyze(cfg)
    chosen = select_generator(gens)
    if chosen is None:
        raise NoGeneratorFound(cls)
    system = mp_system(params)
    integral = first_integral(fund, system.basis, chosen.vector, period_multiple=chosen.period_multiple)
    horizon = 2.0 * params.period
    traj = integrate_flow(system, np.array([2.0, 0.0]), horizon, 2 * steps)
    report = conservation_report(integral, traj)

    write_classification_csv(outdir / "mp_classification.csv", cls)
    write_xi_csv(outdir / "mp_xi.csv", integral.xi_times, integral.xi_states)
    write_trajectory_csv(outdir / "mp_trajectory.csv", traj, system.basis.space, [integral])

    _print_classification(cls, gens)
    print(f"selected generator: [{', '.join(fmt(v) for v in integral.alpha)}] "
          f"x{chosen.period_multiple}T ({chosen.provenance})")
    print(f"closure residual: {system.closure_report:.3e}")
    print(
        f"conservation: samples={report.samples} max_abs_drift={report.max_abs_drift:.3e} "
        f"relative_drift={report.relative_drift:.3e}"
    )
    print(f"wrote {outdir / 'mp_classification.csv'}, {outdir / 'mp_xi.csv'}, {outdir / 'mp_trajectory.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _sweep_cell(payload):
    cfg, names, values, n = payload
    for name, value in zip(names, values):
        cfg = cfg.with_parameter(name, float(value))
    row = [fmt(v) for v in values]
    try:
        algebra = resolve_algebra(cfg)
        curve = resolve_curve(cfg)
        fund = fundamental_solution(algebra, curve, cfg.numerics.steps_per_period)
        cls = floquet_classify(algebra, fund.monodromy)
        gens = periodic_generators(algebra, fund, cls, center(algebra))
        lam_cells = []
        for p in cls.eigenpairs:
            lam_cells += [fmt(p.value.real), fmt(p.value.imag)]
        max_dev = max(abs(abs(p.value) - 1.0) for p in cls.eigenpairs)
        max_abs = max(abs(p.value) for p in cls.eigenpairs)
        tags = ";".join(p.tag for p in cls.eigenpairs)
        return row + lam_cells + [fmt(max_dev), fmt(max_abs), tags, str(len(gens)), ""]
    except Exception as err:  # per-cell isolation: a resonant cell must not kill the chart
        return row + [""] * (2 * n) + ["", "", "", "", f"{type(err).__name__}: {err}"]


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    if cfg.sweep is None:
        raise ConfigError("config needs a 'sweep' block for the sweep command")
    declared = set(cfg.parameter_dict)
    for axis in cfg.sweep.axes:
        if axis.name not in declared:
            raise ConfigError(
                f"swept parameter {axis.name!r} is not declared in 'parameters'"
            )
    algebra = resolve_algebra(cfg)
    n = algebra.dim
    names = [axis.name for axis in cfg.sweep.axes]
    grids = [axis.grid() for axis in cfg.sweep.axes]
    cells = list(itertools.product(*grids))  # row-major grid order
    payloads = [(cfg, names, values, n) for values in cells]

    jobs = max(1, args.jobs)
    if jobs == 1:
        rows = [_sweep_cell(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, payloads))  # map preserves grid order

    header = names + [
        item for i in range(n) for item in (f"lambda{i + 1}_re", f"lambda{i + 1}_im")
    ] + ["max_abs_lambda_minus_1", "max_abs_lambda", "tags", "generator_count", "error"]
    path = _outpath(cfg, "sweep.csv")
    write_csv(path, header, rows)
    failures = sum(1 for r in rows if r[-1])
    print(f"sweep: {len(rows)} cells ({failures} failed) -> {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_HANDLERS = {
    ("algebra", "check"): _cmd_algebra_check,
    ("euler", "run"): _cmd_euler_run,
    ("floquet", "analyze"): _cmd_floquet_analyze,
    ("integral", "find"): _cmd_integral_find,
    ("integral", "verify"): _cmd_integral_verify,
    ("mp", "demo"): _cmd_mp_demo,
    ("sweep", None): _cmd_sweep,
}


def run_command(argv: list[str]) -> int:
    """Parse argv, dispatch, and map failures onto documented exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_VALIDATION

    handler = _HANDLERS[(args.command, getattr(args, "subcommand", None))]
    try:
        return handler(args)
    except (ConfigError, AlgebraError, ParseError, UnboundVariable, ValueError) as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NoGeneratorFound, EigenConvergenceFailure, DomainExit, NonInvertibleFundamental, DomainError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
