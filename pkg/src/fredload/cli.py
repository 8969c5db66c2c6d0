"""Command-line front end.

    fredload analyze      FILE
    fredload solve        FILE --lambda X
    fredload sweep        FILE --lambda-min A --lambda-max B --steps N
    fredload find-poles   FILE --lambda-min A --lambda-max B
    fredload oracle-check FILE --lambda X [--threshold T]

Data goes to stdout as CSV with a header row (17 significant digits,
stable ordering); per-run summaries go to stderr. Exit codes: 0 ok,
1 check failure or internal error, 2 no solution exists, 3 a route
precondition failed, 4 parse error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

import numpy as np

from . import functionals, kernel_ops, load_system, oracle, solver
from .errors import (
    CharacteristicNumberError,
    ConvergenceError,
    DomainEvalError,
    ExprSyntaxError,
    FredloadError,
    NoSolutionError,
    ProblemFileError,
    RoutePreconditionError,
    SingularLoadSystemError,
)
from .kernel_ops import DiscreteKernel, discretize
from .problem import ProblemSpec
from .problemfile import Numerics, load_problem_file
from .quadrature import interpolate
from .solver import Solution

__all__ = ["main", "entry"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_NO_SOLUTION = 2
EXIT_ROUTE = 3
EXIT_PARSE = 4

ROUTES = ("auto", "regular", "successive", "nilpotent", "irregular", "oracle")


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _emit(line: str, out) -> None:
    print(line, file=out)


def _summary(line: str) -> None:
    print(line, file=sys.stderr)


def _print_matrix(name: str, matrix: np.ndarray) -> None:
    _summary(f"{name}:")
    for row in np.atleast_2d(matrix):
        _summary("  [" + ", ".join(_fmt(v) for v in row) + "]")


def _dispatch(
    problem: ProblemSpec,
    kernel: DiscreteKernel,
    lam: float,
    route: str,
    numerics: Numerics,
) -> Solution:
    if route == "auto":
        return solver.solve_auto(
            problem,
            kernel,
            lam,
            truncation=numerics.truncation,
            condition_tol=numerics.tol,
            nilpotency_tol=numerics.tol,
        )
    if route == "regular":
        return solver.solve_regular(problem, kernel, lam)
    if route == "successive":
        return solver.solve_successive(
            problem, kernel, lam, q=numerics.q,
            max_iter=numerics.max_iter, tol=numerics.tol,
        )
    if route == "nilpotent":
        iterated = kernel_ops.iterate_kernels(kernel, numerics.truncation)
        pnil = kernel_ops.nilpotency_index(iterated, numerics.tol)
        if pnil is None:
            raise RoutePreconditionError(
                f"kernel is not nilpotent within depth {numerics.truncation}"
            )
        return solver.solve_nilpotent(problem, iterated, pnil, lam, numerics.tol)
    if route == "irregular":
        return solver.solve_irregular(problem, kernel, lam, numerics.truncation)
    if route == "oracle":
        return oracle.dense_solve(problem, kernel, lam)
    raise ValueError(f"unknown route {route!r}")


def _setup(args) -> tuple[ProblemSpec, DiscreteKernel, Numerics]:
    parsed = load_problem_file(args.file)
    numerics = parsed.numerics
    if args.nodes is not None:
        numerics.nodes = args.nodes
    if getattr(args, "tol", None) is not None:
        numerics.tol = args.tol
    if getattr(args, "max_iter", None) is not None:
        numerics.max_iter = args.max_iter
    if getattr(args, "truncation", None) is not None:
        numerics.truncation = args.truncation
    if getattr(args, "q", None) is not None:
        numerics.q = args.q
    try:
        problem = parsed.build(numerics.nodes)
    except ValueError as exc:
        raise ProblemFileError(str(exc))
    kernel = discretize(problem.kernel, problem.master_rule(numerics.nodes))
    return problem, kernel, numerics


def _required_lambda(args, numerics: Numerics) -> float:
    if args.lam is not None:
        return args.lam
    if numerics.lam is not None:
        return numerics.lam
    raise ProblemFileError(
        "no lambda given: pass --lambda or set it in the [numerics] block"
    )


def _required_range(args, numerics: Numerics) -> tuple[float, float]:
    lam_min = args.lam_min if args.lam_min is not None else numerics.lam_min
    lam_max = args.lam_max if args.lam_max is not None else numerics.lam_max
    if lam_min is None or lam_max is None:
        raise ProblemFileError(
            "no lambda range given: pass --lambda-min/--lambda-max or set "
            "lambda_min/lambda_max in the [numerics] block"
        )
    if not lam_min < lam_max:
        raise ProblemFileError(f"need lambda_min < lambda_max, got [{lam_min}, {lam_max}]")
    return lam_min, lam_max


def cmd_analyze(args) -> int:
    problem, kernel, numerics = _setup(args)
    a0 = load_system.assemble_A0(problem)
    classification = load_system.classify(a0)
    reports = functionals.check_condition_one(problem, kernel, numerics.tol)
    iterated = kernel_ops.iterate_kernels(kernel, numerics.truncation)
    pnil = kernel_ops.nilpotency_index(iterated, numerics.tol)
    norm = kernel_ops.operator_norm(kernel)

    out = sys.stdout
    _emit(f"interval: [{_fmt(problem.a)}, {_fmt(problem.b)}]", out)
    _emit(f"nodes: {kernel.rule.n}", out)
    _emit(f"loads: {problem.n}", out)
    _emit("A0:", out)
    for row in a0:
        _emit("  [" + ", ".join(_fmt(v) for v in row) + "]", out)
    _emit(f"det(E - A0): {_fmt(classification.det)}", out)
    _emit(f"classification: {classification.kind}", out)
    for k, report in enumerate(reports, start=1):
        status = "holds" if report.holds else "fails"
        _emit(
            f"condition (load {k} annihilates kernel slices): {status} "
            f"(max deviation {_fmt(report.deviation)})",
            out,
        )
    if pnil is None:
        _emit(f"nilpotency index: none found within depth {numerics.truncation}", out)
    else:
        _emit(f"nilpotency index: {pnil}", out)
    _emit(f"operator norm: {_fmt(norm)}", out)
    if classification.is_regular:
        bound_l = solver.successive_bound(problem, kernel)
        admissible = float("inf") if bound_l == 0.0 else numerics.q / bound_l
        _emit(f"successive bound l: {_fmt(bound_l)}", out)
        _emit(
            f"successive admissible |lambda| <= q/l: {_fmt(admissible)} (q = {numerics.q:g})",
            out,
        )
    if classification.is_irregular_identity:
        coeff_mats = load_system.taylor_A(problem, iterated, numerics.truncation)
        mags = [float(np.max(np.abs(m))) for m in coeff_mats]
        scale = max(mags) if mags else 0.0
        threshold = solver.POLE_COEFF_TOL * (1.0 + scale)
        pole = next((m for m, mag in enumerate(mags, start=1) if mag > threshold), None)
        if pole is None:
            _emit(
                f"pole order: none (load coupling vanishes up to depth {numerics.truncation})",
                out,
            )
        else:
            cond = float(np.linalg.cond(coeff_mats[pole - 1]))
            _emit(f"pole order: {pole}", out)
            _emit(f"leading coefficient condition number: {_fmt(cond)}", out)
    return EXIT_OK


def _solution_summary(solution: Solution) -> None:
    _summary(f"route: {solution.route}")
    _summary(f"lambda: {_fmt(solution.lam)}")
    _summary("x_gamma: [" + ", ".join(_fmt(v) for v in solution.x_gamma) + "]")
    _summary(f"residual: {_fmt(solution.residual)}")
    _summary(f"classification: {solution.classification.kind}")
    if solution.pole_order is not None:
        _summary(f"pole order: {solution.pole_order}")
    if solution.expansion is not None:
        _summary(f"contraction q at lambda: {_fmt(solution.expansion.q)}")
        _summary(f"certified radius rho: {_fmt(solution.expansion.rho)}")
    if solution.history is not None:
        _summary(f"iterations: {len(solution.history)}")
    if solution.note:
        _summary(f"note: {solution.note}")


def cmd_solve(args) -> int:
    problem, kernel, numerics = _setup(args)
    lam = _required_lambda(args, numerics)
    solution = _dispatch(problem, kernel, lam, args.route, numerics)
    out = sys.stdout
    _emit("t,x", out)
    for t, x in zip(kernel.rule.nodes, solution.x.values):
        _emit(f"{_fmt(t)},{_fmt(x)}", out)
    _solution_summary(solution)
    return EXIT_OK


def cmd_sweep(args) -> int:
    problem, kernel, numerics = _setup(args)
    lam_min, lam_max = _required_range(args, numerics)
    steps = args.steps if args.steps is not None else (numerics.steps or 20)
    if steps < 2:
        raise ProblemFileError("sweep needs at least 2 steps")
    probes = [problem.a, 0.5 * (problem.a + problem.b), problem.b]
    out = sys.stdout
    header = "lambda," + ",".join(f"x({p:g})" for p in probes) + ",x_gamma_norm,residual,status"
    _emit(header, out)
    for lam in np.linspace(lam_min, lam_max, steps):
        lam = float(lam)
        try:
            solution = _dispatch(problem, kernel, lam, args.route, numerics)
        except NoSolutionError:
            _emit(f"{_fmt(lam)},,,,,,unsolvable:no-solution", out)
            continue
        except (
            RoutePreconditionError,
            CharacteristicNumberError,
            SingularLoadSystemError,
            ConvergenceError,
        ) as exc:
            code = _error_code(exc)
            _emit(f"{_fmt(lam)},,,,,,unsolvable:{code}", out)
            continue
        values = [interpolate(solution.x, p) for p in probes]
        norm = float(np.max(np.abs(solution.x_gamma)))
        _emit(
            f"{_fmt(lam)},"
            + ",".join(_fmt(v) for v in values)
            + f",{_fmt(norm)},{_fmt(solution.residual)},ok",
            out,
        )
    return EXIT_OK


def cmd_find_poles(args) -> int:
    problem, kernel, numerics = _setup(args)
    lam_min, lam_max = _required_range(args, numerics)
    scan_points = args.scan_points if args.scan_points is not None else numerics.scan_points
    roots = kernel_ops.find_characteristic_numbers(kernel, lam_min, lam_max, scan_points)
    spacing = (lam_max - lam_min) / (scan_points - 1)
    out = sys.stdout
    _emit("lambda,abs_det_left,abs_det_right", out)
    for root in roots:
        left = max(lam_min, root - spacing)
        right = min(lam_max, root + spacing)
        _emit(
            f"{_fmt(root)},{_fmt(kernel_ops.det_magnitude(kernel, left))},"
            f"{_fmt(kernel_ops.det_magnitude(kernel, right))}",
            out,
        )
    _summary(f"characteristic numbers found: {len(roots)}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    problem, kernel, numerics = _setup(args)
    lam = _required_lambda(args, numerics)
    route = args.route if args.route != "oracle" else "auto"
    solution = _dispatch(problem, kernel, lam, route, numerics)
    reference = oracle.dense_solve(problem, kernel, lam)
    disagreement = float(np.max(np.abs(solution.x.values - reference.x.values)))
    out = sys.stdout
    _emit(f"route: {solution.route}", out)
    _emit(f"route residual: {_fmt(solution.residual)}", out)
    _emit(f"oracle residual: {_fmt(reference.residual)}", out)
    _emit(f"max disagreement: {_fmt(disagreement)}", out)
    if args.threshold is not None and disagreement > args.threshold:
        _summary(
            f"disagreement {_fmt(disagreement)} exceeds threshold {_fmt(args.threshold)}"
        )
        return EXIT_FAILURE
    return EXIT_OK


def _error_code(exc: Exception) -> str:
    if isinstance(exc, NoSolutionError):
        return "no-solution"
    if isinstance(exc, CharacteristicNumberError):
        return "characteristic-number"
    if isinstance(exc, SingularLoadSystemError):
        return "singular-load-system"
    if isinstance(exc, ConvergenceError):
        return "no-convergence"
    if isinstance(exc, RoutePreconditionError):
        return "route-precondition"
    if isinstance(exc, (ProblemFileError, ExprSyntaxError)):
        return "parse-error"
    return "internal"


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors, which is reserved here
    # for "no solution exists"; remap to the parse-error code.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error[parse-error]: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="fredload",
        description="Solve second-kind Fredholm integral equations with loads.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("file", help="problem file")
        p.add_argument("--nodes", type=int, default=None, help="master rule node count")
        p.add_argument("--tol", type=float, default=None,
                       help="tolerance for condition checks / iteration stopping")
        p.add_argument("--max-iter", type=int, default=None, dest="max_iter")
        p.add_argument("--truncation", type=int, default=None,
                       help="series/iterated-kernel depth")
        p.add_argument("--q", type=float, default=None,
                       help="contraction target in (0, 1)")

    p_analyze = sub.add_parser("analyze", help="report the problem's structure")
    add_common(p_analyze)
    p_analyze.set_defaults(func=cmd_analyze)

    p_solve = sub.add_parser("solve", help="solve at one lambda, CSV of (t, x)")
    add_common(p_solve)
    p_solve.add_argument("--lambda", type=float, default=None, dest="lam")
    p_solve.add_argument("--route", choices=ROUTES, default="auto")
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="solve over a lambda range, CSV per lambda")
    add_common(p_sweep)
    p_sweep.add_argument("--lambda-min", type=float, default=None, dest="lam_min")
    p_sweep.add_argument("--lambda-max", type=float, default=None, dest="lam_max")
    p_sweep.add_argument("--steps", type=int, default=None)
    p_sweep.add_argument("--route", choices=ROUTES, default="auto")
    p_sweep.set_defaults(func=cmd_sweep)

    p_poles = sub.add_parser("find-poles", help="locate characteristic numbers")
    add_common(p_poles)
    p_poles.add_argument("--lambda-min", type=float, default=None, dest="lam_min")
    p_poles.add_argument("--lambda-max", type=float, default=None, dest="lam_max")
    p_poles.add_argument("--scan-points", type=int, default=None, dest="scan_points")
    p_poles.set_defaults(func=cmd_find_poles)

    p_check = sub.add_parser("oracle-check", help="compare a route against the dense oracle")
    add_common(p_check)
    p_check.add_argument("--lambda", type=float, default=None, dest="lam")
    p_check.add_argument("--route", choices=ROUTES, default="auto")
    p_check.add_argument("--threshold", type=float, default=1e-6,
                         help="fail (exit 1) when max disagreement exceeds this")
    p_check.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ProblemFileError, ExprSyntaxError) as exc:
        _summary(f"error[parse-error]: {exc}")
        return EXIT_PARSE
    except NoSolutionError as exc:
        _summary(f"error[no-solution]: {exc}")
        return EXIT_NO_SOLUTION
    except (
        RoutePreconditionError,
        CharacteristicNumberError,
        SingularLoadSystemError,
        ConvergenceError,
    ) as exc:
        _summary(f"error[{_error_code(exc)}]: {exc}")
        return EXIT_ROUTE
    except (DomainEvalError, FredloadError) as exc:
        _summary(f"error[{_error_code(exc)}]: {exc}")
        return EXIT_FAILURE
    except Exception as exc:  # last resort: keep the exit-code contract
        _summary(f"error[internal]: {type(exc).__name__}: {exc}")
        return EXIT_FAILURE


def entry() -> None:
    sys.exit(main(sys.argv[1:]))
