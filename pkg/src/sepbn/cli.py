"""Command-line front end.

Exit codes: 0 success or affirmative verdict, 1 negative verdict, 2 bad
input, 3 internal numerical error. Reports go to stdout, diagnostics to
stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import formats
from .errors import (ConsistencyError, NotSeparableError, RepairInfeasibleError,
                     SizeLimitError)
from .formats import FormatError, fmt
from .influence import (ORACLE_LIMIT, exact_joint_oracle, iterate_marginals,
                        product_joint, sample_trajectory)
from .linalg import (VariableSet, build_basis_matrix, build_event_matrix,
                     event_rank, null_space_basis, numerical_rank)
from .separability import (SEPARABLE_TOL, approximate_separable, compose,
                           factorize, test_separable)

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3
ORACLE_ALARM = 1e-9


class UsageError(Exception):
    pass


def _emit(report: dict, as_json: bool, out) -> None:
    if as_json:
        out.write(json.dumps(report) + "\n")
        return
    for k, v in report.items():
        if isinstance(v, bool):
            v = str(v).lower()
        elif isinstance(v, float):
            v = f"{v:.6g}"
        elif isinstance(v, list):
            v = " ".join(f"{x:.12g}" if isinstance(x, float) else str(x) for x in v)
        out.write(f"{k}: {v}\n")


def _rank_report(vars):
    b = build_event_matrix(vars).entries
    a = build_basis_matrix(vars).entries
    return {"event_matrix_shape": f"{b.shape[0]}x{b.shape[1]}",
            "basis_matrix_shape": f"{a.shape[0]}x{a.shape[1]}",
            "rank_formula": event_rank(vars),
            "rank_numerical": numerical_rank(b)}


def cmd_test(args, out):
    c = formats.load_cpt(args.input)
    verdict = test_separable(c, args.tol)
    report = {"separable": verdict.separable, "residual": verdict.residual,
              "tolerance": verdict.tol}
    report.update(_rank_report(c.vars))
    _emit(report, args.json, out)
    return EXIT_OK if verdict.separable else EXIT_NEGATIVE


def cmd_factor(args, out):
    c = formats.load_cpt(args.input)
    try:
        f = factorize(c, args.tol)
    except NotSeparableError as e:
        print(f"error: {e}; try `sepbn approx` for a least-squares approximation",
              file=sys.stderr)
        _emit({"separable": False, "residual": e.residual}, args.json, out)
        return EXIT_NEGATIVE
    formats.write_json(formats.factorization_to_dict(f), args.output)
    _emit({"separable": True, "gammas": [fmt(g) for g in f.gammas]}, args.json, out)
    return EXIT_OK


def cmd_compose(args, out):
    f = formats.load_factorization(args.input)
    c = compose(f)
    formats.write_json(formats.cpt_to_dict(c), args.output)
    _emit({"rows": c.vars.joint_size, "columns": c.vars.target_card}, args.json, out)
    return EXIT_OK


def cmd_approx(args, out):
    c = formats.load_cpt(args.input)
    f, rep = approximate_separable(c, args.tol)
    formats.write_json(formats.factorization_to_dict(f), args.output)
    _emit({"projection_residual": rep.projection_residual,
           "repair_deviation": rep.repair_deviation,
           "repair_iterations": rep.iterations,
           "gammas": [fmt(g) for g in f.gammas]}, args.json, out)
    return EXIT_OK


def _indicator(state, cards):
    return [np.eye(m)[s] for s, m in zip(state.statuses, cards)]


def cmd_simulate(args, out):
    model = formats.load_model(args.model)
    kind, init = formats.load_init(args.init, model)
    if kind == "state":
        init.check(model)
    target = open(args.output, "w", newline="") if args.output else out
    try:
        writer = csv.writer(target, lineterminator="\n")
        if args.sample:
            if args.seed is None:
                raise UsageError("--sample requires --seed")
            if args.oracle:
                raise UsageError("--oracle cannot be combined with --sample")
            if kind != "state":
                raise UsageError("--sample needs an init file with a \"state\"")
            writer.writerow(["step", "site", "status"])
            for k, st in enumerate(sample_trajectory(model, init, args.steps, args.seed)):
                for i, s in enumerate(st.statuses):
                    writer.writerow([k, i, s + 1])
            return EXIT_OK

        marginals = init if kind == "marginals" else _indicator(init, model.site_cards)
        hist = iterate_marginals(model, marginals, args.steps)
        oracle = None
        if args.oracle:
            if model.joint_size > ORACLE_LIMIT:
                raise UsageError(f"--oracle needs at most {ORACLE_LIMIT} joint states, "
                                 f"model has {model.joint_size}")
            oracle = exact_joint_oracle(model, product_joint(marginals), args.steps,
                                        history=True)
        header = ["step", "site", "status", "probability"]
        writer.writerow(header + (["oracle_probability"] if oracle else []))
        worst = 0.0
        for k, ms in enumerate(hist):
            for i, p in enumerate(ms):
                for s, x in enumerate(p):
                    row = [k, i, s + 1, f"{fmt(x):.12g}"]
                    if oracle:
                        y = oracle[k][i][s]
                        worst = max(worst, abs(x - y))
                        row.append(f"{fmt(y):.12g}")
                    writer.writerow(row)
    finally:
        if args.output:
            target.close()
    if oracle:
        print(f"max_deviation: {worst:.6g}", file=sys.stderr)
        if worst > ORACLE_ALARM:
            print("error: marginal recursion disagrees with the joint chain", file=sys.stderr)
            return EXIT_INTERNAL
    return EXIT_OK


def cmd_inspect(args, out):
    vars = VariableSet(tuple(args.cards), 1)
    report = _rank_report(vars)
    report["dropped_columns"] = list(build_basis_matrix(vars).dropped_columns)
    report["null_space_basis"] = [v.tolist() for v in null_space_basis(vars)]
    if args.json:
        out.write(json.dumps(report) + "\n")
    else:
        nulls = report.pop("null_space_basis")
        _emit(report, False, out)
        for v in nulls:
            out.write("null_vector: " + " ".join(str(x) for x in v) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sepbn",
                                description="Separability tools for conditional probability tables.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(fn=fn)
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        return sp

    sp = add("test", cmd_test, "test whether a CPT is separable")
    sp.add_argument("input")
    sp.add_argument("--tol", type=float, default=SEPARABLE_TOL)

    sp = add("factor", cmd_factor, "factorize a separable CPT")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--tol", type=float, default=SEPARABLE_TOL)

    sp = add("compose", cmd_compose, "rebuild a CPT from a factorization")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", required=True)

    sp = add("approx", cmd_approx, "least-squares separable approximation")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--tol", type=float, default=SEPARABLE_TOL)

    sp = add("simulate", cmd_simulate, "evolve or sample an influence model")
    sp.add_argument("model")
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--init", required=True)
    sp.add_argument("--sample", action="store_true")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--oracle", action="store_true")
    sp.add_argument("-o", "--output")

    sp = add("inspect", cmd_inspect, "event-matrix facts for a list of cardinalities")
    sp.add_argument("cards", type=int, nargs="+")
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    if getattr(args, "steps", 0) is not None and getattr(args, "steps", 0) < 0:
        print("error: --steps must be nonnegative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.fn(args, out)
    except (FormatError, UsageError, SizeLimitError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (ConsistencyError, RepairInfeasibleError, np.linalg.LinAlgError) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
