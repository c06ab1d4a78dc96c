"""Command-line surface tying the library together.

Subcommands: verify, solve, search, continue, probe, integrate. Every
command reads a JSON problem document, prints a one-line summary to
stdout, and writes its full report to --out (atomically); without --out
the report is printed after the summary. Exit codes: 0 success, 1
verification/runtime failure, 2 bad input or flags, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import _kernels
from .criterion import (
    lemma_identity_gap,
    residual,
    weighted_centroid_residual,
)
from .documents import parse_document, write_text_atomic
from .dynamics import (
    integrate,
    relative_equilibrium_deviation,
    rigid_rotation_state,
    trajectory_csv,
)
from .errors import DocumentError, SingularityError
from .model import rotation_matrix
from .probe import bound_probe, frequency_sweep, sweep_csv
from .solver import (
    SolveOptions,
    continuation_in_exponent,
    exponent_schedule,
    fingerprint,
    multistart_search,
    solve_from_seed,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_IO = 3


def _default_jobs():
    raw = os.environ.get("RELEQ_JOBS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _emit(args, text):
    """Write the report to --out atomically, or print it when --out is unset."""
    if args.out:
        write_text_atomic(args.out, text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json_report(payload):
    return json.dumps(payload, indent=2) + "\n"


def _load(args):
    with open(args.input, "r", encoding="utf-8") as handle:
        text = handle.read()
    return parse_document(text)


def _need_positions(doc):
    config = doc.configuration()
    if config is None:
        raise DocumentError("document has no 'positions'", field="positions")
    return config


def _horizon(problem, t_end):
    if t_end is not None:
        return float(t_end)
    return 2.0 * math.pi / float(problem.frequencies.max())


def _solve_options(args):
    opts = SolveOptions()
    if getattr(args, "tol", None) is not None:
        opts.tol_res = args.tol
    if args.damping_init is not None:
        opts.damping_init = args.damping_init
    if args.damping_grow is not None:
        opts.damping_grow = args.damping_grow
    if args.damping_shrink is not None:
        opts.damping_shrink = args.damping_shrink
    return opts


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def _cmd_verify(args):
    doc = _load(args)
    problem = doc.problem()
    config = _need_positions(doc)

    report = residual(config, problem)
    gaps = [lemma_identity_gap(config, problem, l).to_dict()
            for l in range(2, problem.n + 1)]
    centroid = weighted_centroid_residual(config, problem)
    t_end = _horizon(problem, args.t_end)
    deviation = relative_equilibrium_deviation(
        config, problem, t_end, samples=args.samples
    )
    passed = report.max_norm <= args.tol
    payload = {
        "residual": report.to_dict(),
        "lemma_gaps": gaps,
        "weighted_centroid_residual": centroid.tolist(),
        "relative_equilibrium_deviation": deviation,
        "deviation_t_end": t_end,
        "tol": args.tol,
        "passed": passed,
    }
    status = "PASS" if passed else "FAIL"
    print(f"verify: {status} residual_max={report.max_norm:.6e} "
          f"tol={args.tol:.1e} deviation={deviation:.6e}")
    _emit(args, _json_report(payload))
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def _cmd_solve(args):
    doc = _load(args)
    problem = doc.problem()
    seed = _need_positions(doc)
    result = solve_from_seed(seed, problem, _solve_options(args))
    payload = result.to_dict()
    payload["residual_history"] = list(result.residual_history)
    if result.converged:
        payload["fingerprint"] = fingerprint(result.config, problem).to_dict()
    print(f"solve: termination={result.termination.value} "
          f"iterations={result.iterations} "
          f"residual_max={result.residual_max:.6e}")
    _emit(args, _json_report(payload))
    return EXIT_OK if result.converged else EXIT_VERIFY_FAILED


def _search_payload(classes, args):
    converged = sum(cls.hits for cls in classes)
    return {
        "trials": args.trials,
        "rng_seed": args.seed,
        "converged": converged,
        "dropped": args.trials - converged,
        "classes": [
            {
                **cls.result.to_dict(),
                "fingerprint": cls.fingerprint.to_dict(),
                "hits": cls.hits,
            }
            for cls in classes
        ],
    }


def _search_csv(classes):
    if not classes:
        return "class,hits,iterations,residual_max\n"
    n_dist = classes[0].fingerprint.sorted_distances.size
    n_norm = classes[0].fingerprint.sorted_mass_weighted_norms.size
    header = ["class", "hits", "iterations", "residual_max"]
    header += [f"d{i}" for i in range(n_dist)]
    header += [f"w{i}" for i in range(n_norm)]
    lines = [",".join(header)]
    for idx, cls in enumerate(classes):
        row = [str(idx), str(cls.hits), str(cls.result.iterations),
               repr(cls.result.residual_max)]
        row += [repr(float(x)) for x in cls.fingerprint.sorted_distances]
        row += [repr(float(x))
                for x in cls.fingerprint.sorted_mass_weighted_norms]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _cmd_search(args):
    doc = _load(args)
    problem = doc.problem()
    classes = multistart_search(problem, args.trials, args.seed,
                                opts=_solve_options(args), jobs=args.jobs)
    converged = sum(cls.hits for cls in classes)
    print(f"search: trials={args.trials} converged={converged} "
          f"classes={len(classes)}")
    if args.format == "csv":
        _emit(args, _search_csv(classes))
    else:
        _emit(args, _json_report(_search_payload(classes, args)))
    return EXIT_OK


def _cmd_continue(args):
    doc = _load(args)
    problem = doc.problem()
    seed = _need_positions(doc)
    opts = _solve_options(args)
    start = solve_from_seed(seed, problem, opts)
    if not start.converged:
        print(f"continue: starting solve failed "
              f"({start.termination.value})", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    schedule = exponent_schedule(problem.a, args.a_target, args.steps)
    results = continuation_in_exponent(start, problem, args.a_target,
                                       args.steps, opts)
    rows = []
    for a_value, result in zip(schedule, results):
        pts = _kernels.as_input(result.config.points)
        rows.append({
            "a": float(a_value),
            **result.to_dict(),
            "min_pairwise_distance": float(_kernels.min_pair_distance(pts)),
            "max_point_norm": float(np.sqrt(np.sum(pts ** 2, axis=1)).max()),
        })
    completed = sum(1 for r in results if r.converged)
    print(f"continue: steps={args.steps} completed={completed} "
          f"final_a={rows[-1]['a']:.6g}")
    if args.format == "csv":
        header = ("step,a,termination,iterations,residual_max,"
                  "min_pairwise_distance,max_point_norm")
        lines = [header]
        for idx, row in enumerate(rows):
            lines.append(",".join([
                str(idx), repr(row["a"]), row["termination"],
                str(row["iterations"]), repr(row["residual_max"]),
                repr(row["min_pairwise_distance"]),
                repr(row["max_point_norm"]),
            ]))
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _json_report({"a_target": args.a_target,
                                  "steps": args.steps, "rows": rows}))
    return EXIT_OK if completed == len(schedule) else EXIT_VERIFY_FAILED


def _cmd_probe(args):
    doc = _load(args)
    problem = doc.problem()
    opts = _solve_options(args)
    if args.omegas:
        omegas = [float(w) for w in args.omegas.split(",") if w.strip()]
        reports = frequency_sweep(problem, omegas, args.trials, args.seed,
                                  jobs=args.jobs, opts=opts)
        found = sum(r.classes_found for r in reports)
        print(f"probe: sweep omegas={len(omegas)} total_classes={found}")
        if args.format == "csv":
            _emit(args, sweep_csv(reports, omegas))
        else:
            _emit(args, _json_report({
                "omegas": omegas,
                "reports": [r.to_dict() for r in reports],
            }))
        return EXIT_OK
    report = bound_probe(problem, args.trials, args.seed, jobs=args.jobs,
                         opts=opts)
    c_hat = report.min_pairwise_distance
    big_c = report.max_point_norm
    print(f"probe: classes={report.classes_found} "
          f"c_hat={'n/a' if c_hat is None else f'{c_hat:.9g}'} "
          f"C_hat={'n/a' if big_c is None else f'{big_c:.9g}'} "
          f"converged={report.converged}/{report.trials}")
    if args.format == "csv":
        _emit(args, sweep_csv([report], [1.0]))
    else:
        _emit(args, _json_report(report.to_dict()))
    return EXIT_OK


def _cmd_integrate(args):
    doc = _load(args)
    problem = doc.problem()
    config = _need_positions(doc)
    t_end = _horizon(problem, args.t_end)
    state = rigid_rotation_state(config, problem)
    times = np.linspace(0.0, t_end, args.samples + 1)
    traj = integrate(state, problem, t_end, args.tol, sample_times=times)

    deviation = 0.0
    for idx, t in enumerate(traj.times):
        rot = rotation_matrix(problem.frequencies, t, problem.k)
        gap = traj.positions[idx] - config.points @ rot.T
        deviation = max(deviation,
                        float(np.sqrt(np.sum(gap ** 2, axis=1)).max()))
    print(f"integrate: t_end={t_end:.9g} samples={args.samples} "
          f"deviation={deviation:.6e}")
    if args.format == "csv":
        _emit(args, trajectory_csv(traj))
    else:
        _emit(args, _json_report({
            "t_end": t_end,
            "tol": args.tol,
            "deviation": deviation,
            "times": traj.times.tolist(),
            "positions": traj.positions.tolist(),
            "velocities": traj.velocities.tolist(),
        }))
    return EXIT_OK


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="releq",
        description="Find, verify and explore rigidly rotating point-mass "
                    "configurations under power-law forces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_format=True):
        p.add_argument("input", help="path to a JSON problem document")
        p.add_argument("--out", help="write the full report to this path")
        if with_format:
            p.add_argument("--format", choices=("json", "csv"),
                           default="json")

    def add_solver_flags(p):
        p.add_argument("--tol", type=float, default=None,
                       help="relative residual tolerance (default 1e-12)")
        p.add_argument("--damping-init", type=float, default=None,
                       help="initial LM damping (default 1e-3)")
        p.add_argument("--damping-grow", type=float, default=None,
                       help="damping factor on rejected steps (default 10)")
        p.add_argument("--damping-shrink", type=float, default=None,
                       help="damping factor on accepted steps (default 0.5)")

    p = sub.add_parser("verify", help="check a document's positions against "
                                      "the balance criterion")
    add_common(p, with_format=False)
    p.add_argument("--tol", type=float, default=1e-10,
                   help="residual max-norm threshold for exit 0")
    p.add_argument("--t-end", dest="t_end", type=float, default=None,
                   help="horizon for the dynamic deviation check "
                        "(default one rotation period)")
    p.add_argument("--samples", type=int, default=16)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("solve", help="refine the document's positions to an "
                                     "equilibrium")
    add_common(p, with_format=False)
    add_solver_flags(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("search", help="multistart search for equilibrium "
                                      "classes")
    add_common(p)
    add_solver_flags(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("continue", help="track the solution while the "
                                        "exponent walks to a target")
    add_common(p)
    add_solver_flags(p)
    p.add_argument("--a-target", dest="a_target", type=float, required=True)
    p.add_argument("--steps", type=int, default=10)
    p.set_defaults(func=_cmd_continue)

    p = sub.add_parser("probe", help="empirical min-separation / max-norm "
                                     "bounds over found equilibria")
    add_common(p)
    add_solver_flags(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.add_argument("--omegas", default=None,
                   help="comma-separated frequency scalings: run one probe "
                        "per value (sweep)")
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("integrate", help="integrate the motion from the "
                                         "document's positions")
    add_common(p)
    p.add_argument("--t-end", dest="t_end", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--samples", type=int, default=64)
    p.set_defaults(func=_cmd_integrate)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on flag errors already; normalize other codes
        return EXIT_BAD_INPUT if exc.code not in (0,) else 0
    try:
        return args.func(args)
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except SingularityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
