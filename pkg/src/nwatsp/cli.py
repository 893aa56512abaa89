"""Command-line entry points: gen, solve, sweep, exact, validate.

Exit codes: 0 success, 1 invalid instance or spec, 2 invariant breach,
3 I/O or malformed JSON.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import lp as held_karp
from .errors import AtspError, BadSpec, InvalidInstance, InvariantBreach, TooLarge
from .generate import KINDS, WEIGHT_LAWS, GeneratorSpec, generate
from .graph import eulerian_circuit, load_instance, validate, walk_vertices
from .local import local_connectivity
from .merge import MODES, STANDARD, run
from .oracle import exact_atsp

EXIT_OK, EXIT_INVALID, EXIT_BREACH, EXIT_IO = 0, 1, 2, 3
CSV_COLUMNS = ["n", "seed", "lp", "opt", "tour", "ratio", "merges", "restarts", "mode"]
ORACLE_MAX_N = 10


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load(path):
    try:
        return load_instance(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise _IoError(str(exc)) from exc


class _IoError(Exception):
    pass


def cmd_gen(args):
    spec = GeneratorSpec(args.kind, args.n, args.density, args.weights, args.max_weight, args.seed)
    inst = generate(spec)
    _write(args.output, json.dumps(inst.to_json()) + "\n")
    return EXIT_OK


def cmd_validate(args):
    validate(_load(args.input))
    print("ok")
    return EXIT_OK


def cmd_exact(args):
    inst = _load(args.input)
    validate(inst)
    weight, order = exact_atsp(inst)
    _write(args.output, json.dumps({"optimum": weight, "order": order}) + "\n")
    return EXIT_OK


def cmd_solve(args):
    inst = _load(args.input)
    validate(inst)
    lp = held_karp.solve(inst)
    if args.dump_lp:
        held_karp.dump_solution(lp, args.dump_lp)
    lc_calls = []
    hook = None
    if args.dump_lc:
        def hook(parts, _F):
            lc_calls.append(local_connectivity(inst, lp, parts).to_json())
    tour, report = run(inst, args.epsilon, args.mode, lp=lp, on_lc=hook)
    if args.dump_lc:
        Path(args.dump_lc).write_text(json.dumps(lc_calls) + "\n")
    if args.output:
        Path(args.output).write_text(report.dumps())
    walk = walk_vertices(inst, eulerian_circuit(tour))
    print(" ".join(map(str, walk)))
    return EXIT_OK


def sweep_row(spec_data, epsilon, mode):
    """Solve one generated instance; never raises."""
    row = {"spec": spec_data, "status": "ok"}
    try:
        spec = GeneratorSpec.from_json(spec_data)
        row.update(n=spec.n, seed=spec.seed, mode=mode)
        inst = generate(spec)
        lp = held_karp.solve(inst)
        _, report = run(inst, epsilon, mode, lp=lp)
        row.update(lp=report.lp_value, tour=report.tour_weight, ratio=report.ratio,
                   merges=report.merges, restarts=report.restarts, shortcut=report.shortcut_weight, opt=None)
        if inst.n <= ORACLE_MAX_N:
            opt, _ = exact_atsp(inst)
            row["opt"] = opt
            tol = 1e-6 * max(1.0, opt)
            if not (report.lp_value <= opt + tol and opt <= report.shortcut_weight + tol
                    and report.shortcut_weight <= report.tour_weight + tol):
                raise InvariantBreach("lp <= opt <= shortcut <= tour does not hold")
    except (AtspError, ValueError, TypeError) as exc:
        row["status"] = "breach" if isinstance(exc, InvariantBreach) else "failed"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(specs, epsilon=0.25, mode=STANDARD, jobs=1):
    """Run every spec and aggregate; rows stay in input order."""
    args = [(s, epsilon, mode) for s in specs]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_row, *zip(*args)))
    else:
        rows = [sweep_row(*a) for a in args]
    done = [r for r in rows if r["status"] == "ok"]
    ratios = [r["ratio"] for r in done]
    return {
        "epsilon": epsilon,
        "mode": mode,
        "count": len(rows),
        "failed": len(rows) - len(done),
        "max_ratio": max(ratios) if ratios else None,
        "mean_ratio": sum(ratios) / len(ratios) if ratios else None,
        "total_restarts": sum(r["restarts"] for r in done),
        "oracle_checks": sum(1 for r in done if r.get("opt") is not None),
        "rows": rows,
    }


def sweep_csv(summary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in summary["rows"]:
        writer.writerow(["" if r.get(c) is None else r.get(c) for c in CSV_COLUMNS])
    return buf.getvalue()


def cmd_sweep(args):
    if args.input:
        try:
            specs = json.loads(Path(args.input).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise _IoError(str(exc)) from exc
        if not isinstance(specs, list):
            raise BadSpec("sweep input must be a JSON list of generator specs")
    else:
        specs = [
            GeneratorSpec(args.kind, args.n, args.density, args.weights, args.max_weight, args.seed + i).to_json()
            for i in range(args.count)
        ]
    summary = sweep(specs, args.epsilon, args.mode, args.jobs)
    text = sweep_csv(summary)
    if args.output:
        out = Path(args.output)
        out.write_text(text)
        out.with_suffix(".json").write_text(json.dumps(summary, indent=2) + "\n")
    else:
        sys.stdout.write(text)
    breaches = [r for r in summary["rows"] if r["status"] == "breach"]
    return EXIT_BREACH if breaches else EXIT_OK


def _add_generator_flags(p):
    p.add_argument("--kind", choices=KINDS, default="random")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--weights", choices=WEIGHT_LAWS, default="uniform")
    p.add_argument("--max-weight", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="nwatsp", description="Node-weighted ATSP approximation via local connectivity.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance")
    _add_generator_flags(p)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run the full pipeline on an instance")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="path for the JSON run report")
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--mode", choices=MODES, default=STANDARD)
    p.add_argument("--dump-lp", help="write x* and lb as JSON")
    p.add_argument("--dump-lc", help="write every local-connectivity call (y and F) as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="solve a batch of generated instances")
    p.add_argument("--input", help="JSON list of generator specs")
    _add_generator_flags(p)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--mode", choices=MODES, default=STANDARD)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", help="CSV path; the JSON summary goes next to it")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("exact", help="exact optimum (n <= 15)")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvariantBreach as exc:
        print(f"invariant breach: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BREACH
    except (InvalidInstance, BadSpec, TooLarge, ValueError) as exc:
        print(f"invalid input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AtspError as exc:
        print(f"invariant breach: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BREACH
