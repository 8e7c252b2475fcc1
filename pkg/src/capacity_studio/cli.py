"""Command-line front end.

Subcommands cover validation, aggregation, index inspection, the three
identification methods, concept ranking, and the HTTP service. Machine
output goes to standard output (canonical JSON under --json, capacity
JSON otherwise); progress and diagnostics go to the error stream so
redirected output stays parseable.

Exit codes: 0 success, 2 invalid input, 3 infeasible constraint system,
4 file I/O failure.
"""

import argparse
import json
import os
import sys

from .capacity import (
    canonical_json,
    dumps_capacity,
    load_capacity,
    load_densities,
    validate,
)
from .concepts import gcs, load_concepts, rank_concepts
from .errors import CapacityStructureError, InfeasibleError, NumericError
from .indices import index_report
from .learning import identify_from_data, preferences_from_json, samples_from_json
from .semantic import (
    constraints_from_json,
    identify_semantic,
    interval_scores_from_json,
)
from .sugeno import identify_sugeno

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

DEFAULT_PORT = 8000


def _load_json(path: str) -> object:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise CapacityStructureError(f"{path}: not valid JSON ({exc})") from None


def _emit(args, result) -> int:
    """Write an identification result per the output flags."""
    text = dumps_capacity(result.capacity)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.json:
        sys.stdout.write(canonical_json(result.to_dict()))
    elif not args.output:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    cap = load_capacity(args.capacity)
    violations = validate(cap)
    if args.json:
        doc = {
            "valid": not violations,
            "n": cap.n,
            "violations": [
                {
                    "kind": v.kind,
                    "subset": list(v.subset),
                    "superset": None if v.superset is None else list(v.superset),
                    "gap": v.gap,
                    "detail": v.describe(),
                }
                for v in violations
            ],
        }
        sys.stdout.write(canonical_json(doc))
    elif violations:
        for v in violations:
            print(v.describe())
    else:
        print(f"valid capacity on {cap.n} criteria")
    return EXIT_INVALID if violations else EXIT_OK


def cmd_aggregate(args) -> int:
    cap = load_capacity(args.capacity)
    cset = load_concepts(args.concepts)
    if cset.n != cap.n:
        raise CapacityStructureError(
            f"concepts carry {cset.n} criteria, capacity expects {cap.n}"
        )
    scores = [(c.name, gcs(cap, c)) for c in cset.concepts]
    if args.json:
        doc = {"scores": [{"name": name, "score": s} for name, s in scores]}
        sys.stdout.write(canonical_json(doc))
    else:
        for name, s in scores:
            print(f"{name}: {s:.4f}")
    return EXIT_OK


def cmd_indices(args) -> int:
    cap = load_capacity(args.capacity)
    report = index_report(cap, tol=args.pair_tol)
    if args.json:
        doc = {"n": cap.n}
        doc.update(report.to_dict())
        sys.stdout.write(canonical_json(doc))
        return EXIT_OK
    for i, (phi, scaled) in enumerate(
        zip(report.shapley, report.shapley_scaled), start=1
    ):
        marker = "  above average" if scaled > 1.0 else ""
        print(f"phi({i}) = {phi:.4f}  scaled {scaled:.4f}{marker}")
    for (i, j), label in sorted(report.semantics.labels.items()):
        value = report.interactions[i - 1, j - 1]
        print(f"I({i},{j}) = {value:+.4f}  {label}")
    veto = [str(i + 1) for i, flag in enumerate(report.semantics.veto) if flag]
    favor = [
        str(i + 1) for i, flag in enumerate(report.semantics.pass_effect) if flag
    ]
    if veto:
        print("veto criteria: " + ", ".join(veto))
    if favor:
        print("pass criteria: " + ", ".join(favor))
    return EXIT_OK


def cmd_rank(args) -> int:
    cap = load_capacity(args.capacity)
    cset = load_concepts(args.concepts)
    if cset.n != cap.n:
        raise CapacityStructureError(
            f"concepts carry {cset.n} criteria, capacity expects {cap.n}"
        )
    ranked = rank_concepts(cap, cset.concepts)
    if args.json:
        doc = {"ranking": [r.to_dict() for r in ranked]}
        sys.stdout.write(canonical_json(doc))
    else:
        for r in ranked:
            print(f"{r.rank}. {r.name}  {r.score:.4f}")
    return EXIT_OK


def cmd_identify_sugeno(args) -> int:
    densities = load_densities(args.densities)
    result = identify_sugeno(densities)
    lam = result.diagnostics["lambda"]
    print(f"lambda = {lam:.4f}", file=sys.stderr)
    return _emit(args, result)


def cmd_identify_learn(args) -> int:
    samples = samples_from_json(_load_json(args.samples))
    preferences = ()
    if args.preferences:
        preferences = preferences_from_json(_load_json(args.preferences))
    result = identify_from_data(samples, preferences, n=args.n)
    if result.fit_error is not None:
        print(f"fit error = {result.fit_error:.6f}", file=sys.stderr)
    return _emit(args, result)


def cmd_identify_semantic(args) -> int:
    constraints = ()
    if args.constraints:
        constraints = constraints_from_json(_load_json(args.constraints))
    samples = ()
    if args.samples:
        samples = samples_from_json(_load_json(args.samples))
    scores = ()
    if args.intervals:
        scores = interval_scores_from_json(_load_json(args.intervals))
    result = identify_semantic(constraints, scores, samples, n=args.n)
    distance = result.diagnostics["distance_to_equidistributed"]
    print(f"distance to equidistributed = {distance:.6f}", file=sys.stderr)
    return _emit(args, result)


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    port = args.port
    if port is None:
        raw = os.environ.get("CAPACITY_STUDIO_PORT")
        port = int(raw) if raw else DEFAULT_PORT
    app = create_app(snapshot_path=args.snapshot)
    uvicorn.run(app, host=args.host, port=port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capacity-studio",
        description="Choquet-based decision support: validate capacities, "
        "identify them from data or semantics, and rank design concepts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_json_flag(p):
        p.add_argument(
            "--json", action="store_true",
            help="write a machine-readable JSON document to stdout",
        )

    p = sub.add_parser("validate", help="check capacity axioms")
    p.add_argument("capacity", help="capacity JSON file")
    add_json_flag(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("aggregate", help="score concepts against a capacity")
    p.add_argument("capacity", help="capacity JSON file")
    p.add_argument("concepts", help="concepts JSON file")
    add_json_flag(p)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser(
        "indices", help="Shapley values, interactions, pair semantics"
    )
    p.add_argument("capacity", help="capacity JSON file")
    p.add_argument(
        "--pair-tol", type=float, default=0.05,
        help="half-width of the independence band when labeling pairs",
    )
    add_json_flag(p)
    p.set_defaults(func=cmd_indices)

    p = sub.add_parser("rank", help="order concepts by global score")
    p.add_argument("capacity", help="capacity JSON file")
    p.add_argument("concepts", help="concepts JSON file")
    add_json_flag(p)
    p.set_defaults(func=cmd_rank)

    identify = sub.add_parser("identify", help="fit a capacity")
    methods = identify.add_subparsers(dest="method", required=True)

    def add_output_flags(p):
        p.add_argument(
            "-o", "--output", default=None,
            help="also write the capacity JSON to this file",
        )
        add_json_flag(p)

    p = methods.add_parser(
        "sugeno", help="build the lambda-measure lattice from densities"
    )
    p.add_argument("densities", help="singleton densities JSON file")
    add_output_flags(p)
    p.set_defaults(func=cmd_identify_sugeno)

    p = methods.add_parser(
        "learn", help="least-squares fit to scored samples and preferences"
    )
    p.add_argument("samples", help="learning samples JSON file")
    p.add_argument(
        "--preferences", default=None,
        help="ranking and index-order preferences JSON file",
    )
    p.add_argument("-n", type=int, default=None, help="criterion count")
    add_output_flags(p)
    p.set_defaults(func=cmd_identify_learn)

    p = methods.add_parser(
        "semantic", help="project the equidistributed capacity onto "
        "linguistic constraints",
    )
    p.add_argument(
        "constraints", nargs="?", default=None,
        help="linguistic constraints JSON file",
    )
    p.add_argument("--samples", default=None, help="samples JSON file")
    p.add_argument(
        "--intervals", default=None,
        help="interval score bands JSON file (needs --samples)",
    )
    p.add_argument("-n", type=int, default=None, help="criterion count")
    add_output_flags(p)
    p.set_defaults(func=cmd_identify_semantic)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument(
        "--port", type=int, default=None,
        help="listen port (default CAPACITY_STUDIO_PORT or 8000)",
    )
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument(
        "--snapshot", default=None,
        help="snapshot sessions to this JSON file on every mutation",
    )
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        if getattr(args, "json", False):
            sys.stdout.write(canonical_json(exc.report.to_dict()))
        return EXIT_INFEASIBLE
    except (ValueError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
