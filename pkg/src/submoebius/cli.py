"""Command-line verifier.

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 input
malformed, 3 precondition violated.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .cross_ratio import SubMoebiusMap, check_axioms, moebius_of, table_from_json, table_to_json
from .extended_line import format_ext, parse_ext
from .hyperbolic import (
    GromovProductModel,
    basepoint_moebius,
    binary_tree,
    build_from_metric,
    build_from_tree,
    caterpillar_tree,
    deviation_check,
    model_from_json,
    model_to_json,
    perturb,
    perturb_model,
    symmetrize,
    tree_from_json,
)
from .reconstruction import NotMoebiusError, ScaleTriple, is_moebius, parse_scale_triple, reconstruct_semimetric
from .semimetric import (
    SemiMetricSpace,
    add_remote_point,
    line_space,
    metric_inversion,
    moebius_equivalent,
    space_from_json,
    space_to_json,
    validate_semimetric,
)
from .topology import (
    complement_identity_scan,
    moebius_subbase,
    same_topology,
    sandwich_check,
    sandwich_scan,
    semimetric_subbase,
)

SCHEMA_VERSION = 1

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3


class InputError(Exception):
    pass


class PreconditionError(Exception):
    pass


# -- built-in examples -------------------------------------------------------


def builtin_line_space() -> SemiMetricSpace:
    """``{0, 1, 3, 7}`` on the line plus an infinitely remote point ``w``."""
    return add_remote_point(line_space([0, 1, 3, 7]), "w")


def builtin_tree_model() -> GromovProductModel:
    return build_from_tree(binary_tree(2))


def builtin_perturbed_model() -> GromovProductModel:
    """Five-leaf caterpillar with Gromov products jittered so that ``h > 0``."""
    return perturb_model(build_from_tree(caterpillar_tree(5)), Fraction(1, 2), seed=3)


NEGATIVE_SEED = 7


def builtin_negative_structure() -> SubMoebiusMap:
    """Frozen sub-Möbius structure that is not Möbius: ``M_o`` of the
    perturbed model with noise ``4h`` on every tuple, symmetrized."""
    model = builtin_perturbed_model()
    return symmetrize(perturb(model, 4 * model.h, seed=NEGATIVE_SEED))


# -- input -------------------------------------------------------------------


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _parse(path: str, loader):
    data = _read_json(path)
    try:
        return loader(data)
    except KeyError as exc:
        raise InputError(f"{path}: missing or unknown field {exc}") from exc
    except (ValueError, TypeError, IndexError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_space(path: str) -> SemiMetricSpace:
    return _parse(path, space_from_json)


def load_structure(path: str) -> SubMoebiusMap:
    """A table, or a semi-metric whose ``M_d`` is taken."""

    def loader(data):
        if isinstance(data, dict) and "matrix" in data:
            return moebius_of(space_from_json(data))
        return table_from_json(data)

    return _parse(path, loader)


def load_model(path: str) -> GromovProductModel:
    return _parse(path, model_from_json)


def _single_input(args) -> str:
    if not args.input:
        raise InputError("--input is required")
    if len(args.input) != 1:
        raise InputError("expected exactly one --input")
    return args.input[0]


def _triple(args, points) -> Optional[ScaleTriple]:
    if not args.scale:
        return None
    try:
        return parse_scale_triple(args.scale, points)
    except KeyError as exc:
        raise InputError(f"--scale: {exc.args[0]}") from exc
    except ValueError as exc:
        raise PreconditionError(f"--scale: {exc}") from exc


def _fraction(text: Optional[str], name: str) -> Optional[Fraction]:
    if text is None:
        return None
    try:
        value = parse_ext(text)
    except ValueError as exc:
        raise InputError(f"--{name}: {exc}") from exc
    if not isinstance(value, Fraction) or value < 0:
        raise PreconditionError(f"--{name} must be a nonnegative rational")
    return value


# -- subcommands ---------------------------------------------------------------


def cmd_validate(args):
    space = load_space(_single_input(args))
    report = validate_semimetric(space)
    return report.ok, {
        "valid": report.ok,
        "infinitely_remote": [space.points[i] for i in space.infinitely_remote()],
        "violations": [v.to_json(space.points) for v in report.violations],
    }


def cmd_moebius(args):
    space = load_space(_single_input(args))
    report = validate_semimetric(space)
    if not report.ok:
        raise PreconditionError("input is not a semi-metric: " + "; ".join(v.kind for v in report.violations))
    m = moebius_of(space, full=True)
    axioms = check_axioms(m)
    return axioms.ok, {"axioms": axioms.to_json(m.points), "table": table_to_json(m)}


def cmd_submoebius_check(args):
    m = load_structure(_single_input(args))
    axioms = check_axioms(m)
    return axioms.ok, {"points": list(m.points), "axioms": axioms.to_json(m.points)}


def cmd_is_moebius(args):
    m = load_structure(_single_input(args))
    axioms = check_axioms(m)
    if not axioms.ok:
        raise PreconditionError("table is not a sub-Möbius structure; run submoebius-check for details")
    verdict = is_moebius(m, jobs=args.jobs)
    return verdict.is_moebius, {"points": list(m.points), **verdict.to_json(m.points)}


def cmd_reconstruct(args):
    m = load_structure(_single_input(args))
    if not args.scale:
        raise InputError("--scale alpha,beta,omega is required")
    a = _triple(args, m.points)
    try:
        space = reconstruct_semimetric(m, a)
    except NotMoebiusError as exc:
        return False, {"is_moebius": False, "witness": exc.verdict.witness.to_json(m.points)}
    return True, {"scale_triple": list(args.scale.split(",")), "space": space_to_json(space)}


def cmd_equivalent(args):
    if not args.input or len(args.input) != 2:
        raise InputError("equivalent needs two --input files")
    s1, s2 = load_space(args.input[0]), load_space(args.input[1])
    if s1.points != s2.points:
        raise PreconditionError("spaces must list the same point ids in the same order")
    res = moebius_equivalent(s1, s2, exhaustive=True)
    data = {"equivalent": res.equivalent, "witness": None}
    if not res:
        data["witness"] = {
            "tuple": [s1.points[i] for i in res.witness],
            "left": str(res.left),
            "right": str(res.right),
        }
    return res.equivalent, data


def _build_model(args) -> GromovProductModel:
    path = _single_input(args)
    data = _read_json(path)
    try:
        if isinstance(data, dict) and "edges" in data:
            return build_from_tree(tree_from_json(data), args.basepoint)
        space = space_from_json(data)
    except KeyError as exc:
        raise InputError(f"{path}: missing or unknown field {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    basepoint = args.basepoint or space.points[0]
    if basepoint not in space.points:
        raise InputError(f"--basepoint: unknown point id {basepoint!r}")
    try:
        return build_from_metric(space, basepoint)
    except ValueError as exc:
        raise PreconditionError(str(exc)) from exc


def cmd_hyperbolic(args):
    action = args.action
    if action == "build":
        return True, {"model": model_to_json(_build_model(args))}
    if action == "symmetrize":
        raw = load_structure(_single_input(args))
        try:
            m = symmetrize(raw)
        except ValueError as exc:
            raise PreconditionError(str(exc)) from exc
        axioms = check_axioms(m)
        return axioms.ok, {"axioms": axioms.to_json(m.points), "table": table_to_json(m)}
    model = load_model(_single_input(args))
    eps = _fraction(args.eps, "eps")
    eps = 4 * model.h if eps is None else eps
    if action == "perturb":
        raw = perturb(model, eps, seed=args.seed)
        return True, {"eps": format_ext(eps), "seed": args.seed, "table": table_to_json(raw)}
    # deviation
    h = _fraction(args.h, "h")
    h = model.h if h is None else h
    if args.table:
        m = _parse(args.table, table_from_json)
        if m.points != model.boundary:
            raise PreconditionError("table and model have different point ids")
    else:
        m = symmetrize(perturb(model, eps, seed=args.seed))
    try:
        report = deviation_check(m, basepoint_moebius(model), h)
    except ValueError as exc:
        raise PreconditionError(str(exc)) from exc
    data = {"eps": format_ext(eps) if not args.table else None, "seed": args.seed if not args.table else None}
    data.update(report.to_json(model.boundary))
    return report.ok, data


def cmd_topology(args):
    if args.action == "compare":
        return _topology_compare(args)
    model = load_model(_single_input(args))
    a = _triple(args, model.boundary)
    eps = _fraction(args.eps, "eps")
    eps = 4 * model.h if eps is None else eps
    m = symmetrize(perturb(model, eps, seed=args.seed)) if args.variant != "standard" else None
    reports = []
    variants = ["standard", "submoebius"] if args.variant == "both" else [args.variant]
    for variant in variants:
        if a is None:
            reports += sandwich_scan(model, variant, m=m)
        else:
            for y in range(model.n):
                if y == a.omega:
                    continue
                if variant == "standard":
                    reports.append(sandwich_check(model, a, y, "standard"))
                else:
                    reports += [sandwich_check(model, a, y, "submoebius", m=m, side=s) for s in ("alpha", "beta")]
    ok = all(r.ok for r in reports)
    return ok, {
        "h": format_ext(model.h),
        "eps": format_ext(eps) if m is not None else None,
        "seed": args.seed if m is not None else None,
        "ok": ok,
        "checked": sum(r.checked for r in reports),
        "skipped": sum(r.skipped for r in reports),
        "rows": [r.to_json(model.boundary) for r in reports],
    }


def _subbase(path: str):
    data = _read_json(path)
    try:
        if isinstance(data, dict) and "matrix" in data:
            space = space_from_json(data)
            return space.points, semimetric_subbase(space), "semi-metric balls"
        m = table_from_json(data)
    except KeyError as exc:
        raise InputError(f"{path}: missing or unknown field {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not check_axioms(m).ok:
        raise PreconditionError(f"{path}: table is not a sub-Möbius structure")
    return m.points, moebius_subbase(m), "alpha/beta balls"


def _topology_compare(args):
    if not args.input or len(args.input) not in (1, 2):
        raise InputError("compare needs one or two --input files")
    points, sub1, what1 = _subbase(args.input[0])
    if len(args.input) == 2:
        points2, sub2, what2 = _subbase(args.input[1])
        if points2 != points:
            raise PreconditionError("inputs have different point ids")
    else:
        space = load_space(args.input[0])
        sub2, what2 = moebius_subbase(moebius_of(space)), "alpha/beta balls"
    same = same_topology(sub1, sub2, len(points))
    return same, {"points": list(points), "first": what1, "second": what2, "same_topology": same}


def _suite(name: str, expected, observed) -> dict:
    return {"name": name, "expected": expected, "observed": observed, "pass": expected == observed}


def run_demo(jobs: int = 1) -> dict:
    """Full pipeline on the built-in line and tree examples."""
    suites = []

    space = builtin_line_space()
    suites.append(_suite("line: valid semi-metric", True, validate_semimetric(space).ok))
    m = moebius_of(space, full=True)
    suites.append(_suite("line: M_d satisfies the sub-Möbius axioms", True, check_axioms(m).ok))
    suites.append(_suite("line: M_d is Möbius", True, is_moebius(m, jobs=jobs).is_moebius))
    a = ScaleTriple(0, 1, space.omega)
    back = reconstruct_semimetric(m, a, check=False)
    suites.append(_suite("line: reconstruction at (0,1,w) returns the input", True, back.dist == space.dist))
    inv = metric_inversion(space, space.index("3"), 2)
    suites.append(_suite("line: inversion at 3 is Möbius equivalent", True, moebius_equivalent(space, inv).equivalent))

    tree = builtin_tree_model()
    m_o = basepoint_moebius(tree)
    suites.append(_suite("tree: h", "0", format_ext(tree.h)))
    suites.append(_suite("tree: M_o is Möbius", True, is_moebius(m_o, jobs=jobs).is_moebius))
    dev = deviation_check(m_o, m_o, tree.h)
    suites.append(_suite("tree: deviation of M from M_o", "0", format_ext(dev.max_sq)))
    suites.append(_suite("tree: standard sandwich", True, all(r.ok for r in sandwich_scan(tree))))
    suites.append(_suite("tree: complement identity", 0, len(complement_identity_scan(m_o)[1])))

    model = builtin_perturbed_model()
    neg = builtin_negative_structure()
    verdict = is_moebius(neg, jobs=jobs)
    suites.append(_suite("perturbed: symmetrized structure satisfies the axioms", True, check_axioms(neg).ok))
    suites.append(_suite("perturbed: symmetrized structure is Möbius", False, verdict.is_moebius))
    dev = deviation_check(neg, basepoint_moebius(model), model.h)
    suites.append(_suite("perturbed: deviation within sqrt(96) h", True, dev.within_sqrt96))
    suites.append(_suite("perturbed: standard sandwich", True, all(r.ok for r in sandwich_scan(model))))
    suites.append(
        _suite("perturbed: submoebius sandwich", True, all(r.ok for r in sandwich_scan(model, "submoebius", m=neg)))
    )

    return {
        "ok": all(s["pass"] for s in suites),
        "suites": suites,
        "negative_witness": verdict.witness.to_json(neg.points) if verdict.witness else None,
        "perturbed_h": format_ext(model.h),
        "deviation": dev.to_json(model.boundary),
    }


def cmd_demo(args):
    report = run_demo(args.jobs)
    return report["ok"], report


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", action="append", metavar="PATH", help="JSON input file ('-' for stdin); repeatable")
    common.add_argument("--scale", metavar="ALPHA,BETA,OMEGA", help="scale triple of point ids")
    common.add_argument("--eps", help="perturbation size (rational, default 4h)")
    common.add_argument("--seed", type=int, default=0, help="perturbation seed")
    common.add_argument("--h", help="override the hyperbolicity constant")
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for Möbius scans")

    parser = argparse.ArgumentParser(prog="submoebius", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    simple = {
        "validate": (cmd_validate, "check the semi-metric axioms"),
        "moebius": (cmd_moebius, "compute M_d and check the sub-Möbius axioms"),
        "submoebius-check": (cmd_submoebius_check, "check the sub-Möbius axioms of a table"),
        "is-moebius": (cmd_is_moebius, "test conditions (A) and (B) on every 5-tuple"),
        "reconstruct": (cmd_reconstruct, "recover the semi-metric of a scale triple"),
        "equivalent": (cmd_equivalent, "compare the Möbius structures of two spaces"),
        "demo": (cmd_demo, "run the built-in examples"),
    }
    for name, (func, text) in simple.items():
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(func=func)

    p = sub.add_parser("hyperbolic", parents=[common], help="Gromov-product boundary models")
    p.add_argument("action", choices=("build", "perturb", "symmetrize", "deviation"))
    p.add_argument("--basepoint", help="basepoint id (metric source) or re-rooting vertex (tree source)")
    p.add_argument("--table", help="structure to compare against M_o (deviation)")
    p.set_defaults(func=cmd_hyperbolic)

    p = sub.add_parser("topology", parents=[common], help="sandwich inclusions and topology comparison")
    p.add_argument("action", choices=("sandwich", "compare"))
    p.add_argument("--variant", choices=("standard", "submoebius", "both"), default="both")
    p.set_defaults(func=cmd_topology)
    return parser


def _render_text(command: str, ok: bool, data: dict) -> str:
    lines = [f"{command}: {'PASS' if ok else 'FAIL'}"]

    def walk(prefix, value):
        if isinstance(value, dict):
            for k, v in value.items():
                walk(f"{prefix}.{k}" if prefix else k, v)
        elif isinstance(value, list) and value and isinstance(value[0], (dict, list)):
            for i, v in enumerate(value):
                walk(f"{prefix}[{i}]", v)
        else:
            lines.append(f"  {prefix}: {json.dumps(value, ensure_ascii=False)}")

    walk("", data)
    return "\n".join(lines)


def _emit(args, command: str, status: str, data: dict) -> None:
    report = {"schema_version": SCHEMA_VERSION, "command": command, "status": status, **data}
    if args.format == "json":
        print(json.dumps(report, indent=2, ensure_ascii=False))
    elif status in ("pass", "fail"):
        print(_render_text(command, status == "pass", data))
    else:
        print(f"{command}: {status}: {data.get('error')}", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command + (f" {args.action}" if hasattr(args, "action") else "")
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        ok, data = args.func(args)
    except InputError as exc:
        _emit(args, command, "input-error", {"error": str(exc)})
        return EXIT_INPUT
    except PreconditionError as exc:
        _emit(args, command, "precondition-error", {"error": str(exc)})
        return EXIT_PRECONDITION
    _emit(args, command, "pass" if ok else "fail", data)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
