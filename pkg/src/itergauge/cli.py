"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage error or malformed
input, 3 internal error, 4 resource limit.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from typing import Sequence

from .abelian import InvalidArgument, ResourceLimit, make_group, subgroup_closure
from .codes import ConstructionError, StabilizerCode, build_code, dumps, loads, verify_code
from .pauli import DEFAULT_DENSE_CAP
from .simulate import ZeroNorm, boundary_state, charged_boundary_state, emergent_state
from .symmetry import build_system

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL, EXIT_RESOURCE = 0, 1, 2, 3, 4
TOLERANCE = 1e-10

MODEL_NAMES = {"surface": "zero-form", "lss-fracton": "lss", "sierpinski": "sierpinski"}
FAR_END_NOTE = {
    "mirrored": "far end: truncated bulk terms on the top layer (finite-stack choice)",
    "open": "far end: open, no terms on the top layer",
}


class UsageError(Exception):
    pass


def parse_group(text: str):
    if not re.fullmatch(r"\d+(x\d+)*", text):
        raise UsageError(f"group must look like 2 or 2x2x3, got {text!r}")
    try:
        return make_group(int(x) for x in text.split("x"))
    except InvalidArgument as exc:
        raise UsageError(str(exc)) from exc


def parse_size(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)(?:x(\d+))?", text)
    if not m:
        raise UsageError(f"size must look like 3 or 3x3, got {text!r}")
    a = int(m.group(1))
    return a, int(m.group(2) or a)


def parse_subgroup(text: str, group):
    """``all`` (the whole group), ``none`` (trivial) or ``"(1,0);(0,2)"``."""
    if text == "all":
        return subgroup_closure(group, group.factor_generators())
    if text == "none":
        return subgroup_closure(group, [])
    gens = []
    for part in text.split(";"):
        m = re.fullmatch(r"\s*\(?\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\)?\s*", part)
        if not m:
            raise UsageError(f"cannot read subgroup generator {part!r}")
        label = tuple(int(x) for x in m.group(1).split(","))
        if len(label) != group.rank:
            raise UsageError(f"generator {label} has {len(label)} components, group has {group.rank}")
        gens.append(label)
    return subgroup_closure(group, gens)


def _check_model(model: str, group, size: tuple[int, int]) -> None:
    if model == "sierpinski":
        if group.orders != (2,):
            raise UsageError(f"the sierpinski model supports only the group 2 (Z2), got {'x'.join(map(str, group.orders))}")
        n = size[0]
        if size[0] != size[1] or n < 3 or (n + 1) & n:
            raise UsageError(f"the sierpinski model needs an L x L torus with L = 2^m - 1, got {size[0]}x{size[1]}")


def build_from_args(args) -> StabilizerCode:
    group = parse_group(args.group)
    size = parse_size(args.size)
    _check_model(args.model, group, size)
    H = parse_subgroup(args.boundary_gens, group)
    try:
        system = build_system(MODEL_NAMES[args.model], size, group)
        return build_code(system, args.depth, args.start, H, args.locality_bound, args.far_end)
    except InvalidArgument as exc:
        raise UsageError(str(exc)) from exc


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load(path: str) -> StabilizerCode:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return loads(text)
    except InvalidArgument as exc:
        raise UsageError(f"malformed document: {exc}") from exc


def _counts_line(code: StabilizerCode) -> str:
    return "generators: " + ", ".join(f"{k}={v}" for k, v in code.counts().items())


def cmd_build(args) -> int:
    code = build_from_args(args)
    _emit(dumps(code), args.output)
    info = sys.stderr if args.output in (None, "-") else sys.stdout
    print(f"sites: {len(code.registry)}", file=info)
    print(_counts_line(code), file=info)
    print(FAR_END_NOTE[code.far_end], file=info)
    return EXIT_OK


def cmd_verify(args) -> int:
    code = _load(args.path)
    report = verify_code(code, dimension=args.dimension)
    oversized = [k for k, g in enumerate(code.generators)
                 if g.tag != "emergent-constraint" and g.operator.weight > code.locality_bound]
    ok = report.commuting and not oversized
    if args.json:
        print(json.dumps({
            "ok": ok,
            "commuting": report.commuting,
            "offending_pair": list(report.offending) if report.offending else None,
            "oversized": oversized,
            "counts": report.counts,
            "dimension": report.dimension,
            "far_end": code.far_end,
        }))
    else:
        print(f"sites: {len(code.registry)}")
        print(_counts_line(code))
        if report.commuting:
            print("commutation: all pairs commute")
        else:
            a, b = report.offending
            ga, gb = code.generators[a], code.generators[b]
            print(f"commutation: FAIL generators {a} ({ga.tag} {ga.location}) and {b} ({gb.tag} {gb.location})")
        for k in oversized:
            print(f"locality: FAIL generator {k} has support {code.generators[k].operator.weight}")
        if report.dimension is not None:
            print(f"code dimension: {report.dimension}")
        print(FAR_END_NOTE.get(code.far_end, f"far end: {code.far_end}"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_simulate(args) -> int:
    code = _load(args.path)
    system = code.system
    H = code.boundary if args.boundary is None else parse_subgroup(args.boundary, code.group)
    make = charged_boundary_state if args.charged else boundary_state
    try:
        psi = make(system, H, code.start, args.cap)
        _, state = emergent_state(system, code.lattice.depth, code.start, psi, args.cap)
    except ZeroNorm as exc:
        if args.json:
            print(json.dumps({"ok": False, "error": "zero norm", "norm": exc.norm}))
        else:
            print(f"zero norm: the emergent state vanishes (norm {exc.norm:.3e}); the boundary state is charged")
        return EXIT_FAIL
    results = []
    if args.check_stabilizers:
        report = verify_code(code, state)
        results = [(k, code.generators[k], v) for k, v in report.expectations.items()]
    bad = [r for r in results if abs(r[2] - 1) >= TOLERANCE]
    if args.json:
        print(json.dumps({
            "ok": not bad,
            "amplitudes": state.dimension,
            "checked": len(results),
            "failed": [k for k, _, _ in bad],
            "expectations": [[k, v.real, v.imag] for k, _, v in results],
        }))
    else:
        print(f"emergent state: {len(code.registry)} sites, {state.dimension} amplitudes")
        for k, g, v in results:
            mark = "ok" if abs(v - 1) < TOLERANCE else "FAIL"
            print(f"{k:5d} {g.tag:20s} {g.location:24s} {v.real:+.12f}{v.imag:+.12f}i {mark}")
        if args.check_stabilizers:
            print(f"stabilizers: {len(results) - len(bad)}/{len(results)} at +1 within {TOLERANCE:g}")
        print(FAR_END_NOTE.get(code.far_end, f"far end: {code.far_end}"))
    return EXIT_FAIL if bad else EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="itergauge", description="Stacked stabilizer codes from iterated gauging.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a model and write its JSON code document")
    b.add_argument("--model", required=True, choices=sorted(MODEL_NAMES))
    b.add_argument("--group", default="2", help="cyclic factor orders, e.g. 2 or 2x2x3")
    b.add_argument("--size", default="3x3", help="torus size, e.g. 3x3 (sierpinski: L with L = 2^m - 1)")
    b.add_argument("--depth", type=int, default=2)
    b.add_argument("--start", choices=["matter", "gauge"], default="matter")
    b.add_argument("--boundary-gens", default="all", help="'all', 'none' or generator tuples like '(1,0);(0,2)'")
    b.add_argument("--locality-bound", type=int, default=8)
    b.add_argument("--far-end", choices=["mirrored", "open"], default="mirrored")
    b.add_argument("-o", "--output", help="output path (default: stdout)")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="re-run the exact checks on a code document")
    v.add_argument("path")
    v.add_argument("--dimension", action="store_true", help="also compute the code dimension")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="build the emergent state densely and measure the generators")
    s.add_argument("path")
    s.add_argument("--check-stabilizers", action="store_true")
    s.add_argument("--boundary", help="boundary subgroup for the state (default: the code's)")
    s.add_argument("--charged", action="store_true", help="start from a charged boundary state")
    s.add_argument("--cap", type=int, default=DEFAULT_DENSE_CAP, help="maximum number of amplitudes")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConstructionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
