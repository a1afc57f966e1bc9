"""Command-line surface.

Subcommands::

    polyvar cones FILE --at Y [--ystar YSTAR]
    polyvar graph-normal FILE [--dir "V;VSTAR"] [--regular | --limiting]
    polyvar certify FILE --check CHECK [--dir ...] [--gpp ...] [--assume-subregular]
    polyvar examples run {3,4,5}
    polyvar oracle FILE [--at Y] --dir ...

Vectors are comma-separated rationals ("1,-1/2"); graph directions take a
primal and a dual part separated by ";".  Values starting with a minus sign
need the "--dir=-1,0;0,0" form.  Exit codes: 0 holds/match,
1 not certified/refuted/mismatch, 2 inconclusive, 3 usage or input error.
The environment variable POLYVAR_TRACE (full | summary | off) controls how
much derivation detail is printed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources

from .certify import (
    HOLDS,
    INCONCLUSIVE,
    NOT_CERTIFIED,
    check_aubin,
    check_calmness_constraint,
    check_directional_metric_regularity,
    check_foscms,
    check_foscms_joint,
    check_second_order_directional_subregularity,
    check_soscms,
    vec_plain,
)
from .fileio import ProblemFileError, parse_problem, render_report
from .graphmap import (
    directional_limiting_normal_graph,
    limiting_normal_graph,
    regular_normal_graph,
)
from .linalg import QVector, frac
from .oracle import piece_sets_equal, sample_graph_directional, sample_union_normals
from .sets import critical_cone, directional_normal_cone, union_tangent_cone

EXIT_BY_STATUS = {HOLDS: 0, NOT_CERTIFIED: 1, INCONCLUSIVE: 2}


class UsageError(Exception):
    pass


def _parse_vector(text: str, dim: int | None = None, what: str = "vector") -> QVector:
    try:
        v = QVector([frac(part.strip()) for part in text.split(",")])
    except (ValueError, TypeError):
        raise UsageError(f"cannot parse {what} {text!r}; expected comma-separated rationals")
    if dim is not None and v.dim != dim:
        raise UsageError(f"{what} must have {dim} entries, got {v.dim}")
    return v


def _parse_pair(text: str, dims: tuple[int, int]) -> tuple[QVector, QVector]:
    if ";" not in text:
        raise UsageError("graph directions look like 'v1,v2;w1,w2'")
    a, b = text.split(";", 1)
    return _parse_vector(a, dims[0], "primal direction"), _parse_vector(b, dims[1], "dual direction")


def _verbosity() -> str:
    v = os.environ.get("POLYVAR_TRACE", "summary").lower()
    return v if v in ("full", "summary", "off") else "summary"


def _print_cone(label: str, cone) -> None:
    print(f"{label}:")
    print(f"  rays: {[tuple(map(str, r.entries)) for r in cone.rays]}")
    print(f"  lin:  {[tuple(map(str, l.entries)) for l in cone.lin]}")
    print(f"  ineqs: {[tuple(map(str, a.entries)) for a in cone.ineqs]}  eqs: {[tuple(map(str, e.entries)) for e in cone.eqs]}")


def _cmd_cones(args) -> int:
    spec = parse_problem(args.file)
    if spec.kind == "constraint":
        y = _parse_vector(args.at, spec.m, "--at point")
        idx = spec.D.pieces_containing(y)
        if not idx:
            raise UsageError("point lies in no piece of D")
        for i in idx:
            piece = spec.D.pieces[i]
            _print_cone(f"tangent cone of piece {i}", piece.tangent_cone(y))
            _print_cone(f"normal cone of piece {i}", piece.normal_cone(y))
            if args.ystar:
                ystar = _parse_vector(args.ystar, spec.m, "--ystar")
                cc = critical_cone(piece, y, ystar)
                if cc is None:
                    print(f"critical cone of piece {i}: absent (ystar is not a normal vector there)")
                else:
                    _print_cone(f"critical cone of piece {i}", cc)
        tangent = union_tangent_cone(spec.D, y)
        print(f"union tangent cone: {len(tangent.pieces)} piece(s)")
        for j, c in enumerate(tangent.pieces):
            _print_cone(f"  piece {j}", c)
    else:
        y = _parse_vector(args.at, spec.n, "--at point")
        if not spec.gamma.contains(y):
            raise UsageError("point lies outside gamma")
        _print_cone("tangent cone", spec.gamma.tangent_cone(y))
        _print_cone("normal cone", spec.gamma.normal_cone(y))
        if args.ystar:
            ystar = _parse_vector(args.ystar, spec.n, "--ystar")
            cc = critical_cone(spec.gamma, y, ystar)
            if cc is None:
                print("critical cone: absent (ystar is not a normal vector there)")
            else:
                _print_cone("critical cone", cc)
    return 0


def _cmd_graph_normal(args) -> int:
    spec = parse_problem(args.file)
    if spec.kind != "variational":
        raise UsageError("graph-normal needs a variational problem file")
    gp = spec.graph_point()
    if args.regular:
        gnc = regular_normal_graph(gp)
        title = "regular normal cone to the graph"
    elif args.limiting or not args.dir:
        gnc = limiting_normal_graph(gp)
        title = "limiting normal cone to the graph"
    else:
        v, vstar = _parse_pair(args.dir, (spec.n, spec.n))
        gnc = directional_limiting_normal_graph(gp, v, vstar)
        title = f"directional limiting normal cone in direction ({v!r}; {vstar!r})"
    print(f"{title}: {len(gnc.pieces)} product piece(s)")
    for i, p in enumerate(gnc.pieces):
        print(f"piece {i}: K x K-polar, faces F1={sorted(p.f1.active_set)} F2={sorted(p.f2.active_set)}")
        _print_cone("  K", p.k)
        _print_cone("  K polar", p.kpolar)
    print("--- pieces JSON ---")
    print(json.dumps(gnc.to_plain(), sort_keys=True, indent=1))
    return 0


def _run_check(spec, check: str, args):
    if check in ("foscms", "soscms", "calmness", "calmness2") and spec.kind != "constraint":
        raise UsageError(f"--check {check} needs a constraint system")
    if check == "foscms":
        return check_foscms(spec)
    if check == "soscms":
        return check_soscms(spec)
    if check == "calmness":
        return check_calmness_constraint(spec, "first")
    if check == "calmness2":
        return check_calmness_constraint(spec, "second")
    if check == "aubin":
        return check_aubin(spec, "corollary")
    if check == "aubin-theorem":
        return check_aubin(spec, "theorem", assume_subregular=args.assume_subregular)
    if check == "foscms-joint":
        return check_foscms_joint(spec)
    if check == "dir-subreg":
        if not args.dir:
            raise UsageError("--check dir-subreg needs --dir u")
        u = _parse_vector(args.dir, spec.n, "--dir")
        gpp = _parse_vector(args.gpp, None, "--gpp") if args.gpp else None
        return check_second_order_directional_subregularity(spec, u, gpp)
    if check == "dir-reg":
        if not args.dir:
            raise UsageError("--check dir-reg needs --dir 'u;v'")
        m = spec.m if spec.kind == "constraint" else spec.n
        u, v = _parse_pair(args.dir, (spec.n, m))
        return check_directional_metric_regularity(spec, u, v)
    raise UsageError(f"unknown check {check!r}")


def _cmd_certify(args) -> int:
    spec = parse_problem(args.file)
    cert = _run_check(spec, args.check, args)
    report = render_report(args.check, cert, _verbosity())
    print(report.text)
    print("--- certificate JSON ---")
    print(report.json_block())
    return EXIT_BY_STATUS[cert.status]


def bundled_problem_path(name: str) -> str:
    res = resources.files("polyvar").joinpath("problems", name)
    return str(res)


_EXPECTED = {
    "3": [
        ("foscms", "holds", {}),
        ("calmness", "holds", {"linear_solvability": True}),
        ("aubin", "not_certified", {}),
    ],
    "4": [
        ("foscms", "not_certified", {"witness_vstar": ["1", "1"]}),
        ("soscms", "holds", {}),
        ("calmness2", "holds", {"hoelder_half_solvability": True}),
        ("dir-subreg", "holds", {"dir": "1,0"}),
    ],
    "5": [
        ("aubin", "holds", {"cases": 4, "std_nontrivial": [["-1", "2"], ["-1", "-2"]]}),
        ("aubin-theorem", "holds", {}),
    ],
}


def _cmd_examples(args) -> int:
    if args.action != "run":
        raise UsageError("usage: polyvar examples run {3|4|5}")
    name = args.which
    if name not in _EXPECTED:
        raise UsageError("known examples: 3, 4, 5")
    path = bundled_problem_path(f"ex{name}.json")
    spec = parse_problem(path)
    failures = []
    ns = argparse.Namespace(dir=None, gpp=None, assume_subregular=False)
    for check, want_status, extra in _EXPECTED[name]:
        ns.dir = extra.get("dir")
        cert = _run_check(spec, check, ns)
        ok = cert.status == want_status
        detail = [f"status={cert.status} (expected {want_status})"]
        for rate, want in (
            ("linear_solvability", extra.get("linear_solvability")),
            ("hoelder_half_solvability", extra.get("hoelder_half_solvability")),
        ):
            if want is not None:
                got = cert.rate(rate)
                ok &= got == want
                detail.append(f"{rate}={got}")
        if "witness_vstar" in extra:
            got = [vec_plain(w.vstar) for w in cert.witnesses if w.vstar is not None]
            ok &= extra["witness_vstar"] in got
            detail.append(f"witness v* candidates={got}")
        if "cases" in extra:
            phase_b = next(t for t in cert.trace if str(t.get("phase", "")).startswith("B"))
            n_cases = len(phase_b["cases"])
            all_trivial = all(
                e["trivial"] for c in phase_b["cases"] for e in c["adjoint_inclusions"]
            )
            ok &= n_cases == extra["cases"] and all_trivial
            detail.append(f"direction cases={n_cases}, all adjoint inclusions trivial={all_trivial}")
        if "std_nontrivial" in extra:
            std = next(t for t in cert.trace if str(t.get("phase", "")).startswith("standard"))
            gens = sorted(g for p in std["pieces"] for g in p["nontrivial_generators"])
            ok &= gens == sorted(extra["std_nontrivial"])
            detail.append(f"standard adjoint nontrivial generators={gens}")
        print(("PASS" if ok else "FAIL") + f" example {name} {check}: " + "; ".join(detail))
        if not ok:
            failures.append(check)
    return 0 if not failures else 1


def _cmd_oracle(args) -> int:
    spec = parse_problem(args.file)
    if spec.kind == "constraint":
        if not args.dir:
            raise UsageError("oracle on a constraint file needs --dir w")
        y = _parse_vector(args.at, spec.m, "--at") if args.at else spec.g0
        w = _parse_vector(args.dir, spec.m, "--dir")
        closed = directional_normal_cone(spec.D, y, w)
        sampled = sample_union_normals(spec.D, y, w)
        match = {c.key() for c in closed.pieces} == {c.key() for c in sampled.pieces}
        print(f"closed form: {len(closed.pieces)} piece(s); sampling oracle: {len(sampled.pieces)} piece(s)")
    else:
        if not args.dir:
            raise UsageError("oracle on a variational file needs --dir 'v;vstar'")
        v, vstar = _parse_pair(args.dir, (spec.n, spec.n))
        gp = spec.graph_point()
        closed = directional_limiting_normal_graph(gp, v, vstar)
        sampled = sample_graph_directional(gp, v, vstar)
        match = piece_sets_equal([p.k for p in closed.pieces], sampled)
        print(f"closed form: {len(closed.pieces)} piece(s); sampling oracle: {len(sampled)} piece(s)")
    print("MATCH" if match else "MISMATCH: the sampling oracle is authoritative; please report this input")
    return 0 if match else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polyvar", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cones", help="tangent/normal/critical cones at a point")
    p.add_argument("file")
    p.add_argument("--at", required=True)
    p.add_argument("--ystar")
    p.set_defaults(fn=_cmd_cones)

    p = sub.add_parser("graph-normal", help="normal cones to the graph of the normal-cone map")
    p.add_argument("file")
    p.add_argument("--dir")
    p.add_argument("--regular", action="store_true")
    p.add_argument("--limiting", action="store_true")
    p.set_defaults(fn=_cmd_graph_normal)

    p = sub.add_parser("certify", help="run a stability certificate")
    p.add_argument("file")
    p.add_argument(
        "--check",
        required=True,
        choices=["foscms", "soscms", "calmness", "calmness2", "aubin", "aubin-theorem", "foscms-joint", "dir-subreg", "dir-reg"],
    )
    p.add_argument("--dir")
    p.add_argument("--gpp")
    p.add_argument("--assume-subregular", action="store_true")
    p.set_defaults(fn=_cmd_certify)

    p = sub.add_parser("examples", help="golden reproductions of the bundled examples")
    p.add_argument("action", choices=["run"])
    p.add_argument("which")
    p.set_defaults(fn=_cmd_examples)

    p = sub.add_parser("oracle", help="diff a closed form against the sampling oracle")
    p.add_argument("file")
    p.add_argument("--at")
    p.add_argument("--dir")
    p.set_defaults(fn=_cmd_oracle)
    return ap


def run_command(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 3 if exc.code not in (0,) else 0
    try:
        return args.fn(args)
    except (UsageError, ProblemFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    try:
        code = run_command(sys.argv[1:])
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream pager/head closed the pipe; exit quietly
        import os

        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)


if __name__ == "__main__":
    main()
