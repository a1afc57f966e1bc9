"""Problem-file parsing, certificate serialization and report rendering.

Problem files are UTF-8 JSON.  Every scalar is an exact rational written as
a string "n/d" or "n" (plain JSON integers are accepted too and
canonicalized).  Two kinds exist:

constraint system::

    {"kind": "constraint",
     "dims": {"l": 2, "n": 2, "m": 4},
     "Jp": [["-1","0"], ...],           # m x l, row major
     "Jx": [["1","0"], ...],            # m x n
     "g0": ["0","0","0","0"],
     "D": {"pieces": [{"A": [...], "b": [...], "E": [...], "e": [...]}]},
     "hessians": [[["-2","0"],["0","0"]], ...],   # optional, one n x n per row
     "param_lipschitz": true,
     "label": "..."}

variational system::

    {"kind": "variational",
     "dims": {"l": 1, "n": 2},
     "Jp": [...], "Jx": [...],
     "xbar": ["0","0"], "ybarstar": ["0","0"],
     "gamma": {"A": [...], "b": [...], "E": [...], "e": [...]},
     "param_lipschitz": true}

Parsing errors carry the JSON path of the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .certify import (
    Certificate,
    ConstraintSystemSpec,
    VariationalSystemSpec,
    Witness,
    vec_plain,
)
from .linalg import QMatrix, QVector
from .sets import InfeasibleError, Polyhedron, UnionSet


class ProblemFileError(ValueError):
    pass


def _rat(value, path: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ProblemFileError(f"{path}: expected a rational string like '1/2', got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ProblemFileError(f"{path}: not a rational: {value!r} ({exc})") from None


def _vector(value, path: str, dim: int | None = None) -> QVector:
    if not isinstance(value, list):
        raise ProblemFileError(f"{path}: expected a list of rationals")
    v = QVector([_rat(x, f"{path}[{i}]") for i, x in enumerate(value)])
    if dim is not None and v.dim != dim:
        raise ProblemFileError(f"{path}: expected length {dim}, got {v.dim}")
    return v


def _matrix(value, path: str, nrows: int | None = None, ncols: int | None = None) -> QMatrix:
    if not isinstance(value, list):
        raise ProblemFileError(f"{path}: expected a list of rows")
    rows = [_vector(r, f"{path}[{i}]", ncols) for i, r in enumerate(value)]
    m = QMatrix(rows)
    if nrows is not None and m.nrows != nrows:
        raise ProblemFileError(f"{path}: expected {nrows} rows, got {m.nrows}")
    return m


def _polyhedron(value, path: str, dim: int) -> Polyhedron:
    if not isinstance(value, dict):
        raise ProblemFileError(f"{path}: expected an object with A/b/E/e")
    a = _matrix(value.get("A", []), f"{path}.A", ncols=dim if value.get("A") else None)
    b = [_rat(x, f"{path}.b[{i}]") for i, x in enumerate(value.get("b", []))]
    e_mat = _matrix(value.get("E", []), f"{path}.E", ncols=dim if value.get("E") else None)
    e_rhs = [_rat(x, f"{path}.e[{i}]") for i, x in enumerate(value.get("e", []))]
    if a.nrows != len(b):
        raise ProblemFileError(f"{path}: A has {a.nrows} rows but b has {len(b)} entries")
    if e_mat.nrows != len(e_rhs):
        raise ProblemFileError(f"{path}: E has {e_mat.nrows} rows but e has {len(e_rhs)} entries")
    try:
        return Polyhedron(dim, list(a.rows), b, list(e_mat.rows), e_rhs)
    except InfeasibleError:
        raise ProblemFileError(f"{path}: polyhedron is empty") from None


def problem_from_dict(data: dict, source: str = "<problem>"):
    kind = data.get("kind")
    if kind not in ("constraint", "variational"):
        raise ProblemFileError(f"{source}.kind: must be 'constraint' or 'variational'")
    dims = data.get("dims")
    if not isinstance(dims, dict) or "l" not in dims or "n" not in dims:
        raise ProblemFileError(f"{source}.dims: need integer fields l, n" + (", m" if kind == "constraint" else ""))
    l, n = int(dims["l"]), int(dims["n"])
    lip = bool(data.get("param_lipschitz", False))
    label = str(data.get("label", ""))
    if kind == "constraint":
        if "m" not in dims:
            raise ProblemFileError(f"{source}.dims.m: required for constraint systems")
        m = int(dims["m"])
        jp = _matrix(data.get("Jp"), f"{source}.Jp", nrows=m, ncols=l if l else None)
        jx = _matrix(data.get("Jx"), f"{source}.Jx", nrows=m, ncols=n)
        g0 = _vector(data.get("g0"), f"{source}.g0", m)
        dd = data.get("D")
        if not isinstance(dd, dict) or not isinstance(dd.get("pieces"), list) or not dd["pieces"]:
            raise ProblemFileError(f"{source}.D.pieces: need a nonempty list of polyhedra")
        pieces = [_polyhedron(p, f"{source}.D.pieces[{i}]", m) for i, p in enumerate(dd["pieces"])]
        hessians = None
        if data.get("hessians") is not None:
            hessians = [
                _matrix(h, f"{source}.hessians[{i}]", nrows=n, ncols=n)
                for i, h in enumerate(data["hessians"])
            ]
            if len(hessians) != m:
                raise ProblemFileError(f"{source}.hessians: expected {m} matrices, got {len(hessians)}")
        try:
            return ConstraintSystemSpec(
                l, n, m, jp, jx, g0, UnionSet(pieces), hessians, param_lipschitz=lip, label=label
            )
        except ValueError as exc:
            raise ProblemFileError(f"{source}: {exc}") from None
    else:
        jp = _matrix(data.get("Jp"), f"{source}.Jp", nrows=n, ncols=l if l else None)
        jx = _matrix(data.get("Jx"), f"{source}.Jx", nrows=n, ncols=n)
        xbar = _vector(data.get("xbar"), f"{source}.xbar", n)
        ybarstar = _vector(data.get("ybarstar"), f"{source}.ybarstar", n)
        gamma = _polyhedron(data.get("gamma"), f"{source}.gamma", n)
        try:
            return VariationalSystemSpec(
                l, n, jp, jx, gamma, xbar, ybarstar, param_lipschitz=lip, label=label
            )
        except ValueError as exc:
            raise ProblemFileError(f"{source}: {exc}") from None


def parse_problem(path: str):
    """Load and validate a problem file; raises ProblemFileError with the
    offending JSON path on any defect."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ProblemFileError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return problem_from_dict(data, source=path)


def _mat_plain(m: QMatrix) -> list[list[str]]:
    return [vec_plain(r) for r in m.rows]


def _poly_plain(p: Polyhedron) -> dict:
    return {
        "A": [vec_plain(a) for a in p.A],
        "b": [str(x) for x in p.b],
        "E": [vec_plain(g) for g in p.E],
        "e": [str(x) for x in p.e],
    }


def problem_to_dict(spec) -> dict:
    """Serialize a spec back to the problem-file shape (canonicalized)."""
    if spec.kind == "constraint":
        out = {
            "kind": "constraint",
            "dims": {"l": spec.l, "n": spec.n, "m": spec.m},
            "Jp": _mat_plain(spec.Jp),
            "Jx": _mat_plain(spec.Jx),
            "g0": vec_plain(spec.g0),
            "D": {"pieces": [_poly_plain(p) for p in spec.D.pieces]},
            "param_lipschitz": spec.param_lipschitz,
            "label": spec.label,
        }
        if spec.hessians is not None:
            out["hessians"] = [_mat_plain(h) for h in spec.hessians]
        return out
    return {
        "kind": "variational",
        "dims": {"l": spec.l, "n": spec.n},
        "Jp": _mat_plain(spec.Jp),
        "Jx": _mat_plain(spec.Jx),
        "xbar": vec_plain(spec.xbar),
        "ybarstar": vec_plain(spec.ybarstar),
        "gamma": _poly_plain(spec.gamma),
        "param_lipschitz": spec.param_lipschitz,
        "label": spec.label,
    }


# -- certificates -------------------------------------------------------------


def _witness_plain(w: Witness) -> dict:
    return {
        "stratum": w.stratum,
        "vstar": vec_plain(w.vstar) if w.vstar is not None else None,
        "u": vec_plain(w.u) if w.u is not None else None,
        "q": vec_plain(w.q) if w.q is not None else None,
    }


def certificate_to_dict(cert: Certificate) -> dict:
    return {
        "status": cert.status,
        "refuted": cert.refuted,
        "witnesses": [_witness_plain(w) for w in cert.witnesses],
        "rates": [[k, v] for k, v in cert.rates] if cert.rates is not None else None,
        "notes": list(cert.notes),
        "trace": json.loads(json.dumps(cert.trace)),
    }


def _vec_from_plain(v) -> QVector | None:
    return None if v is None else QVector(v)


def certificate_from_dict(data: dict) -> Certificate:
    return Certificate(
        status=data["status"],
        witnesses=tuple(
            Witness(
                w["stratum"],
                _vec_from_plain(w["vstar"]),
                u=_vec_from_plain(w["u"]),
                q=_vec_from_plain(w["q"]),
            )
            for w in data["witnesses"]
        ),
        rates=tuple((k, v) for k, v in data["rates"]) if data["rates"] is not None else None,
        refuted=data["refuted"],
        trace=_freeze(data["trace"]),
        notes=tuple(data["notes"]),
    )


def _freeze(trace):
    # trace records are JSON-plain dicts; only the top level is a tuple
    return tuple(trace)


@dataclass(frozen=True)
class Report:
    """Human-readable derivation text plus the machine-readable certificate."""

    check: str
    certificate: Certificate
    text: str

    def json_block(self) -> str:
        return json.dumps(
            {"check": self.check, "certificate": certificate_to_dict(self.certificate)},
            sort_keys=True,
            indent=1,
        )


def _cone_line(c: dict) -> str:
    parts = []
    if c["rays"]:
        parts.append("rays " + " ".join("(" + ",".join(r) + ")" for r in c["rays"]))
    if c["lin"]:
        parts.append("lin " + " ".join("(" + ",".join(r) + ")" for r in c["lin"]))
    if not parts:
        parts.append("{0}")
    return ", ".join(parts)


def _render_trace(trace, verbosity: str) -> list[str]:
    lines: list[str] = []
    if verbosity == "off":
        return lines
    for rec in trace:
        if "phase" in rec:
            lines.append(f"[{rec['phase']}]")
            if "covered" in rec:
                lines.append(f"  parameter directions covered: {rec['covered']}")
            for case in rec.get("cases", []):
                lines.append(f"  case: {case['case']}")
                for entry in case["adjoint_inclusions"]:
                    s = entry["sample_direction"]
                    lines.append(
                        "    direction q=(" + ",".join(s["q"]) + "), u=(" + ",".join(s["u"]) + ")"
                        f" -> adjoint cone {_cone_line(entry['adjoint_cone'])}: {entry['outcome']}"
                    )
            for piece in rec.get("pieces", []):
                gens = piece.get("nontrivial_generators", [])
                if gens:
                    lines.append(
                        "  zero-direction piece " + _cone_line(piece["piece"]) +
                        " admits nontrivial duals: " +
                        " ".join("(" + ",".join(g) + ")" for g in gens)
                    )
                elif verbosity == "full":
                    lines.append("  zero-direction piece " + _cone_line(piece["piece"]) + ": trivial dual")
        elif "stratum" in rec or "adjoint_stratum" in rec or "piece" in rec:
            label = rec.get("stratum") or rec.get("adjoint_stratum") or rec.get("piece")
            lines.append(f"  stratum {label}: {rec.get('outcome', '')}")
            if verbosity == "full":
                for key in ("normal_cone", "dual_test_cone", "adjoint_cone", "joint_adjoint_cone"):
                    if key in rec:
                        lines.append(f"    {key}: {_cone_line(rec[key])}")
    return lines


def render_report(check: str, cert: Certificate, verbosity: str = "summary") -> Report:
    lines = [f"check: {check}", f"status: {cert.status}" + (" (refuted)" if cert.refuted else "")]
    if cert.rates is not None:
        for k, v in cert.rates:
            lines.append(f"rate {k}: {v}")
    for w in cert.witnesses:
        bits = [f"witness in stratum [{w.stratum}]"]
        if w.vstar is not None:
            bits.append(f"v*={w.vstar!r}")
        if w.u is not None:
            bits.append(f"u={w.u!r}")
        if w.q is not None:
            bits.append(f"q={w.q!r}")
        lines.append("  " + ", ".join(bits))
    for note in cert.notes:
        lines.append(f"note: {note}")
    lines.extend(_render_trace(cert.trace, verbosity))
    return Report(check, cert, "\n".join(lines))
