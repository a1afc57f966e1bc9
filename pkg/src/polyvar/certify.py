"""Decision procedures certifying stability of implicit multifunctions.

Two input shapes are supported.  A *constraint system* couples a smooth map
through its frozen Jacobians ``Jp`` (parameter) and ``Jx`` (decision) with a
finite union of polyhedra ``D`` that the map must hit; a *variational system*
couples the Jacobians with the normal-cone map of a convex polyhedron
``gamma``.  All certificates are sufficiency checks run entirely in exact
rational arithmetic over direction strata:

* ``check_foscms`` / ``check_soscms``: first/second order sufficient
  conditions for metric subregularity of the frozen-parameter system,
* ``check_calmness_constraint``: the same conditions plus solvability rates
  (linear or square-root order) for the parameterized system,
* ``check_aubin``: solvability of the linearized system for every parameter
  direction plus triviality of the direction-stratified adjoint inclusions,
* ``check_directional_metric_regularity``: the exact (if and only if)
  directional criterion, so a failure here is a refutation,
* ``check_second_order_directional_subregularity``: curvature test along one
  direction,
* ``check_foscms_joint``: metric subregularity of the joint map in (p, x),
  used as evidence by the theorem-mode Aubin check.

Every certificate carries a structured trace (JSON-plain) of the strata
examined, and every negative certificate carries witnesses that replay
through the cone layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .cones import PolyCone, face_difference, pick_nonzero
from .graphmap import (
    GraphPoint,
    directional_limiting_normal_graph,
    graph_tangent_member,
    limiting_normal_graph,
)
from .linalg import QMatrix, QVector, row_space_basis
from .sets import (
    InfeasibleError,
    Polyhedron,
    direction_strata,
    directional_normal_cone,
    union_tangent_cone,
)

HOLDS = "holds"
NOT_CERTIFIED = "not_certified"
INCONCLUSIVE = "inconclusive"


# -- specs ---------------------------------------------------------------------


class ConstraintSystemSpec:
    """Frozen first/second order data of a parameterized constraint system."""

    __slots__ = ("l", "n", "m", "Jp", "Jx", "g0", "D", "hessians", "param_lipschitz", "label")

    def __init__(self, l, n, m, Jp, Jx, g0, D, hessians=None, param_lipschitz=True, label=""):
        Jp = Jp if isinstance(Jp, QMatrix) else QMatrix(Jp)
        Jx = Jx if isinstance(Jx, QMatrix) else QMatrix(Jx)
        g0 = g0 if isinstance(g0, QVector) else QVector(g0)
        if Jp.nrows != m or (Jp.rows and Jp.ncols != l):
            raise ValueError("Jp must be m x l")
        if Jx.nrows != m or (Jx.rows and Jx.ncols != n):
            raise ValueError("Jx must be m x n")
        if g0.dim != m or D.dim != m:
            raise ValueError("g0 and D must live in R^m")
        if not D.contains(g0):
            bad = []
            for i, p in enumerate(D.pieces):
                viols = [
                    f"row {j}" for j, (a, bv) in enumerate(zip(p.A, p.b)) if a.dot(g0) > bv
                ] + [
                    f"eq {j}" for j, (g, ev) in enumerate(zip(p.E, p.e)) if g.dot(g0) != ev
                ]
                bad.append(f"piece {i}: violates " + ", ".join(viols))
            raise ValueError("g0 lies in no piece of D (" + "; ".join(bad) + ")")
        if hessians is not None:
            hessians = tuple(h if isinstance(h, QMatrix) else QMatrix(h) for h in hessians)
            if len(hessians) != m:
                raise ValueError("need one Hessian per component")
            for h in hessians:
                if h.nrows != n or h.ncols != n or not h.is_symmetric():
                    raise ValueError("Hessians must be symmetric n x n")
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "Jp", Jp)
        object.__setattr__(self, "Jx", Jx)
        object.__setattr__(self, "g0", g0)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "hessians", hessians)
        object.__setattr__(self, "param_lipschitz", bool(param_lipschitz))
        object.__setattr__(self, "label", label)

    def __setattr__(self, name, value):
        raise AttributeError("spec is immutable")

    kind = "constraint"


class VariationalSystemSpec:
    """Frozen first order data of a generalized equation with a polyhedral
    normal-cone term (so the range dimension equals n)."""

    __slots__ = ("l", "n", "Jp", "Jx", "gamma", "xbar", "ybarstar", "param_lipschitz", "label")

    def __init__(self, l, n, Jp, Jx, gamma, xbar, ybarstar, param_lipschitz=True, label=""):
        Jp = Jp if isinstance(Jp, QMatrix) else QMatrix(Jp)
        Jx = Jx if isinstance(Jx, QMatrix) else QMatrix(Jx)
        xbar = xbar if isinstance(xbar, QVector) else QVector(xbar)
        ybarstar = ybarstar if isinstance(ybarstar, QVector) else QVector(ybarstar)
        if Jp.nrows != n or (Jp.rows and Jp.ncols != l):
            raise ValueError("Jp must be n x l")
        if Jx.nrows != n or Jx.ncols != n:
            raise ValueError("Jx must be n x n")
        if gamma.dim != n or xbar.dim != n or ybarstar.dim != n:
            raise ValueError("gamma, xbar, ybarstar must live in R^n")
        if not gamma.contains(xbar):
            raise ValueError("xbar lies outside gamma")
        if not gamma.normal_cone(xbar).contains(ybarstar):
            raise ValueError("ybarstar is not a normal vector to gamma at xbar")
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "Jp", Jp)
        object.__setattr__(self, "Jx", Jx)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "xbar", xbar)
        object.__setattr__(self, "ybarstar", ybarstar)
        object.__setattr__(self, "param_lipschitz", bool(param_lipschitz))
        object.__setattr__(self, "label", label)

    def __setattr__(self, name, value):
        raise AttributeError("spec is immutable")

    kind = "variational"

    def graph_point(self) -> GraphPoint:
        return GraphPoint(self.gamma, self.xbar, self.ybarstar)


# -- certificates ----------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """A replayable counterexample to a sufficiency condition."""

    stratum: str
    vstar: QVector | None
    u: QVector | None = None
    q: QVector | None = None


@dataclass(frozen=True)
class Certificate:
    status: str
    witnesses: tuple[Witness, ...] = ()
    rates: tuple[tuple[str, bool], ...] | None = None
    refuted: bool = False
    trace: tuple = ()
    notes: tuple[str, ...] = ()

    def holds(self) -> bool:
        return self.status == HOLDS

    def rate(self, name: str) -> bool:
        return bool(self.rates) and dict(self.rates).get(name, False)


# -- plain (JSON-able) views used in traces ---------------------------------------


def vec_plain(v: QVector) -> list[str]:
    return [str(x) for x in v.entries]


def cone_plain(c: PolyCone) -> dict:
    return {
        "dim": c.dim,
        "rays": [vec_plain(r) for r in c.rays],
        "lin": [vec_plain(l) for l in c.lin],
        "ineqs": [vec_plain(a) for a in c.ineqs],
        "eqs": [vec_plain(e) for e in c.eqs],
    }


# -- shared linear-geometry helpers ------------------------------------------------


def _pullback(cone: PolyCone, mat: QMatrix, in_dim: int) -> PolyCone:
    """Preimage {u : mat u ∈ cone} as a cone in R^in_dim."""
    mt = mat.T
    ineqs = [mt.matvec(a) for a in cone.ineqs]
    eqs = [mt.matvec(e) for e in cone.eqs]
    return PolyCone.from_ineqs(in_dim, ineqs, eqs)


def _kernel_cone(mat: QMatrix, dim: int) -> PolyCone:
    """{v : mat^T v = 0} as a subspace cone in R^dim."""
    rows = [mat.col(j) for j in range(mat.ncols)]
    return PolyCone.from_ineqs(dim, [], rows)


def _stack_map(left: QMatrix, right: QMatrix, negate: bool = False) -> QMatrix:
    """Row-wise concatenation [left | right], optionally negated."""
    rows = []
    for lr, rr in zip(left.rows, right.rows):
        row = list(lr.entries) + list(rr.entries)
        if negate:
            row = [-x for x in row]
        rows.append(row)
    return QMatrix(rows)


def _split_qu(vec: QVector, l: int) -> tuple[QVector, QVector]:
    return QVector(vec.entries[:l]), QVector(vec.entries[l:])


# -- Fourier-Motzkin projection -----------------------------------------------------


def fm_project(cone: PolyCone, keep: int) -> PolyCone:
    """Project a cone onto its first ``keep`` coordinates by eliminating the
    trailing variables: equality pivots first, then Fourier-Motzkin on the
    inequalities.  The result is re-canonicalized."""
    ineqs = [list(a.entries) for a in cone.ineqs]
    eqs = [list(e.entries) for e in cone.eqs]
    for var in range(cone.dim - 1, keep - 1, -1):
        pivot = next((r for r in eqs if r[var] != 0), None)
        if pivot is not None:
            eqs.remove(pivot)
            pv = pivot[var]
            for rows in (eqs, ineqs):
                for r in rows:
                    if r[var] != 0:
                        f = r[var] / pv
                        for j in range(len(r)):
                            r[j] -= f * pivot[j]
        else:
            pos = [r for r in ineqs if r[var] > 0]
            neg = [r for r in ineqs if r[var] < 0]
            zero = [r for r in ineqs if r[var] == 0]
            combos = []
            for p in pos:
                for q in neg:
                    combos.append([-q[var] * pi + p[var] * qi for pi, qi in zip(p, q)])
            ineqs = zero + combos
        # prune duplicates to keep growth in check
        seen = set()
        pruned = []
        for r in ineqs:
            v = QVector(r).primitive()
            if v.is_zero() or v.entries in seen:
                continue
            seen.add(v.entries)
            pruned.append(list(v.entries))
        ineqs = pruned
    return PolyCone.from_ineqs(
        keep,
        [QVector(r[:keep]) for r in ineqs],
        [QVector(r[:keep]) for r in eqs],
    )


def _mixed_feasible_point(
    dim: int,
    leq: Sequence[QVector],
    eq: Sequence[QVector],
    strict: Sequence[QVector],
) -> QVector | None:
    """A point q with leq.q <= 0, eq.q = 0 and strict.q < 0, or None."""
    from .cones import _dd

    stricts = [c for c in strict if not c.is_zero()]
    if any(c.is_zero() for c in strict):
        return None
    if not stricts:
        return QVector.zero(dim)
    h_ineqs = [QVector(list(c.entries) + [1]) for c in stricts]
    h_ineqs += [QVector(list(a.entries) + [0]) for a in leq]
    h_ineqs.append(QVector([0] * dim + [-1]))
    h_eqs = [QVector(list(e.entries) + [0]) for e in eq]
    _, rays = _dd(dim + 1, h_ineqs, h_eqs)
    for r in rays:
        if r[dim] > 0:
            return QVector(x / r[dim] for x in r.entries[:dim])
    return None


def covers_space(pieces: Sequence[PolyCone], dim: int) -> tuple[bool, QVector | None]:
    """Does the union of the cones cover R^dim?  If not, return a direction
    in the complement.  Decided by facet-wise splitting of the complement."""
    regions: list[tuple[list[QVector], list[QVector], list[QVector]]] = [([], [], [])]
    for piece in pieces:
        new_regions = []
        for (leq, eq, strict) in regions:
            held_leq: list[QVector] = []
            held_eq: list[QVector] = []
            cells: list[tuple[list[QVector], list[QVector], list[QVector]]] = []
            for a in piece.ineqs:
                cells.append((leq + held_leq, eq + held_eq, strict + [-a]))
                held_leq.append(a)
            for e in piece.eqs:
                cells.append((leq + held_leq, eq + held_eq, strict + [e]))
                cells.append((leq + held_leq, eq + held_eq, strict + [-e]))
                held_eq.append(e)
            for cell in cells:
                if _mixed_feasible_point(dim, *cell) is not None:
                    new_regions.append(cell)
        regions = new_regions
        if not regions:
            return True, None
    wit = _mixed_feasible_point(dim, *regions[0])
    return False, wit


# -- quadratic-form sign analysis (for the second order condition) -----------------


def _det(m: QMatrix) -> Fraction:
    rows = [list(r.entries) for r in m.rows]
    n = m.nrows
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            det = -det
        det *= rows[c][c]
        for i in range(c + 1, n):
            f = rows[i][c] / rows[c][c]
            rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return det


def _neg_definite(m: QMatrix) -> bool:
    """Sylvester test: symmetric m is negative definite."""
    n = m.nrows
    for k in range(1, n + 1):
        sub = QMatrix([r.entries[:k] for r in m.rows[:k]])
        d = _det(sub)
        if (Fraction(-1) ** k) * d <= 0:
            return False
    return True


def _restrict_form(q: QMatrix, basis: Sequence[QVector]) -> QMatrix:
    b = QMatrix(basis)
    return b.matmul(q).matmul(b.T)


def _form_value(q: QMatrix, u: QVector) -> Fraction:
    return u.dot(q.matvec(u))


def _subspace_nonneg_witness(q: QMatrix, basis: Sequence[QVector], dim: int) -> QVector | None:
    """Some nonzero u in span(basis) with u^T q u >= 0, if one can be found."""
    if not basis:
        return None
    m = _restrict_form(q, basis)
    k = len(basis)

    def lift(coeffs: Sequence[Fraction]) -> QVector:
        u = QVector.zero(dim)
        for c, b in zip(coeffs, basis):
            u = u + b.scale(c)
        return u

    for i in range(k):
        if m[i][i] >= 0:
            return lift([Fraction(int(j == i)) for j in range(k)])
    from .linalg import kernel

    ker = kernel(m)
    if ker:
        return lift(ker[0].entries)
    rng = range(-4, 5)
    for combo in product(rng, repeat=k):
        if all(c == 0 for c in combo):
            continue
        coeffs = [Fraction(c) for c in combo]
        u = lift(coeffs)
        if not u.is_zero() and _form_value(q, u) >= 0:
            return u
    return None


def _negativity_on_cone(q: QMatrix, cone: PolyCone) -> tuple[str, QVector | None]:
    """Decide whether u^T q u < 0 for every nonzero u in the cone.

    Returns ("neg", None), ("viol", witness u) or ("unknown", None).  Exact
    for cones with at most two generators, for subspaces, and whenever one of
    the sound certificates (all cross terms nonpositive, or negative
    definiteness on the span) applies; otherwise a bounded rational grid
    search looks for a violation before giving up.
    """
    dim = cone.dim
    rays = list(cone.rays)
    lin = list(cone.lin)
    if not rays and not lin:
        return "neg", None

    if not rays:
        if _neg_definite(_restrict_form(q, lin)):
            return "neg", None
        wit = _subspace_nonneg_witness(q, lin, dim)
        return ("viol", wit) if wit is not None else ("unknown", None)

    diag = [_form_value(q, r) for r in rays]
    for r, d in zip(rays, diag):
        if d >= 0:
            return "viol", r

    if lin:
        span = row_space_basis(lin + rays, dim)
        if _neg_definite(_restrict_form(q, span)):
            return "neg", None
        wit = _subspace_nonneg_witness(q, lin, dim)
        if wit is not None:
            return "viol", wit
        gens = rays + lin + [-l for l in lin]
    else:
        gens = rays

    cross: dict[tuple[int, int], Fraction] = {}
    for i in range(len(rays)):
        for j in range(i + 1, len(rays)):
            b = rays[i].dot(q.matvec(rays[j]))
            cross[(i, j)] = b
            ai, aj = diag[i], diag[j]
            if b > 0 and b * b >= ai * aj:
                # interior maximizer of the restricted 2-generator form
                wit = rays[i].scale(-b / ai) + rays[j]
                if _form_value(q, wit) >= 0 and not wit.is_zero():
                    return "viol", wit
    if not lin:
        if len(rays) <= 2:
            return "neg", None
        if all(b <= 0 for b in cross.values()):
            return "neg", None
        span = row_space_basis(rays, dim)
        if _neg_definite(_restrict_form(q, span)):
            return "neg", None

    # bounded simplex grid over generator coefficients
    denom = 8 if len(gens) <= 3 else (4 if len(gens) <= 5 else 2)
    rng = range(0, denom + 1)
    for combo in product(rng, repeat=len(gens)):
        if all(c == 0 for c in combo):
            continue
        u = QVector.zero(dim)
        for c, g in zip(combo, gens):
            if c:
                u = u + g.scale(Fraction(c, denom))
        if not u.is_zero() and _form_value(q, u) >= 0:
            return "viol", u
    return "unknown", None


# -- constraint-system strata -------------------------------------------------------


def _foscms_strata(spec: ConstraintSystemSpec):
    """Yield (stratum, V, admissible u-cones per reach cell)."""
    ker = _kernel_cone(spec.Jx, spec.m)
    for s in direction_strata(spec.D, spec.g0):
        v_cone = ker.intersect(s.normal)
        u_cells = [_pullback(qc, spec.Jx, spec.n) for qc in s.reach]
        yield s, v_cone, u_cells


def check_foscms(spec: ConstraintSystemSpec) -> Certificate:
    """First order sufficient condition for metric subregularity of the
    frozen-parameter constraint system at the reference point.

    For every direction stratum of D reachable by Jx u with u != 0, the cone
    {v : Jx^T v = 0} ∩ (stratum normal cone) must be trivial.
    """
    if spec.kind != "constraint":
        raise TypeError("check_foscms expects a constraint system")
    trace = []
    witnesses = []
    for s, v_cone, u_cells in _foscms_strata(spec):
        active_cells = [u for u in u_cells if not u.is_trivial()]
        rec = {
            "stratum": s.label,
            "normal_cone": cone_plain(s.normal),
            "dual_test_cone": cone_plain(v_cone),
            "admissible_directions": bool(active_cells),
        }
        if active_cells and not v_cone.is_trivial():
            u = pick_nonzero(active_cells[0])
            vstar = pick_nonzero(v_cone)
            witnesses.append(Witness(s.label, vstar, u=u))
            rec["outcome"] = "violated"
        else:
            rec["outcome"] = "ok"
        trace.append(rec)
    status = NOT_CERTIFIED if witnesses else HOLDS
    return Certificate(status, tuple(witnesses), trace=tuple(trace))


def check_soscms(spec: ConstraintSystemSpec) -> Certificate:
    """Second order sufficient condition for metric subregularity.

    On every stratum that survives the first order test with a nontrivial
    dual cone, a violating pair must additionally make u^T (sum v*_i H_i) u
    nonnegative; triviality of that bilinear system is decided exactly where
    possible and honestly reported as inconclusive otherwise.
    """
    if spec.hessians is None:
        raise ValueError("check_soscms needs the component Hessians")
    trace = []
    witnesses = []
    inconclusive = False
    for s, v_cone, u_cells in _foscms_strata(spec):
        active_cells = [u for u in u_cells if not u.is_trivial()]
        rec = {
            "stratum": s.label,
            "dual_test_cone": cone_plain(v_cone),
            "admissible_directions": bool(active_cells),
        }
        if not active_cells or v_cone.is_trivial():
            rec["outcome"] = "ok (first order)"
            trace.append(rec)
            continue
        if v_cone.lin:
            # both signs of a lineality direction are dual-feasible, so the
            # quadratic term can always be made nonnegative
            u = pick_nonzero(active_cells[0])
            lstar = v_cone.lin[0]
            qform = _hessian_contraction(spec, lstar)
            vstar = lstar if _form_value(qform, u) >= 0 else -lstar
            witnesses.append(Witness(s.label, vstar, u=u))
            rec["outcome"] = "violated (dual lineality)"
            trace.append(rec)
            continue
        stratum_outcome = "ok (quadratic term negative)"
        for rstar in v_cone.rays:
            qform = _hessian_contraction(spec, rstar)
            for u_cell in active_cells:
                verdict, wit = _negativity_on_cone(qform, u_cell)
                if verdict == "viol":
                    witnesses.append(Witness(s.label, rstar, u=wit))
                    stratum_outcome = "violated"
                elif verdict == "unknown":
                    inconclusive = True
                    stratum_outcome = "undecided"
        rec["outcome"] = stratum_outcome
        trace.append(rec)
    if witnesses:
        status = NOT_CERTIFIED
    elif inconclusive:
        status = INCONCLUSIVE
    else:
        status = HOLDS
    return Certificate(status, tuple(witnesses), trace=tuple(trace))


def _hessian_contraction(spec: ConstraintSystemSpec, vstar: QVector) -> QMatrix:
    acc = QMatrix.zero(spec.n, spec.n)
    rows = [list(r.entries) for r in acc.rows]
    for coef, h in zip(vstar.entries, spec.hessians):
        if coef == 0:
            continue
        for i in range(spec.n):
            for j in range(spec.n):
                rows[i][j] += coef * h[i][j]
    return QMatrix(rows)


def check_calmness_constraint(spec: ConstraintSystemSpec, order: str = "first") -> Certificate:
    """Calmness of the parameterized constraint system, with solvability rate.

    Delegates to the first or second order subregularity test; when a nonzero
    direction u with Jx u tangent to D exists, the corresponding solvability
    rate flag is set (linear for first order, square-root for second).
    Tangents of polyhedral sets are derivable, so no extra hypothesis is
    needed for the rate.
    """
    if order not in ("first", "second"):
        raise ValueError("order must be 'first' or 'second'")
    base = check_foscms(spec) if order == "first" else check_soscms(spec)
    tangent = union_tangent_cone(spec.D, spec.g0)
    utilde = None
    for piece in tangent.pieces:
        cand = pick_nonzero(_pullback(piece, spec.Jx, spec.n))
        if cand is not None:
            utilde = cand
            break
    rate_name = "linear_solvability" if order == "first" else "hoelder_half_solvability"
    rates = ((rate_name, utilde is not None),)
    notes = list(base.notes)
    notes.append(f"param_lipschitz asserted by user: {spec.param_lipschitz}")
    if utilde is not None:
        notes.append(
            f"solvability direction u={vec_plain(utilde)}; its image is a derivable tangent "
            "(polyhedral sets: projection arc)"
        )
    if not spec.param_lipschitz:
        notes.append("warning: calmness conclusion assumes the parameter-Lipschitz bound")
    return Certificate(
        base.status,
        base.witnesses,
        rates=rates,
        refuted=base.refuted,
        trace=base.trace,
        notes=tuple(notes),
    )


# -- variational strata ---------------------------------------------------------------


@dataclass(frozen=True)
class _AdjointStratum:
    """A refined direction stratum together with its adjoint solution cone."""

    label: str
    case_label: str
    directions: PolyCone  # cone in (q, u) space
    sample: QVector  # a nonzero direction in it
    piece: PolyCone  # difference cone K (variational) or normal-cone piece (constraint)
    adjoint: PolyCone  # solution cone in v*-space


def _variational_solution_pieces(spec: VariationalSystemSpec, gp: GraphPoint):
    """Per-face solution pieces of the linearized generalized equation."""
    k = gp.critical
    w_map = _stack_map(spec.Jp, spec.Jx, negate=True)  # w = -Jp q - Jx u
    kp = k.polar()
    pieces = []
    for f in k.faces():
        rows_i = []
        rows_e = []
        for a in f.cone.ineqs:
            rows_i.append(QVector([0] * spec.l + list(a.entries)))
        for e in f.cone.eqs:
            rows_e.append(QVector([0] * spec.l + list(e.entries)))
        wt = w_map.T
        for a in kp.ineqs:
            rows_i.append(wt.matvec(a))
        for e in kp.eqs:
            rows_e.append(wt.matvec(e))
        for g in row_space_basis(list(f.cone.rays) + list(f.cone.lin), spec.n):
            rows_e.append(wt.matvec(g))
        piece = PolyCone.from_ineqs(spec.l + spec.n, rows_i, rows_e)
        pieces.append((f, piece))
    return pieces, w_map


def _variational_adjoint_cone(spec: VariationalSystemSpec, kd: PolyCone) -> PolyCone:
    """{v* : -Jx^T v* ∈ Kd°, -v* ∈ Kd} in R^n."""
    kdp = kd.polar()
    rows_i = []
    rows_e = []
    for a in kdp.ineqs:  # a.(-Jx^T v*) <= 0  <=>  -(Jx a).v* <= 0
        rows_i.append(-spec.Jx.matvec(a))
    for e in kdp.eqs:
        rows_e.append(spec.Jx.matvec(e))
    for b in kd.ineqs:  # b.(-v*) <= 0
        rows_i.append(-b)
    for e in kd.eqs:
        rows_e.append(e)
    return PolyCone.from_ineqs(spec.n, rows_i, rows_e)


def _variational_adjoint_strata(spec: VariationalSystemSpec) -> tuple[list[_AdjointStratum], list[PolyCone]]:
    """Direction-stratified adjoint inclusions of the variational system.

    One case per face of the critical cone whose solution piece is
    nontrivial; within a case, one adjoint inclusion per admissible face
    pair, the pair filters imposed as linear equations on (q, u).
    """
    gp = spec.graph_point()
    k = gp.critical
    faces = k.faces()
    sol_pieces, w_map = _variational_solution_pieces(spec, gp)
    wt = w_map.T
    strata: list[_AdjointStratum] = []
    for f, piece in sol_pieces:
        if piece.is_trivial():
            continue
        case = f"u in face {sorted(f.active_set)} of the critical cone"
        seen_k: set = set()
        for f1 in faces:
            for f2 in faces:
                if not f.cone.subcone_of(f2.cone):
                    continue
                if not f2.cone.subcone_of(f1.cone):
                    continue
                extra_eqs = [wt.matvec(g) for g in f1.cone.generators()]
                refined = PolyCone.from_ineqs(
                    spec.l + spec.n, list(piece.ineqs), list(piece.eqs) + extra_eqs
                )
                if refined.is_trivial():
                    continue
                kd = face_difference(f1.cone, f2.cone)
                if kd.key() in seen_k:
                    continue
                seen_k.add(kd.key())
                adj = _variational_adjoint_cone(spec, kd)
                sample = pick_nonzero(refined)
                strata.append(
                    _AdjointStratum(
                        label=f"{case}; pair F1={sorted(f1.active_set)}, F2={sorted(f2.active_set)}",
                        case_label=case,
                        directions=refined,
                        sample=sample,
                        piece=kd,
                        adjoint=adj,
                    )
                )
    return strata, [p for _, p in sol_pieces]


def _constraint_adjoint_strata(spec: ConstraintSystemSpec) -> tuple[list[_AdjointStratum], list[PolyCone]]:
    """Direction-stratified adjoint systems of the constraint formulation."""
    ker = _kernel_cone(spec.Jx, spec.m)
    w_map = _stack_map(spec.Jp, spec.Jx)  # w = Jp q + Jx u
    strata: list[_AdjointStratum] = []
    for s in direction_strata(spec.D, spec.g0):
        adj = ker.intersect(s.normal)
        for idx, qc in enumerate(s.reach):
            refined = _pullback(qc, w_map, spec.l + spec.n)
            if refined.is_trivial():
                continue
            sample = pick_nonzero(refined)
            strata.append(
                _AdjointStratum(
                    label=f"{s.label} / cell {idx}",
                    case_label=s.label,
                    directions=refined,
                    sample=sample,
                    piece=s.normal,
                    adjoint=adj,
                )
            )
    pieces = [
        _pullback(t, w_map, spec.l + spec.n) for t in union_tangent_cone(spec.D, spec.g0).pieces
    ]
    return strata, pieces


def _standard_adjoint_report(spec) -> list[dict]:
    """The unstratified (zero-direction) adjoint inclusion, for comparison."""
    report = []
    if spec.kind == "variational":
        gp = spec.graph_point()
        for p in limiting_normal_graph(gp).pieces:
            adj = _variational_adjoint_cone(spec, p.k)
            gens = [g for g in adj.generators()]
            report.append(
                {
                    "piece": cone_plain(p.k),
                    "adjoint_cone": cone_plain(adj),
                    "nontrivial_generators": [vec_plain(g) for g in gens],
                }
            )
    else:
        ker = _kernel_cone(spec.Jx, spec.m)
        for piece in directional_normal_cone(spec.D, spec.g0, QVector.zero(spec.m)).pieces:
            adj = ker.intersect(piece)
            report.append(
                {
                    "piece": cone_plain(piece),
                    "adjoint_cone": cone_plain(adj),
                    "nontrivial_generators": [vec_plain(g) for g in adj.generators()],
                }
            )
    return report


def check_aubin(spec, mode: str = "corollary", assume_subregular: bool = False) -> Certificate:
    """Aubin property of the solution map around the reference point.

    Phase A verifies that the linearized inclusion is solvable for every
    parameter direction (projection of the solution cone onto parameter
    space covers it; this is also necessary, so failure refutes).  Phase B
    requires, for every nonzero solution direction and every compatible
    coderivative piece, that the adjoint solution cone is trivial
    (mode "corollary") or contained in the kernel of Jp^T (mode "theorem",
    which additionally needs metric subregularity of the joint map -
    discharged through check_foscms_joint or asserted by the caller).
    """
    if mode not in ("corollary", "theorem"):
        raise ValueError("mode must be 'corollary' or 'theorem'")
    notes: list[str] = []
    trace: list = []
    if mode == "theorem":
        if assume_subregular:
            notes.append("joint metric subregularity asserted by caller")
        else:
            evidence = check_foscms_joint(spec)
            if not evidence.holds():
                raise ValueError(
                    "theorem mode needs metric subregularity of the joint map: "
                    "check_foscms_joint did not certify it and no assertion flag was given"
                )
            notes.append("joint metric subregularity certified by check_foscms_joint")

    if spec.kind == "variational":
        strata, sol_pieces = _variational_adjoint_strata(spec)
    else:
        strata, sol_pieces = _constraint_adjoint_strata(spec)

    projected = [fm_project(p, spec.l) for p in sol_pieces]
    covered, gap = covers_space(projected, spec.l)
    trace.append(
        {
            "phase": "A (solvability for every parameter direction)",
            "solution_pieces": [cone_plain(p) for p in sol_pieces],
            "projections": [cone_plain(p) for p in projected],
            "covered": covered,
        }
    )
    witnesses: list[Witness] = []
    if not covered:
        witnesses.append(Witness("uncovered parameter direction", None, q=gap))
        notes.append("solvability fails: this condition is necessary, so the Aubin property fails")
        return Certificate(
            NOT_CERTIFIED,
            tuple(witnesses),
            refuted=True,
            trace=tuple(trace),
            notes=tuple(notes),
        )

    cases: dict[str, list[dict]] = {}
    for st in strata:
        if mode == "corollary":
            ok = st.adjoint.is_trivial()
            offender = None if ok else pick_nonzero(st.adjoint)
        else:
            offender = next(
                (g for g in st.adjoint.generators() if not spec.Jp.T.matvec(g).is_zero()), None
            )
            ok = offender is None
        q, u = _split_qu(st.sample, spec.l)
        entry = {
            "adjoint_stratum": st.label,
            "sample_direction": {"q": vec_plain(q), "u": vec_plain(u)},
            "coderivative_piece": cone_plain(st.piece),
            "adjoint_cone": cone_plain(st.adjoint),
            "trivial": st.adjoint.is_trivial(),
            "outcome": "ok" if ok else "violated",
        }
        cases.setdefault(st.case_label, []).append(entry)
        if not ok:
            witnesses.append(Witness(st.label, offender, u=u, q=q))
    trace.append(
        {
            "phase": "B (direction-stratified adjoint inclusions)",
            "mode": mode,
            "cases": [{"case": c, "adjoint_inclusions": v} for c, v in cases.items()],
        }
    )
    trace.append({"phase": "standard adjoint inclusion (zero direction)", "pieces": _standard_adjoint_report(spec)})
    status = NOT_CERTIFIED if witnesses else HOLDS
    return Certificate(status, tuple(witnesses), trace=tuple(trace), notes=tuple(notes))


def spec_range(spec) -> int:
    return spec.m if spec.kind == "constraint" else spec.n


def check_foscms_joint(spec) -> Certificate:
    """Metric subregularity of the joint map in (p, x) via the first order
    condition: every adjoint solution with both transposed-Jacobian images
    vanishing must be trivial, over all nonzero joint direction strata."""
    dim = spec_range(spec)
    ker_jp_rows = [spec.Jp.col(j) for j in range(spec.Jp.ncols)]
    if spec.kind == "variational":
        strata, _ = _variational_adjoint_strata(spec)
    else:
        strata, _ = _constraint_adjoint_strata(spec)
    witnesses = []
    trace = []
    for st in strata:
        joint = PolyCone.from_ineqs(
            dim, list(st.adjoint.ineqs), list(st.adjoint.eqs) + ker_jp_rows
        )
        rec = {
            "adjoint_stratum": st.label,
            "joint_adjoint_cone": cone_plain(joint),
            "outcome": "ok" if joint.is_trivial() else "violated",
        }
        trace.append(rec)
        if not joint.is_trivial():
            q, u = _split_qu(st.sample, spec.l)
            witnesses.append(Witness(st.label, pick_nonzero(joint), u=u, q=q))
    status = NOT_CERTIFIED if witnesses else HOLDS
    return Certificate(status, tuple(witnesses), trace=tuple(trace))


def graphical_derivative_S(spec, q: QVector) -> list[Polyhedron]:
    """Slice of the linearized solution cone at a fixed parameter direction.

    Returns the set {u : (q, u) solves the linearized inclusion} as a list
    of polyhedra (possibly overlapping, canonically deduplicated).
    """
    if spec.kind == "variational":
        gp = spec.graph_point()
        pieces, _ = _variational_solution_pieces(spec, gp)
        cones = [p for _, p in pieces]
        n = spec.n
    else:
        w_map = _stack_map(spec.Jp, spec.Jx)
        cones = [
            _pullback(t, w_map, spec.l + spec.n)
            for t in union_tangent_cone(spec.D, spec.g0).pieces
        ]
        n = spec.n
    out: list[Polyhedron] = []
    for c in cones:
        a_rows, b_rhs, e_rows, e_rhs = [], [], [], []
        for a in c.ineqs:
            aq, au = _split_qu(a, spec.l)
            a_rows.append(au)
            b_rhs.append(-aq.dot(q))
        for e in c.eqs:
            eq_, eu = _split_qu(e, spec.l)
            e_rows.append(eu)
            e_rhs.append(-eq_.dot(q))
        try:
            poly = Polyhedron(n, a_rows, b_rhs, e_rows, e_rhs)
        except InfeasibleError:
            continue
        out.append(poly)
    dedup: list[Polyhedron] = []
    for p in out:
        if any(p.subset_of(qp) and p.key() != qp.key() for qp in out):
            continue
        if p.key() not in {d.key() for d in dedup}:
            dedup.append(p)
    dedup.sort(key=lambda p: p.key())
    return dedup


def check_directional_metric_regularity(spec, u: QVector, v: QVector) -> Certificate:
    """Directional metric regularity of the frozen-parameter system in the
    graph direction (u, v).  The criterion is exact, so a failure is a
    refutation and the certificate is flagged accordingly.  Directions off
    the graph tangent cone are vacuously regular.
    """
    if spec.kind == "constraint":
        w = spec.Jx.matvec(u) - v
        if not union_tangent_cone(spec.D, spec.g0).contains(w):
            return Certificate(
                HOLDS,
                notes=("direction is not tangent to the graph: metrically regular in it by definition",),
            )
        ker = _kernel_cone(spec.Jx, spec.m)
        pieces = directional_normal_cone(spec.D, spec.g0, w).pieces
        adjoints = [(f"normal piece {i}", ker.intersect(p)) for i, p in enumerate(pieces)]
    else:
        gp = spec.graph_point()
        wdir = v - spec.Jx.matvec(u)
        if not graph_tangent_member(gp, u, wdir):
            return Certificate(
                HOLDS,
                notes=("direction is not tangent to the graph: metrically regular in it by definition",),
            )
        gnc = directional_limiting_normal_graph(gp, u, wdir)
        adjoints = [
            (f"difference-cone piece {i}", _variational_adjoint_cone(spec, p.k))
            for i, p in enumerate(gnc.pieces)
        ]
    witnesses = []
    trace = []
    for label, adj in adjoints:
        ok = adj.is_trivial()
        trace.append({"piece": label, "adjoint_cone": cone_plain(adj), "outcome": "ok" if ok else "violated"})
        if not ok:
            witnesses.append(Witness(label, pick_nonzero(adj), u=u))
    if witnesses:
        return Certificate(
            NOT_CERTIFIED,
            tuple(witnesses),
            refuted=True,
            trace=tuple(trace),
            notes=("the directional criterion is exact: metric regularity in this direction fails",),
        )
    return Certificate(HOLDS, trace=tuple(trace))


def check_second_order_directional_subregularity(spec, u: QVector, gpp: QVector | None = None) -> Certificate:
    """Directional metric subregularity via second order data along u != 0.

    Requires the curvature vector gpp = G''(xbar; u); for constraint systems
    it is contracted from the stored Hessians when not supplied.  Holds when
    every adjoint solution cone for direction (u, 0) is pointed and the
    linear functional <., gpp> is strictly negative on each of its extreme
    rays.
    """
    if u.is_zero():
        raise ValueError("direction u must be nonzero")
    if gpp is None:
        if spec.kind == "constraint" and spec.hessians is not None:
            gpp = QVector([_form_value(h, u) for h in spec.hessians])
        else:
            raise ValueError("gpp is required when no Hessians are stored")
    if spec.kind == "constraint":
        w = spec.Jx.matvec(u)
        if not union_tangent_cone(spec.D, spec.g0).contains(w):
            return Certificate(HOLDS, notes=("direction is not tangent: subregular in it by definition",))
        ker = _kernel_cone(spec.Jx, spec.m)
        cones = [ker.intersect(p) for p in directional_normal_cone(spec.D, spec.g0, w).pieces]
    else:
        gp = spec.graph_point()
        wdir = -spec.Jx.matvec(u)
        if not graph_tangent_member(gp, u, wdir):
            return Certificate(HOLDS, notes=("direction is not tangent: subregular in it by definition",))
        cones = [
            _variational_adjoint_cone(spec, p.k)
            for p in directional_limiting_normal_graph(gp, u, wdir).pieces
        ]
    witnesses = []
    trace = []
    for i, c in enumerate(cones):
        label = f"adjoint piece {i}"
        if c.is_trivial():
            trace.append({"piece": label, "outcome": "ok (trivial)"})
            continue
        if c.lin:
            trace.append({"piece": label, "adjoint_cone": cone_plain(c), "outcome": "violated (lineality)"})
            witnesses.append(Witness(label, c.lin[0], u=u))
            continue
        bad = [r for r in c.rays if r.dot(gpp) >= 0]
        if bad:
            trace.append({"piece": label, "adjoint_cone": cone_plain(c), "outcome": "violated (nonnegative ray)"})
            witnesses.append(Witness(label, bad[0], u=u))
        else:
            trace.append({"piece": label, "adjoint_cone": cone_plain(c), "outcome": "ok (strictly negative on rays)"})
    status = NOT_CERTIFIED if witnesses else HOLDS
    return Certificate(status, tuple(witnesses), trace=tuple(trace))
