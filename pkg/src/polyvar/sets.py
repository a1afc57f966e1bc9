"""Convex polyhedra, finite unions of polyhedra, and their variational cones.

The central computation is the directional limiting normal cone to a finite
union of convex polyhedra.  The union is stratified by signatures: each piece
is either assigned one of its closed faces ("the point lies in the relative
interior of that face") or marked inactive ("the point lies outside the
piece").  On such a stratum the regular normal cone of the union is constant
(the intersection of the active pieces' normal cones), and a stratum
contributes to the directional cone at ``ybar`` in direction ``w`` exactly
when ``w`` lies in the closure of the feasible-direction cone of one of the
stratum's cells.  Cells are relatively open polyhedra: face assignments give
equalities plus strict inequalities, and "outside a piece" splits facet-wise
into strictly violated constraints.

Reachability of a cell from ``ybar`` is decided exactly: every cell equality
must hold at ``ybar``; strict constraints already violated at ``ybar`` kill
the cell; the remaining active strict constraints must admit a strictly
feasible direction, and then the closure of the feasible directions is the
polyhedral cone with those constraints closed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Sequence

from .cones import PolyCone, strictly_feasible
from .linalg import QVector, frac


class InfeasibleError(ValueError):
    """Raised when a polyhedron is constructed from an infeasible system."""


class Polyhedron:
    """Nonempty convex polyhedron {y : A y <= b, E y = e}.

    Feasibility is verified exactly at construction.  The representation is
    canonicalized (irredundant) via the homogenization cone, which is also
    kept for reuse by tangent cones and face enumeration.
    """

    __slots__ = ("dim", "A", "b", "E", "e", "_homog", "_faces")

    def __init__(self, dim: int, A: Iterable = (), b: Iterable = (), E: Iterable = (), e: Iterable = ()):
        A = [r if isinstance(r, QVector) else QVector(r) for r in A]
        E = [r if isinstance(r, QVector) else QVector(r) for r in E]
        b = [frac(x) for x in b]
        e = [frac(x) for x in e]
        if len(A) != len(b) or len(E) != len(e):
            raise ValueError("constraint rows and right-hand sides differ in length")
        for r in A + E:
            if r.dim != dim:
                raise ValueError("constraint row has wrong dimension")
        # Homogenize: {(y, t) : A y - b t <= 0, E y - e t = 0, -t <= 0}.
        h_ineqs = [QVector(list(r.entries) + [-bv]) for r, bv in zip(A, b)]
        h_ineqs.append(QVector([0] * dim + [-1]))
        h_eqs = [QVector(list(r.entries) + [-ev]) for r, ev in zip(E, e)]
        homog = PolyCone.from_ineqs(dim + 1, h_ineqs, h_eqs)
        if not any(r[dim] > 0 for r in homog.rays):
            raise InfeasibleError("polyhedron is empty")
        # Read the canonical H-rep back off the homogenization cone.
        cA, cb, cE, ce = [], [], [], []
        for row in homog.ineqs:
            a, beta = QVector(row.entries[:dim]), -row[dim]
            if a.is_zero():
                continue  # the -t <= 0 row
            cA.append(a)
            cb.append(beta)
        for row in homog.eqs:
            g, eps = QVector(row.entries[:dim]), -row[dim]
            if g.is_zero():
                continue
            cE.append(g)
            ce.append(eps)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "A", tuple(cA))
        object.__setattr__(self, "b", tuple(cb))
        object.__setattr__(self, "E", tuple(cE))
        object.__setattr__(self, "e", tuple(ce))
        object.__setattr__(self, "_homog", homog)
        object.__setattr__(self, "_faces", None)

    def __setattr__(self, name, value):
        if name == "_faces":
            object.__setattr__(self, name, value)
            return
        raise AttributeError("Polyhedron is immutable")

    def key(self):
        return (self.dim, tuple(v.entries for v in self.A), self.b, tuple(v.entries for v in self.E), self.e)

    def __eq__(self, other):
        return isinstance(other, Polyhedron) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        ineq = ", ".join(f"{a!r}.y<={bv}" for a, bv in zip(self.A, self.b))
        eq = ", ".join(f"{g!r}.y={ev}" for g, ev in zip(self.E, self.e))
        return f"Polyhedron(dim={self.dim}, [{ineq}] [{eq}])"

    # -- basic queries -------------------------------------------------------

    def contains(self, y: QVector) -> bool:
        if y.dim != self.dim:
            raise ValueError("point has wrong dimension")
        return all(a.dot(y) <= bv for a, bv in zip(self.A, self.b)) and all(
            g.dot(y) == ev for g, ev in zip(self.E, self.e)
        )

    def active_ineqs(self, y: QVector) -> list[int]:
        return [i for i, (a, bv) in enumerate(zip(self.A, self.b)) if a.dot(y) == bv]

    def vertices_and_recession(self) -> tuple[list[QVector], PolyCone]:
        """Generator view: some vertices/points plus the recession cone."""
        verts = []
        rec_rays, rec_lin = [], []
        for r in self._homog.rays:
            t = r[self.dim]
            if t > 0:
                verts.append(QVector(x / t for x in r.entries[:self.dim]))
            else:
                rec_rays.append(QVector(r.entries[:self.dim]))
        for l in self._homog.lin:
            rec_lin.append(QVector(l.entries[:self.dim]))
        rec = PolyCone.from_generators(self.dim, rec_rays, rec_lin)
        return verts, rec

    def subset_of(self, other: "Polyhedron") -> bool:
        verts, rec = self.vertices_and_recession()
        if not all(other.contains(v) for v in verts):
            return False
        rec_other = other.recession_cone()
        return all(rec_other.contains(g) for g in rec.generators())

    def recession_cone(self) -> PolyCone:
        return PolyCone.from_ineqs(self.dim, list(self.A), list(self.E))

    # -- variational cones ----------------------------------------------------

    def tangent_cone(self, y: QVector) -> PolyCone:
        if not self.contains(y):
            raise ValueError("tangent cone requested at a point outside the polyhedron")
        act = [self.A[i] for i in self.active_ineqs(y)]
        return PolyCone.from_ineqs(self.dim, act, list(self.E))

    def normal_cone(self, y: QVector) -> PolyCone:
        return self.tangent_cone(y).polar()

    # -- faces -----------------------------------------------------------------

    def faces(self) -> tuple["PolyFace", ...]:
        """All nonempty closed faces, by BFS over active sets."""
        if self._faces is not None:
            return self._faces
        n = len(self.A)
        found: dict[frozenset, PolyFace] = {}

        def build(active: frozenset) -> "PolyFace | None":
            try:
                sub = Polyhedron(
                    self.dim,
                    list(self.A),
                    list(self.b),
                    list(self.E) + [self.A[i] for i in sorted(active)],
                    list(self.e) + [self.b[i] for i in sorted(active)],
                )
            except InfeasibleError:
                return None
            verts, rec = sub.vertices_and_recession()
            implied = frozenset(
                i
                for i in range(n)
                if all(self.A[i].dot(v) == self.b[i] for v in verts)
                and all(self.A[i].dot(g) == 0 for g in rec.generators())
            )
            normal = PolyCone.from_generators(
                self.dim, [self.A[i] for i in sorted(implied)], list(self.E)
            )
            return PolyFace(implied, sub, normal, self)

        root = build(frozenset())
        assert root is not None
        found[root.active_set] = root
        queue = [root]
        while queue:
            face = queue.pop(0)
            for j in range(n):
                if j in face.active_set:
                    continue
                child = build(face.active_set | {j})
                if child is not None and child.active_set not in found:
                    found[child.active_set] = child
                    queue.append(child)
        ordered = tuple(
            sorted(found.values(), key=lambda f: (len(f.active_set), tuple(sorted(f.active_set))))
        )
        self._faces = ordered
        return ordered


@dataclass(frozen=True)
class PolyFace:
    """A nonempty closed face of a polyhedron.

    ``normal`` is the (constant) normal cone of the polyhedron at relative
    interior points of the face.
    """

    active_set: frozenset
    poly: Polyhedron
    normal: PolyCone
    parent: Polyhedron

    def relint_constraints(self) -> tuple[list[tuple[QVector, Fraction]], list[tuple[QVector, Fraction]]]:
        """(equalities, strict `<` constraints) cutting out relint(face)."""
        p = self.parent
        eqs = [(g, ev) for g, ev in zip(p.E, p.e)]
        stricts = []
        for i, (a, bv) in enumerate(zip(p.A, p.b)):
            if i in self.active_set:
                eqs.append((a, bv))
            else:
                stricts.append((a, bv))
        return eqs, stricts


def tangent_cone(p: Polyhedron, y: QVector) -> PolyCone:
    return p.tangent_cone(y)


def normal_cone(p: Polyhedron, y: QVector) -> PolyCone:
    return p.normal_cone(y)


def critical_cone(p: Polyhedron, y: QVector, ystar: QVector) -> PolyCone | None:
    """Tangent cone at y intersected with [ystar]^⊥, or None off the graph.

    Returns None when y is outside the polyhedron or ystar is not a normal
    vector at y; absence is a value, not an error.
    """
    if y.dim != p.dim or ystar.dim != p.dim:
        raise ValueError("dimension mismatch")
    if not p.contains(y):
        return None
    tc = p.tangent_cone(y)
    if not tc.polar().contains(ystar):
        return None
    eqs = [] if ystar.is_zero() else [ystar]
    return PolyCone.from_ineqs(p.dim, list(tc.ineqs), list(tc.eqs) + eqs)


def nearby_critical_cone(
    p: Polyhedron, ybar: QVector, ybarstar: QVector, y: QVector, ystar: QVector
) -> PolyCone | None:
    """Critical cone at a nearby graph point from reference-point data alone:
    (K ∩ [ystar - ybarstar]^⊥) + [y - ybar], with K the reference critical
    cone.  None when (y, ystar) is not a graph point of the normal-cone map.
    """
    kbar = critical_cone(p, ybar, ybarstar)
    if kbar is None:
        raise ValueError("reference pair is not in the graph of the normal-cone map")
    if critical_cone(p, y, ystar) is None:
        return None
    dstar = ystar - ybarstar
    eqs = [] if dstar.is_zero() else [dstar]
    restricted = PolyCone.from_ineqs(p.dim, list(kbar.ineqs), list(kbar.eqs) + eqs)
    shift = y - ybar
    lin = [] if shift.is_zero() else [shift]
    return PolyCone.from_generators(
        p.dim, list(restricted.rays), list(restricted.lin) + lin
    )


class UnionSet:
    """Finite union of convex polyhedra of equal dimension."""

    __slots__ = ("dim", "pieces")

    def __init__(self, pieces: Sequence[Polyhedron]):
        pieces = tuple(pieces)
        if not pieces:
            raise ValueError("a union needs at least one piece")
        dim = pieces[0].dim
        if any(p.dim != dim for p in pieces):
            raise ValueError("pieces have unequal dimensions")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "pieces", pieces)

    def __setattr__(self, name, value):
        raise AttributeError("UnionSet is immutable")

    def key(self):
        return tuple(p.key() for p in self.pieces)

    def __eq__(self, other):
        return isinstance(other, UnionSet) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"UnionSet({len(self.pieces)} pieces, dim={self.dim})"

    def contains(self, y: QVector) -> bool:
        return any(p.contains(y) for p in self.pieces)

    def pieces_containing(self, y: QVector) -> list[int]:
        return [i for i, p in enumerate(self.pieces) if p.contains(y)]


class ConeUnion:
    """Finite union of polyhedral cones in canonical irredundant form.

    Pieces subsumed by another piece are dropped, duplicates merged, and the
    list is sorted by canonical key, so equality of values is structural.
    The empty union (empty set) is allowed.
    """

    __slots__ = ("dim", "pieces")

    def __init__(self, dim: int, pieces: Iterable[PolyCone]):
        uniq = list(dict.fromkeys(pieces))
        keep = []
        for i, c in enumerate(uniq):
            if any(j != i and c.subcone_of(d) and c != d for j, d in enumerate(uniq)):
                continue
            keep.append(c)
        keep = list(dict.fromkeys(keep))
        keep.sort(key=lambda c: c.key())
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "pieces", tuple(keep))

    def __setattr__(self, name, value):
        raise AttributeError("ConeUnion is immutable")

    def is_empty(self) -> bool:
        return not self.pieces

    def contains(self, v: QVector) -> bool:
        return any(c.contains(v) for c in self.pieces)

    def subset_of(self, other: "ConeUnion") -> bool:
        return all(any(c.subcone_of(d) for d in other.pieces) for c in self.pieces)

    def __eq__(self, other):
        return (
            isinstance(other, ConeUnion)
            and self.dim == other.dim
            and self.pieces == other.pieces
        )

    def __hash__(self):
        return hash((self.dim, self.pieces))

    def __repr__(self):
        return f"ConeUnion({list(self.pieces)!r})"


def union_tangent_cone(d: UnionSet, y: QVector) -> ConeUnion:
    """Union of the tangent cones of the pieces containing y."""
    idx = d.pieces_containing(y)
    if not idx:
        raise ValueError("point lies in no piece of the union")
    return ConeUnion(d.dim, [d.pieces[i].tangent_cone(y) for i in idx])


# -- direction strata ---------------------------------------------------------

_OUT = "out"


@dataclass(frozen=True)
class DirectionStratum:
    """One signature of a union near a reference point.

    ``assignment`` maps piece index to a PolyFace (active, point in the
    relative interior of that face) or to the marker "out".  ``normal`` is
    the constant regular normal cone of the union on the stratum, and
    ``reach`` the list of direction cones (one per nonempty cell) whose
    union is the closure of directions entering the stratum from the
    reference point.
    """

    label: str
    assignment: tuple
    normal: PolyCone
    reach: tuple[PolyCone, ...]

    def reachable(self, w: QVector) -> bool:
        return any(q.contains(w) for q in self.reach)


def direction_strata(d: UnionSet, ybar: QVector) -> tuple[DirectionStratum, ...]:
    """All strata of the union with their reach cones from ybar.

    Only strata reachable from ybar in at least one direction are returned.
    Results are memoized: the certifiers evaluate the same stratification
    several times per spec.
    """
    if not d.contains(ybar):
        raise ValueError("reference point lies in no piece of the union")
    return _direction_strata_cached(d, ybar)


@lru_cache(maxsize=128)
def _direction_strata_cached(d: UnionSet, ybar: QVector) -> tuple[DirectionStratum, ...]:
    per_piece_options = []
    for p in d.pieces:
        per_piece_options.append([(True, f) for f in p.faces()] + [(False, None)])

    # cells with identical equalities and active strict rows share one reach
    # cone; the union of polyhedra reuses many such cells across signatures
    reach_memo: dict = {}

    def memo_reach(dim, ybar_, eqs, stricts):
        for g, ev in eqs:
            if g.dot(ybar_) != ev:
                return None
        active = []
        for c, gv in stricts:
            val = c.dot(ybar_)
            if val > gv:
                return None
            if val == gv:
                active.append(c)
        key = (
            frozenset((g.entries, ev) for g, ev in eqs),
            frozenset(c.entries for c in active),
        )
        if key not in reach_memo:
            eq_rows = [g for g, _ in eqs]
            if not strictly_feasible(dim, eq_rows, active):
                reach_memo[key] = None
            else:
                reach_memo[key] = PolyCone.from_ineqs(dim, active, eq_rows)
        return reach_memo[key]

    strata: list[DirectionStratum] = []
    for assignment in product(*per_piece_options):
        if not any(active for active, _ in assignment):
            continue
        base_eqs: list[tuple[QVector, Fraction]] = []
        base_stricts: list[tuple[QVector, Fraction]] = []
        normal: PolyCone | None = None
        for (active, face) in assignment:
            if not active:
                continue
            eqs, stricts = face.relint_constraints()
            base_eqs.extend(eqs)
            base_stricts.extend(stricts)
            normal = face.normal if normal is None else normal.intersect(face.normal)
        # "outside piece j" splits into one strictly violated constraint.
        out_options = []
        for (active, _), p in zip(assignment, d.pieces):
            if active:
                continue
            opts: list[tuple[QVector, Fraction]] = []
            for a, bv in zip(p.A, p.b):
                opts.append((-a, -bv))  # a.y > bv
            for g, ev in zip(p.E, p.e):
                opts.append((g, ev))  # g.y < ev
                opts.append((-g, -ev))  # g.y > ev
            out_options.append(opts)

        reach: list[PolyCone] = []
        for combo in product(*out_options) if out_options else [()]:
            stricts = base_stricts + list(combo)
            q = memo_reach(d.dim, ybar, base_eqs, stricts)
            if q is not None:
                reach.append(q)
        if not reach:
            continue
        label_parts = []
        for i, (active, face) in enumerate(assignment):
            if active:
                label_parts.append(f"P{i}@F{sorted(face.active_set)}")
            else:
                label_parts.append(f"P{i}:out")
        strata.append(
            DirectionStratum(
                label=" & ".join(label_parts),
                assignment=assignment,
                normal=normal,
                reach=tuple(dict.fromkeys(reach)),
            )
        )
    return tuple(strata)


def directional_normal_cone(d: UnionSet, ybar: QVector, w: QVector) -> ConeUnion:
    """Directional limiting normal cone to the union at ybar in direction w.

    Union over all strata reachable from ybar in direction w of their
    (constant) regular normal cones.  Direction w = 0 yields the full
    limiting normal cone.  An empty union means no sequence approaches ybar
    along w inside the set.
    """
    if w.dim != d.dim:
        raise ValueError("direction has wrong dimension")
    strata = direction_strata(d, ybar)
    hit = [s.normal for s in strata if s.reachable(w)]
    return ConeUnion(d.dim, hit)


def union_from_cone_pieces(dim: int, cones: Iterable[PolyCone]) -> ConeUnion:
    return ConeUnion(dim, cones)
