"""Polyhedral convex cones with synchronized H- and V-representations.

A ``PolyCone`` simultaneously stores

* an irredundant H-representation: rows ``a`` with ``<a, z> <= 0`` (``ineqs``)
  and rows ``e`` with ``<e, z> = 0`` (``eqs``), and
* an irredundant V-representation: extreme-ray representatives of the pointed
  part (``rays``) and a basis of the lineality space (``lin``).

Conversion between the two runs the double description method: equalities are
absorbed into the start basis, inequalities are processed one at a time while
the (lineality basis, ray list) pair is kept in sync, and a final extremality
filter guarantees irredundancy.  Both representations are canonicalized so
that cone equality is plain structural equality:

* ``lin`` is the RREF basis of the lineality space (unique),
* each ray is orthogonally projected onto the complement of the lineality
  space and scaled to a primitive integer vector (unique representative of
  its ray class), and the ray list is sorted,
* ``ineqs``/``eqs`` are obtained from the V-representation of the polar cone
  by the same pipeline, hence equally canonical.

Everything is exact; there is no tolerance anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .linalg import (
    QMatrix,
    QVector,
    kernel_of_rows,
    rank_of_rows,
    row_space_basis,
    solve,
)


def _project_off(v: QVector, basis: Sequence[QVector]) -> QVector:
    """Component of v orthogonal to span(basis)."""
    if not basis:
        return v
    b = QMatrix(basis)  # rows are the basis vectors
    bt = b.T
    gram = b.matmul(bt)  # basis is independent, so gram is invertible
    coeff = solve(gram, b.matvec(v))
    assert coeff is not None
    proj = QVector.zero(v.dim)
    for c, bv in zip(coeff, basis):
        proj = proj + bv.scale(c)
    return v - proj


def _canonical_rays(rays: Iterable[QVector], lin: Sequence[QVector]) -> tuple[QVector, ...]:
    out = set()
    for r in rays:
        rp = _project_off(r, lin).primitive()
        if not rp.is_zero():
            out.add(rp)
    return tuple(sorted(out, key=lambda v: v.entries))


def _dd(dim: int, ineqs: Sequence[QVector], eqs: Sequence[QVector]) -> tuple[list[QVector], list[QVector]]:
    """Generators (lineality basis, extreme rays) of {z : ineqs.z <= 0, eqs.z = 0}.

    Incremental double description.  The invariant after each step is that
    span(B) + cone(R) equals the cone of the constraints processed so far.
    """
    basis = kernel_of_rows([e for e in eqs if not e.is_zero()], dim)
    rays: list[QVector] = []
    processed: list[QVector] = [e for e in eqs if not e.is_zero()]

    def adjacent(r1: QVector, r2: QVector, lin_dim: int) -> bool:
        active = list(processed_eq_part)
        for a in processed_ineq_part:
            if a.dot(r1) == 0 and a.dot(r2) == 0:
                active.append(a)
        sol_dim = dim - rank_of_rows(active)
        return sol_dim == lin_dim + 2

    processed_eq_part = list(processed)
    processed_ineq_part: list[QVector] = []

    for a in ineqs:
        if a.is_zero():
            continue
        prods_b = [a.dot(b) for b in basis]
        pivot = next((i for i, p in enumerate(prods_b) if p != 0), None)
        if pivot is not None:
            b0 = basis[pivot]
            p0 = prods_b[pivot]
            if p0 > 0:
                b0, p0 = -b0, -p0
            new_basis = []
            for i, b in enumerate(basis):
                if i == pivot:
                    continue
                new_basis.append(b - b0.scale(prods_b[i] / p0))
            rays = [r - b0.scale(a.dot(r) / p0) for r in rays]
            rays.append(b0)
            basis = new_basis
        else:
            neg = [r for r in rays if a.dot(r) < 0]
            zero = [r for r in rays if a.dot(r) == 0]
            pos = [r for r in rays if a.dot(r) > 0]
            if pos:
                new_rays = neg + zero
                for rp in pos:
                    for rn in neg:
                        if len(rays) > 2 and not adjacent(rp, rn, len(basis)):
                            continue
                        comb = rn.scale(a.dot(rp)) - rp.scale(a.dot(rn))
                        if not comb.is_zero():
                            new_rays.append(comb.primitive())
                rays = new_rays
        processed_ineq_part.append(a)

    # Extremality filter: r is an extreme ray iff its active constraints cut
    # the space down to span(lin) + span(r).
    lin_rank = rank_of_rows(basis)
    result = []
    seen = set()
    for r in rays:
        rp = _project_off(r, basis).primitive()
        if rp.is_zero() or rp in seen:
            continue
        active = list(processed_eq_part)
        ok = True
        for a in processed_ineq_part:
            d = a.dot(r)
            if d == 0:
                active.append(a)
            elif d > 0:
                ok = False  # defensive; cannot happen for a DD survivor
                break
        if not ok:
            continue
        if dim - rank_of_rows(active) == lin_rank + 1:
            seen.add(rp)
            result.append(r)
    return basis, result


class PolyCone:
    """Polyhedral convex cone; construct via from_ineqs / from_generators."""

    __slots__ = ("dim", "ineqs", "eqs", "rays", "lin", "_faces")

    def __init__(self, dim, ineqs, eqs, rays, lin, _internal=False):
        if not _internal:
            raise TypeError("use PolyCone.from_ineqs or PolyCone.from_generators")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "ineqs", ineqs)
        object.__setattr__(self, "eqs", eqs)
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "lin", lin)
        object.__setattr__(self, "_faces", None)

    def __setattr__(self, name, value):
        if name == "_faces":
            object.__setattr__(self, name, value)
            return
        raise AttributeError("PolyCone is immutable")

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_ineqs(dim: int, ineqs: Iterable = (), eqs: Iterable = ()) -> "PolyCone":
        iq = [v if isinstance(v, QVector) else QVector(v) for v in ineqs]
        eq = [v if isinstance(v, QVector) else QVector(v) for v in eqs]
        for v in iq + eq:
            if v.dim != dim:
                raise ValueError("constraint row has wrong dimension")
        lin_b, rays = _dd(dim, iq, eq)
        lin_c = tuple(row_space_basis(lin_b, dim))
        rays_c = _canonical_rays(rays, lin_c)
        # Irredundant H-rep = generators of the polar, computed the same way.
        plin, prays = _dd(dim, list(rays_c), list(lin_c))
        peqs = tuple(row_space_basis(plin, dim))
        pineqs = _canonical_rays(prays, peqs)
        return PolyCone(dim, pineqs, peqs, rays_c, lin_c, _internal=True)

    @staticmethod
    def from_generators(dim: int, rays: Iterable = (), lin: Iterable = ()) -> "PolyCone":
        ry = [v if isinstance(v, QVector) else QVector(v) for v in rays]
        ln = [v if isinstance(v, QVector) else QVector(v) for v in lin]
        for v in ry + ln:
            if v.dim != dim:
                raise ValueError("generator has wrong dimension")
        # H-rep of the polar is {a : <a,r> <= 0, <a,l> = 0}; its generators
        # are the facet normals / equation rows of the original cone.
        plin, prays = _dd(dim, ry, ln)
        peqs = tuple(row_space_basis(plin, dim))
        pineqs = _canonical_rays(prays, peqs)
        lin_b, rays_b = _dd(dim, list(pineqs), list(peqs))
        lin_c = tuple(row_space_basis(lin_b, dim))
        rays_c = _canonical_rays(rays_b, lin_c)
        return PolyCone(dim, pineqs, peqs, rays_c, lin_c, _internal=True)

    @staticmethod
    def full_space(dim: int) -> "PolyCone":
        return PolyCone.from_ineqs(dim)

    @staticmethod
    def origin(dim: int) -> "PolyCone":
        return PolyCone.from_generators(dim)

    # -- canonical identity ------------------------------------------------

    def key(self):
        return (
            self.dim,
            tuple(v.entries for v in self.lin),
            tuple(v.entries for v in self.rays),
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyCone) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"PolyCone(dim={self.dim}, rays={list(self.rays)}, lin={list(self.lin)})"

    # -- queries -----------------------------------------------------------

    def contains(self, z: QVector) -> bool:
        if z.dim != self.dim:
            raise ValueError("point has wrong dimension")
        return all(a.dot(z) <= 0 for a in self.ineqs) and all(e.dot(z) == 0 for e in self.eqs)

    def is_trivial(self) -> bool:
        return not self.rays and not self.lin

    def generators(self) -> list[QVector]:
        """Rays plus +/- lineality basis: a conic generating set."""
        gens = list(self.rays)
        for l in self.lin:
            gens.append(l)
            gens.append(-l)
        return gens

    def subcone_of(self, other: "PolyCone") -> bool:
        return all(other.contains(g) for g in self.generators()) if not self.is_trivial() else True

    def rel_interior_point(self) -> QVector:
        """A point in the relative interior (0 for the trivial cone)."""
        p = QVector.zero(self.dim)
        for r in self.rays:
            p = p + r
        return p

    def span_dim(self) -> int:
        return rank_of_rows(list(self.rays) + list(self.lin))

    def lineality_dim(self) -> int:
        return len(self.lin)

    def is_subspace(self) -> bool:
        return not self.rays

    # -- algebra -----------------------------------------------------------

    def polar(self) -> "PolyCone":
        """Negative polar cone {z* : <z*, z> <= 0 on self}.

        Pure representation swap: generators become constraints and vice
        versa; both sides are already canonical so no recomputation is
        needed.
        """
        return PolyCone(self.dim, self.rays, self.lin, self.ineqs, self.eqs, _internal=True)

    def intersect(self, other: "PolyCone") -> "PolyCone":
        self._check_dim(other)
        return PolyCone.from_ineqs(
            self.dim, list(self.ineqs) + list(other.ineqs), list(self.eqs) + list(other.eqs)
        )

    def minkowski_sum(self, other: "PolyCone") -> "PolyCone":
        self._check_dim(other)
        return PolyCone.from_generators(
            self.dim, list(self.rays) + list(other.rays), list(self.lin) + list(other.lin)
        )

    def negate(self) -> "PolyCone":
        return PolyCone.from_generators(self.dim, [-r for r in self.rays], list(self.lin))

    def _check_dim(self, other: "PolyCone") -> None:
        if self.dim != other.dim:
            raise ValueError("cone dimension mismatch")

    # -- faces ---------------------------------------------------------------

    def faces(self) -> tuple["Face", ...]:
        """All closed faces, from the cone itself down to the lineality space.

        Breadth-first search over active sets of the irredundant inequality
        rows, deduplicated by the implied active set (for an irredundant
        H-representation two faces coincide iff their implied active sets
        do).  Each face carries a polar witness z* with F = C ∩ [z*]^⊥,
        namely the sum of the active inequality normals.
        """
        if self._faces is not None:
            return self._faces
        n = len(self.ineqs)
        found: dict[frozenset, Face] = {}

        def build(active: frozenset) -> Face:
            sub = PolyCone.from_ineqs(
                self.dim,
                list(self.ineqs),
                list(self.eqs) + [self.ineqs[i] for i in sorted(active)],
            )
            implied = frozenset(
                i
                for i in range(n)
                if all(self.ineqs[i].dot(g) == 0 for g in sub.generators())
            )
            wit = QVector.zero(self.dim)
            for i in sorted(implied):
                wit = wit + self.ineqs[i]
            return Face(implied, sub, wit)

        root = build(frozenset())
        queue = [root]
        found[root.active_set] = root
        while queue:
            face = queue.pop(0)
            for j in range(n):
                if j in face.active_set:
                    continue
                child = build(face.active_set | {j})
                if child.active_set not in found:
                    found[child.active_set] = child
                    queue.append(child)
        ordered = tuple(
            sorted(found.values(), key=lambda f: (len(f.active_set), tuple(sorted(f.active_set))))
        )
        self._faces = ordered
        return ordered


@dataclass(frozen=True)
class Face:
    """A closed face of a PolyCone.

    ``active_set`` is the implied active set of inequality rows (canonical
    face id), ``cone`` the face itself, ``witness`` a polar vector z* with
    face = cone ∩ [z*]^⊥.
    """

    active_set: frozenset
    cone: PolyCone
    witness: QVector

    def __repr__(self) -> str:
        return f"Face(active={sorted(self.active_set)}, {self.cone!r})"


def face_difference(f1: PolyCone, f2: PolyCone) -> PolyCone:
    """The cone F1 - F2 = F1 + (-F2); requires F2 ⊆ F1."""
    if not f2.subcone_of(f1):
        raise ValueError("face_difference requires F2 to be contained in F1")
    return PolyCone.from_generators(
        f1.dim,
        list(f1.rays) + [-r for r in f2.rays],
        list(f1.lin) + list(f2.lin),
    )


# Convenience wrappers mirroring the functional surface.

def cone_from_ineqs(dim: int, ineqs: Iterable = (), eqs: Iterable = ()) -> PolyCone:
    return PolyCone.from_ineqs(dim, ineqs, eqs)


def cone_from_generators(dim: int, rays: Iterable = (), lin: Iterable = ()) -> PolyCone:
    return PolyCone.from_generators(dim, rays, lin)


def polar(c: PolyCone) -> PolyCone:
    return c.polar()


def intersect(c1: PolyCone, c2: PolyCone) -> PolyCone:
    return c1.intersect(c2)


def minkowski_sum(c1: PolyCone, c2: PolyCone) -> PolyCone:
    return c1.minkowski_sum(c2)


def contains(c: PolyCone, z: QVector) -> bool:
    return c.contains(z)


def is_trivial(c: PolyCone) -> bool:
    return c.is_trivial()


def subcone_of(c1: PolyCone, c2: PolyCone) -> bool:
    return c1.subcone_of(c2)


def rel_interior_point(c: PolyCone) -> QVector:
    return c.rel_interior_point()


def pick_nonzero(c: PolyCone) -> QVector | None:
    """Deterministic nonzero element of the cone, or None if trivial."""
    if c.rays:
        p = QVector.zero(c.dim)
        for r in c.rays:
            p = p + r
        return p  # relative-interior point of the pointed part; never zero
    if c.lin:
        return c.lin[0]
    return None


def strictly_feasible(dim: int, eq_rows: Sequence[QVector], strict_rows: Sequence[QVector]) -> bool:
    """Is there u with eq_rows.u = 0 and <c, u> < 0 for every strict row?

    Homogenize with a slack s: feasibility of the strict system is equivalent
    to the cone {(u, s) : eq.u = 0, <c,u> + s <= 0, -s <= 0} containing a
    generator with s > 0.
    """
    stricts = [c for c in strict_rows if not c.is_zero()]
    if any(c.is_zero() for c in strict_rows):
        # <0, u> < 0 is unsatisfiable
        return False
    if not stricts:
        return True  # u = 0 works
    ineqs = [QVector(list(c.entries) + [1]) for c in stricts]
    ineqs.append(QVector([0] * dim + [-1]))
    eqs = [QVector(list(e.entries) + [0]) for e in eq_rows]
    lin_b, rays = _dd(dim + 1, ineqs, eqs)
    return any(r[dim] > 0 for r in rays)
