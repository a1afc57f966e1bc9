"""Cones attached to the graph of the normal-cone map of a convex polyhedron.

For a graph point (ybar, ybarstar) of the normal-cone map of a polyhedron,
every object here is governed by the critical cone K = T(ybar) ∩ [ybarstar]^⊥:

* the graph tangent cone is the graph of the normal-cone map of K,
* the regular normal cone to the graph is the single product K° × K,
* the limiting normal cone is the union of products (F1-F2)° × (F1-F2) over
  ordered pairs of closed faces F2 ⊆ F1 of K,
* the directional limiting normal cone in a tangent direction (v, v*) keeps
  exactly the pairs with v ∈ F2 ⊆ F1 ⊆ [v*]^⊥.

Pieces are deduplicated by the canonical form of the difference cone K alone
(its polar is determined by it); provenance face pairs are retained on each
piece for auditing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cones import Face, PolyCone, face_difference
from .linalg import QVector
from .sets import ConeUnion, Polyhedron, critical_cone


class GraphPoint:
    """A point (ybar, ybarstar) of the graph of the normal-cone map of gamma."""

    __slots__ = ("gamma", "ybar", "ybarstar", "critical")

    def __init__(self, gamma: Polyhedron, ybar: QVector, ybarstar: QVector):
        k = critical_cone(gamma, ybar, ybarstar)
        if k is None:
            raise ValueError("(ybar, ybarstar) is not in the graph of the normal-cone map")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "ybar", ybar)
        object.__setattr__(self, "ybarstar", ybarstar)
        object.__setattr__(self, "critical", k)

    def __setattr__(self, name, value):
        raise AttributeError("GraphPoint is immutable")

    def __repr__(self):
        return f"GraphPoint(ybar={self.ybar!r}, ybarstar={self.ybarstar!r})"


@dataclass(frozen=True)
class ProductPiece:
    """One product set K° × K with the face pair that produced it."""

    kpolar: PolyCone
    k: PolyCone
    f1: Face
    f2: Face

    def contains(self, xstar: QVector, ystar: QVector) -> bool:
        return self.kpolar.contains(xstar) and self.k.contains(ystar)

    def subset_of(self, other: "ProductPiece") -> bool:
        return self.kpolar.subcone_of(other.kpolar) and self.k.subcone_of(other.k)


@dataclass(frozen=True)
class GraphNormalCone:
    """A finite union of product pieces K° × K."""

    pieces: tuple[ProductPiece, ...]

    def contains(self, xstar: QVector, ystar: QVector) -> bool:
        return any(p.contains(xstar, ystar) for p in self.pieces)

    def cones(self) -> list[PolyCone]:
        return [p.k for p in self.pieces]

    def __len__(self):
        return len(self.pieces)

    def to_plain(self) -> list[dict]:
        """JSON-plain view: one record per piece with its provenance faces."""

        def cone_plain(c: PolyCone) -> dict:
            return {
                "rays": [[str(x) for x in r.entries] for r in c.rays],
                "lin": [[str(x) for x in l.entries] for l in c.lin],
                "ineqs": [[str(x) for x in a.entries] for a in c.ineqs],
                "eqs": [[str(x) for x in e.entries] for e in c.eqs],
            }

        return [
            {
                "k": cone_plain(p.k),
                "kpolar": cone_plain(p.kpolar),
                "f1_active_set": sorted(p.f1.active_set),
                "f2_active_set": sorted(p.f2.active_set),
            }
            for p in self.pieces
        ]


def _assemble(pairs: list[tuple[Face, Face]]) -> GraphNormalCone:
    by_k: dict = {}
    for f1, f2 in pairs:
        k = face_difference(f1.cone, f2.cone)
        if k.key() not in by_k:
            by_k[k.key()] = ProductPiece(k.polar(), k, f1, f2)
    pieces = sorted(by_k.values(), key=lambda p: p.k.key())
    return GraphNormalCone(tuple(pieces))


def graph_tangent_member(gp: GraphPoint, v: QVector, vstar: QVector) -> bool:
    """Is (v, v*) tangent to the graph at the reference point?

    Tangency means v lies in the critical cone and v* in its polar with
    v ⊥ v*.
    """
    k = gp.critical
    return k.contains(v) and k.polar().contains(vstar) and v.dot(vstar) == 0


def regular_normal_graph(gp: GraphPoint) -> GraphNormalCone:
    """Regular normal cone to the graph: the single product K° × K."""
    k = gp.critical
    faces = k.faces()
    top = max(faces, key=lambda f: f.cone.span_dim())
    bottom = min(faces, key=lambda f: f.cone.span_dim())
    # F_top - F_bottom = K + lineality(K) = K, so the provenance pair is valid.
    piece = ProductPiece(k.polar(), k, top, bottom)
    return GraphNormalCone((piece,))


def limiting_normal_graph(gp: GraphPoint) -> GraphNormalCone:
    """Limiting normal cone to the graph: products over all face pairs F2 ⊆ F1."""
    faces = gp.critical.faces()
    pairs = [
        (f1, f2)
        for f1 in faces
        for f2 in faces
        if f2.cone.subcone_of(f1.cone)
    ]
    return _assemble(pairs)


def directional_limiting_normal_graph(gp: GraphPoint, v: QVector, vstar: QVector) -> GraphNormalCone:
    """Directional limiting normal cone to the graph in direction (v, v*).

    Only defined on the graph tangent cone; face pairs F2 ⊆ F1 of the
    critical cone survive exactly when v ∈ F2 and F1 ⊥ v*.
    """
    if not graph_tangent_member(gp, v, vstar):
        raise ValueError("(v, vstar) is not tangent to the graph at the reference point")
    faces = gp.critical.faces()
    pairs = []
    for f1 in faces:
        if any(vstar.dot(g) != 0 for g in f1.cone.generators()):
            continue
        for f2 in faces:
            if not f2.cone.contains(v):
                continue
            if f2.cone.subcone_of(f1.cone):
                pairs.append((f1, f2))
    return _assemble(pairs)


def directional_coderivative_normal_map(
    gp: GraphPoint, v: QVector, vstar: QVector, wstar: QVector
) -> ConeUnion:
    """Directional limiting coderivative of the normal-cone map applied to wstar.

    Union of the polar cones K° over the directional pieces (K°, K) whose K
    contains -wstar; empty when no piece admits -wstar.
    """
    gnc = directional_limiting_normal_graph(gp, v, vstar)
    neg = -wstar
    hit = [p.kpolar for p in gnc.pieces if p.k.contains(neg)]
    return ConeUnion(gp.gamma.dim, hit)
