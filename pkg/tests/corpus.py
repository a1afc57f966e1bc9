"""Deterministic randomized instance generation shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

from polyvar.cones import PolyCone
from polyvar.linalg import QMatrix, QVector
from polyvar.sets import InfeasibleError, Polyhedron, UnionSet


def rng(seed: int) -> random.Random:
    return random.Random(seed)


def random_gamma(r: random.Random, dim: int, max_facets: int = 6) -> Polyhedron:
    """A nonempty polyhedron containing the origin, with small integer data."""
    nfac = r.randint(2, max_facets)
    rows, rhs = [], []
    for _ in range(nfac):
        row = [r.randint(-2, 2) for _ in range(dim)]
        if all(x == 0 for x in row):
            row[r.randrange(dim)] = 1
        rows.append(row)
        rhs.append(r.choice([0, 0, 1, 2]))  # bias to faces through the origin
    return Polyhedron(dim, rows, rhs)


def boundary_points(gamma: Polyhedron, limit: int = 12) -> list[QVector]:
    """Grid points of the polyhedron, boundary-first."""
    dim = gamma.dim
    pts = []
    for combo in product((-1, 0, 1, Fraction(1, 2), Fraction(-1, 2)), repeat=dim):
        y = QVector(combo)
        if gamma.contains(y):
            pts.append((len(gamma.active_ineqs(y)), y))
    pts.sort(key=lambda t: (-t[0], tuple(map(str, t[1].entries))))
    return [y for _, y in pts[:limit]]


def random_normal_at(r: random.Random, gamma: Polyhedron, y: QVector) -> QVector:
    gens = gamma.normal_cone(y).generators()
    v = QVector.zero(gamma.dim)
    for g in gens:
        v = v + g.scale(r.choice([0, 0, 1, 1, 2, Fraction(1, 2)]))
    return v


def random_graph_point(r: random.Random, gamma: Polyhedron):
    pts = boundary_points(gamma)
    y = r.choice(pts)
    return y, random_normal_at(r, gamma, y)


def random_member(r: random.Random, cone: PolyCone) -> QVector:
    v = QVector.zero(cone.dim)
    for g in cone.generators():
        v = v + g.scale(r.choice([0, 0, 1, 2, Fraction(1, 2)]))
    return v


def random_tangent_pair(r: random.Random, k: PolyCone):
    """A pair (v, v*) in the graph of the normal-cone map of k."""
    v = random_member(r, k)
    nk = PolyCone.from_ineqs(
        k.dim, list(k.polar().ineqs), list(k.polar().eqs) + ([v] if not v.is_zero() else [])
    )
    vstar = random_member(r, nk)
    return v, vstar


def random_union(r: random.Random, dim: int, max_pieces: int = 3) -> UnionSet:
    """A union of cones through the origin (so strata are rich at 0)."""
    pieces = []
    for _ in range(r.randint(1, max_pieces)):
        nfac = r.randint(1, 3)
        rows = []
        for _ in range(nfac):
            row = [r.randint(-1, 1) for _ in range(dim)]
            if all(x == 0 for x in row):
                row[r.randrange(dim)] = 1
            rows.append(row)
        eqs = []
        if r.random() < 0.4:
            eq = [r.randint(-1, 1) for _ in range(dim)]
            if any(x != 0 for x in eq):
                eqs.append(eq)
        try:
            pieces.append(Polyhedron(dim, rows, [0] * len(rows), eqs, [0] * len(eqs)))
        except InfeasibleError:
            continue
    if not pieces:
        pieces.append(Polyhedron(dim, [[1] + [0] * (dim - 1)], [0]))
    return UnionSet(pieces)


def random_matrix(r: random.Random, nrows: int, ncols: int, lo=-2, hi=2) -> QMatrix:
    return QMatrix([[r.randint(lo, hi) for _ in range(ncols)] for _ in range(nrows)])


def random_symmetric(r: random.Random, n: int) -> QMatrix:
    m = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            m[i][j] = m[j][i] = r.randint(-2, 2)
    return QMatrix(m)
