from fractions import Fraction as F

import pytest

from corpus import boundary_points, random_gamma, random_graph_point, random_tangent_pair, random_union, rng
from polyvar.cones import PolyCone
from polyvar.linalg import QVector
from polyvar.oracle import sample_union_normals
from polyvar.sets import (
    ConeUnion,
    InfeasibleError,
    Polyhedron,
    UnionSet,
    critical_cone,
    directional_normal_cone,
    nearby_critical_cone,
    union_tangent_cone,
)


def r2minus():
    return Polyhedron(2, A=[[1, 0], [0, 1]], b=[0, 0])


def r2plus():
    return Polyhedron(2, A=[[-1, 0], [0, -1]], b=[0, 0])


def wedge_poly():
    return Polyhedron(2, A=[[1, -2], [1, 2]], b=[0, 0])


def ex3_union():
    p1 = Polyhedron(4, A=[[-1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], b=[0, 0, 0], E=[[0, 1, 0, 0]], e=[0])
    p2 = Polyhedron(4, A=[[0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], b=[0, 0, 0], E=[[1, 0, 0, 0]], e=[0])
    return UnionSet([p1, p2])


def test_empty_polyhedron_rejected():
    with pytest.raises(InfeasibleError):
        Polyhedron(2, A=[[1, 0], [-1, 0]], b=[-1, -1])


def test_tangent_cone_examples():
    p = r2minus()
    assert p.tangent_cone(QVector([0, 0])) == PolyCone.from_ineqs(2, [[1, 0], [0, 1]])
    assert p.tangent_cone(QVector([-1, 0])) == PolyCone.from_ineqs(2, [[0, 1]])
    g = wedge_poly()
    assert g.tangent_cone(QVector([0, 0])) == PolyCone.from_ineqs(2, [[1, -2], [1, 2]])
    with pytest.raises(ValueError):
        p.tangent_cone(QVector([1, 1]))


def test_normal_cone_examples():
    p = r2minus()
    assert p.normal_cone(QVector([0, 0])) == PolyCone.from_ineqs(2, [[-1, 0], [0, -1]])
    assert p.normal_cone(QVector([-1, 0])) == PolyCone.from_generators(2, [[0, 1]])
    g = wedge_poly()
    assert g.normal_cone(QVector([0, 0])) == PolyCone.from_generators(2, [[1, -2], [1, 2]])


def test_polarity_of_tangent_and_normal_on_corpus():
    r = rng(21)
    for i in range(10):
        gamma = random_gamma(r, 2 + i % 2)
        for y in boundary_points(gamma, limit=4):
            assert gamma.tangent_cone(y).polar() == gamma.normal_cone(y)


def test_critical_cone_examples():
    g = wedge_poly()
    k = critical_cone(g, QVector([0, 0]), QVector([0, 0]))
    assert k == PolyCone.from_ineqs(2, [[1, -2], [1, 2]])
    p = r2plus()
    k = critical_cone(p, QVector([1, 0]), QVector([0, -1]))
    assert k == PolyCone.from_generators(2, lin=[[1, 0]])
    assert critical_cone(p, QVector([1, 1]), QVector([1, 0])) is None
    assert critical_cone(p, QVector([-1, 0]), QVector([0, 0])) is None


def test_critical_cone_presence_iff_graph_point():
    r = rng(5)
    for i in range(8):
        gamma = random_gamma(r, 2)
        y, ystar = random_graph_point(r, gamma)
        assert critical_cone(gamma, y, ystar) is not None
        outside = QVector([3, 3])
        if not gamma.contains(outside):
            assert critical_cone(gamma, outside, ystar) is None


def test_nearby_critical_cone_trivial_shift():
    g = wedge_poly()
    y0 = QVector([0, 0])
    assert nearby_critical_cone(g, y0, y0, y0, y0) == critical_cone(g, y0, y0)


def test_nearby_critical_cone_wedge_edge():
    g = wedge_poly()
    y0 = QVector([0, 0])
    t = F(1, 4)
    y = QVector([-t, t / 2])
    got = nearby_critical_cone(g, y0, y0, y, y0)
    assert got == PolyCone.from_ineqs(2, [[1, 2]])  # halfplane v1/2 + v2 <= 0


def stabilized_scale(gamma, ybar, ybarstar, w, wstar):
    """Largest t in a halving ladder where the pair is a graph point and the
    direct critical cone has stopped changing (the local regime)."""
    t = F(1, 2)
    for _ in range(20):
        d1 = critical_cone(gamma, ybar + w.scale(t), ybarstar + wstar.scale(t))
        d2 = critical_cone(gamma, ybar + w.scale(t / 2), ybarstar + wstar.scale(t / 2))
        if d1 is not None and d1 == d2:
            return t
        t = t / 2
    return None


def test_nearby_critical_cone_matches_direct_on_samples():
    r = rng(31)
    checked = 0
    for i in range(12):
        gamma = random_gamma(r, 2 + (i % 2))
        ybar, ybarstar = random_graph_point(r, gamma)
        k = critical_cone(gamma, ybar, ybarstar)
        for _ in range(6):
            w, wstar = random_tangent_pair(r, k)
            t = stabilized_scale(gamma, ybar, ybarstar, w, wstar)
            if t is None:
                continue
            for tt in (t, t / 2):
                y = ybar + w.scale(tt)
                ystar = ybarstar + wstar.scale(tt)
                direct = critical_cone(gamma, y, ystar)
                assert nearby_critical_cone(gamma, ybar, ybarstar, y, ystar) == direct
                checked += 1
    assert checked >= 60


def test_union_tangent_cone_examples():
    d = ex3_union()
    t = union_tangent_cone(d, QVector([0, 0, 0, 0]))
    assert len(t.pieces) == 2
    assert t.contains(QVector([1, 0, -1, -1]))
    single = UnionSet([r2minus()])
    t2 = union_tangent_cone(single, QVector([0, 0]))
    assert t2.pieces == (PolyCone.from_ineqs(2, [[1, 0], [0, 1]]),)
    t3 = union_tangent_cone(single, QVector([-1, -1]))
    assert t3.pieces == (PolyCone.full_space(2),)
    with pytest.raises(ValueError):
        union_tangent_cone(single, QVector([1, 1]))


def test_directional_normal_cone_single_piece():
    d = UnionSet([r2minus()])
    y0 = QVector([0, 0])
    got = directional_normal_cone(d, y0, QVector([-1, 0]))
    assert got.pieces == (PolyCone.from_generators(2, [[0, 1]]),)
    # zero direction gives the full limiting cone
    zero = directional_normal_cone(d, y0, QVector([0, 0]))
    assert zero.contains(QVector([1, 1]))
    # off-tangent direction reaches nothing
    assert directional_normal_cone(d, y0, QVector([1, 0])).is_empty()


def test_directional_normal_cone_complementarity():
    d = ex3_union()
    w = QVector([1, 0, -1, -1])
    got = directional_normal_cone(d, QVector([0, 0, 0, 0]), w)
    assert got.pieces == (PolyCone.from_generators(4, lin=[[0, 1, 0, 0]]),)


def test_directional_normal_cone_antitone_in_direction():
    r = rng(11)
    for i in range(8):
        d = random_union(r, 2 + (i % 2))
        y0 = QVector.zero(d.dim)
        if not d.contains(y0):
            continue
        full = directional_normal_cone(d, y0, y0)
        t = union_tangent_cone(d, y0)
        w = t.pieces[0].rel_interior_point()
        direct = directional_normal_cone(d, y0, w)
        assert direct.subset_of(full)


def test_directional_normal_cone_matches_sampling_oracle():
    r = rng(13)
    cases = 0
    for i in range(10):
        dim = 2 if i % 2 == 0 else 3
        d = random_union(r, dim)
        y0 = QVector.zero(dim)
        if not d.contains(y0):
            continue
        dirs = [QVector.zero(dim)]
        t = union_tangent_cone(d, y0)
        dirs.append(t.pieces[0].rel_interior_point())
        if len(t.pieces) > 1:
            dirs.append(t.pieces[-1].rel_interior_point())
        for w in dirs:
            closed = directional_normal_cone(d, y0, w)
            sampled = sample_union_normals(d, y0, w)
            # the oracle is authoritative: it must find nothing beyond the
            # closed form, and the closed form must reproduce it exactly
            assert {c.key() for c in sampled.pieces} == {c.key() for c in closed.pieces}
            cases += 1
    assert cases >= 12


def test_cone_union_canonicalization():
    ray = PolyCone.from_generators(2, [[1, 0]])
    quad = PolyCone.from_ineqs(2, [[-1, 0], [0, -1]])
    u = ConeUnion(2, [ray, quad, ray])
    assert u.pieces == (quad,)
    assert ConeUnion(2, []).is_empty()


def test_polyhedron_subset_and_canonical_hrep():
    p = Polyhedron(2, A=[[1, 0], [0, 1], [1, 1]], b=[1, 1, 5])  # third row redundant
    assert len(p.A) == 2
    q = Polyhedron(2, A=[[1, 0], [0, 1]], b=[2, 2])
    assert p.subset_of(q) and not q.subset_of(p)
