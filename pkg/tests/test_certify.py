from fractions import Fraction as F

import pytest

from corpus import random_gamma, random_matrix, random_symmetric, random_union, rng
from polyvar.certify import (
    HOLDS,
    INCONCLUSIVE,
    NOT_CERTIFIED,
    Certificate,
    ConstraintSystemSpec,
    VariationalSystemSpec,
    check_aubin,
    check_calmness_constraint,
    check_directional_metric_regularity,
    check_foscms,
    check_foscms_joint,
    check_second_order_directional_subregularity,
    check_soscms,
    covers_space,
    fm_project,
    graphical_derivative_S,
    _hessian_contraction,
    _form_value,
)
from polyvar.cones import PolyCone
from polyvar.graphmap import directional_limiting_normal_graph
from polyvar.linalg import QMatrix, QVector
from polyvar.sets import (
    Polyhedron,
    UnionSet,
    directional_normal_cone,
    union_tangent_cone,
)


def ex3_spec():
    p1 = Polyhedron(4, A=[[-1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], b=[0, 0, 0], E=[[0, 1, 0, 0]], e=[0])
    p2 = Polyhedron(4, A=[[0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], b=[0, 0, 0], E=[[1, 0, 0, 0]], e=[0])
    return ConstraintSystemSpec(
        l=2, n=2, m=4,
        Jp=[[-1, 0], [0, -1], [0, 0], [0, 0]],
        Jx=[[1, 0], [0, 1], [-1, -1], [-1, 1]],
        g0=[0, 0, 0, 0],
        D=UnionSet([p1, p2]),
        hessians=[QMatrix.zero(2, 2), QMatrix.zero(2, 2), QMatrix([[-2, 0], [0, 0]]), QMatrix([[-2, 0], [0, 0]])],
    )


def ex4_spec(hessians=True):
    return ConstraintSystemSpec(
        l=1, n=2, m=2,
        Jp=[[1], [1]],
        Jx=[[0, 1], [0, -1]],
        g0=[0, 0],
        D=UnionSet([Polyhedron(2, A=[[1, 0], [0, 1]], b=[0, 0])]),
        hessians=[QMatrix([[-1, 0], [0, 0]]), QMatrix([[-1, 0], [0, 0]])] if hessians else None,
    )


def ex5_spec():
    return VariationalSystemSpec(
        l=1, n=2,
        Jp=[[-1], [0]],
        Jx=[[1, 0], [0, -1]],
        gamma=Polyhedron(2, A=[[1, -2], [1, 2]], b=[0, 0]),
        xbar=[0, 0], ybarstar=[0, 0],
    )


# -- witness replay ------------------------------------------------------------


def replay_foscms_witness(spec, w):
    assert w.u is not None and not w.u.is_zero()
    assert w.vstar is not None and not w.vstar.is_zero()
    img = spec.Jx.matvec(w.u)
    assert union_tangent_cone(spec.D, spec.g0).contains(img)
    assert spec.Jx.T.matvec(w.vstar).is_zero()
    assert directional_normal_cone(spec.D, spec.g0, img).contains(w.vstar)


def replay_soscms_witness(spec, w):
    replay_foscms_witness(spec, w)
    qform = _hessian_contraction(spec, w.vstar)
    assert _form_value(qform, w.u) >= 0


def replay_aubin_witness(spec, w, mode):
    if w.vstar is None:  # solvability gap: no solution direction above this q
        assert graphical_derivative_S(spec, w.q) == []
        return
    assert not w.vstar.is_zero()
    q, u = w.q, w.u
    if spec.kind == "constraint":
        img = spec.Jp.matvec(q) + spec.Jx.matvec(u)
        assert spec.Jx.T.matvec(w.vstar).is_zero()
        assert directional_normal_cone(spec.D, spec.g0, img).contains(w.vstar)
    else:
        gp = spec.graph_point()
        wdir = -(spec.Jp.matvec(q) + spec.Jx.matvec(u))
        gnc = directional_limiting_normal_graph(gp, u, wdir)
        assert gnc.contains(-spec.Jx.T.matvec(w.vstar), -w.vstar)
    if mode == "theorem":
        assert not spec.Jp.T.matvec(w.vstar).is_zero()
    assert not (q.is_zero() and u.is_zero())


# -- worked examples -----------------------------------------------------------


def test_ex3_foscms_holds_with_expected_trace():
    cert = check_foscms(ex3_spec())
    assert cert.status == HOLDS
    # some stratum must exhibit the admissible direction cone u = (u1, 0)
    assert any(r["admissible_directions"] for r in cert.trace)


def test_ex3_calmness_first_order():
    cert = check_calmness_constraint(ex3_spec(), "first")
    assert cert.status == HOLDS
    assert cert.rate("linear_solvability")


def test_ex3_aubin_corollary_fails_with_replayable_witness():
    spec = ex3_spec()
    cert = check_aubin(spec, "corollary")
    assert cert.status == NOT_CERTIFIED
    assert cert.witnesses
    for w in cert.witnesses:
        replay_aubin_witness(spec, w, "corollary")
    # the known offending dual ray
    assert any(w.vstar is not None and w.vstar.primitive() == QVector([2, 0, 1, 1]) for w in cert.witnesses)


def test_ex3_aubin_theorem_mode_also_fails():
    spec = ex3_spec()
    cert = check_aubin(spec, "theorem", assume_subregular=True)
    assert cert.status == NOT_CERTIFIED
    for w in cert.witnesses:
        replay_aubin_witness(spec, w, "theorem")


def test_ex4_foscms_witness():
    spec = ex4_spec()
    cert = check_foscms(spec)
    assert cert.status == NOT_CERTIFIED
    assert any(w.vstar.primitive() == QVector([1, 1]) for w in cert.witnesses)
    for w in cert.witnesses:
        replay_foscms_witness(spec, w)


def test_ex4_soscms_holds():
    assert check_soscms(ex4_spec()).status == HOLDS


def test_ex4_soscms_needs_hessians():
    with pytest.raises(ValueError):
        check_soscms(ex4_spec(hessians=False))


def test_ex4_calmness_second_order_rate():
    cert = check_calmness_constraint(ex4_spec(), "second")
    assert cert.status == HOLDS
    assert cert.rate("hoelder_half_solvability")


def test_ex4_first_order_calmness_not_certified():
    cert = check_calmness_constraint(ex4_spec(), "first")
    assert cert.status == NOT_CERTIFIED


def test_ex4_directional_split():
    spec = ex4_spec()
    refutation = check_directional_metric_regularity(spec, QVector([1, 0]), QVector([0, 0]))
    assert refutation.status == NOT_CERTIFIED and refutation.refuted
    second = check_second_order_directional_subregularity(spec, QVector([1, 0]), QVector([-1, -1]))
    assert second.status == HOLDS
    from_hessians = check_second_order_directional_subregularity(spec, QVector([1, 0]))
    assert from_hessians.status == HOLDS


def test_second_order_subreg_rejects_zero_direction():
    with pytest.raises(ValueError):
        check_second_order_directional_subregularity(ex4_spec(), QVector([0, 0]))


def test_second_order_subreg_lineality_rejection():
    # D = {0} in R: adjoint cone for direction u is ker(Jx^T) ∩ N = a full line
    spec = ConstraintSystemSpec(
        l=1, n=1, m=1, Jp=[[1]], Jx=[[0]], g0=[0],
        D=UnionSet([Polyhedron(1, E=[[1]], e=[0])]),
        hessians=[QMatrix([[0]])],
    )
    cert = check_second_order_directional_subregularity(spec, QVector([1]), QVector([-1]))
    assert cert.status == NOT_CERTIFIED


def test_ex5_aubin_both_modes_and_trace_shape():
    spec = ex5_spec()
    cor = check_aubin(spec, "corollary")
    assert cor.status == HOLDS
    phase_b = next(t for t in cor.trace if str(t["phase"]).startswith("B"))
    assert len(phase_b["cases"]) == 4
    assert all(e["trivial"] for c in phase_b["cases"] for e in c["adjoint_inclusions"])
    assert sum(len(c["adjoint_inclusions"]) for c in phase_b["cases"]) == 4
    std = next(t for t in cor.trace if str(t["phase"]).startswith("standard"))
    gens = sorted(g for p in std["pieces"] for g in p["nontrivial_generators"])
    assert gens == [["-1", "-2"], ["-1", "2"]]
    thm = check_aubin(spec, "theorem")
    assert thm.status == HOLDS
    assert check_foscms_joint(spec).status == HOLDS


def test_ex5_graphical_derivative_slices():
    spec = ex5_spec()
    for q, expected in [
        ([-1], {((F(-1), F(0)),), ((F(-4, 3), F(2, 3)),), ((F(-4, 3), F(-2, 3)),)}),
        ([1], {((F(0), F(0)),)}),
    ]:
        pieces = graphical_derivative_S(spec, QVector(q))
        got = set()
        for p in pieces:
            verts, rec = p.vertices_and_recession()
            assert rec.is_trivial()
            got.add(tuple(sorted(tuple(v.entries) for v in verts)))
        assert got == expected
    zero_slice = graphical_derivative_S(spec, QVector([0]))
    assert any(p.contains(QVector([0, 0])) for p in zero_slice)


def test_graphical_derivative_positive_homogeneity():
    spec = ex5_spec()
    q = QVector([-1])
    lam = F(3, 2)
    a = graphical_derivative_S(spec, q)
    b = graphical_derivative_S(spec, q.scale(lam))
    scaled = []
    for p in a:
        scaled.append(
            Polyhedron(
                2,
                list(p.A),
                [lam * bv for bv in p.b],
                list(p.E),
                [lam * ev for ev in p.e],
            )
        )
    assert len(b) == len(scaled)
    for pb in b:
        assert any(pb.subset_of(ps) and ps.subset_of(pb) for ps in scaled)


def test_aubin_solvability_failure_is_refutation():
    # G(p, x) = p with D = R_- : no solution direction for q > 0
    spec = ConstraintSystemSpec(
        l=1, n=1, m=1, Jp=[[1]], Jx=[[0]], g0=[0],
        D=UnionSet([Polyhedron(1, A=[[1]], b=[0])]),
    )
    cert = check_aubin(spec, "corollary")
    assert cert.status == NOT_CERTIFIED and cert.refuted
    gap = cert.witnesses[0]
    assert gap.vstar is None
    replay_aubin_witness(spec, gap, "corollary")


def zero_jacobian_variational_spec():
    # G identically zero: every adjoint cone is the negated difference cone,
    # so the corollary fails while the theorem-mode conclusion (about Jp^T
    # images only) is vacuously true
    return VariationalSystemSpec(
        l=1, n=2,
        Jp=[[0], [0]],
        Jx=[[0, 0], [0, 0]],
        gamma=Polyhedron(2, A=[[-1, 0], [0, -1]], b=[0, 0]),
        xbar=[0, 0], ybarstar=[0, 0],
    )


def test_aubin_theorem_weaker_than_corollary():
    spec = zero_jacobian_variational_spec()
    cor = check_aubin(spec, "corollary")
    thm = check_aubin(spec, "theorem", assume_subregular=True)
    assert cor.status == NOT_CERTIFIED and not cor.refuted
    assert thm.status == HOLDS
    for w in cor.witnesses:
        replay_aubin_witness(spec, w, "corollary")


def test_aubin_theorem_mode_requires_evidence():
    spec = zero_jacobian_variational_spec()
    assert check_foscms_joint(spec).status == NOT_CERTIFIED
    with pytest.raises(ValueError):
        check_aubin(spec, "theorem")  # joint FOSCMS fails and no assertion given


def test_ex3_frozen_directional_regularity_holds():
    spec = ex3_spec()
    cert = check_directional_metric_regularity(spec, QVector([1, 0]), QVector([0, 0, 0, 0]))
    assert cert.status == HOLDS


def test_vacuous_directional_regularity():
    spec = ex4_spec()
    # Jx u - v = (5, 0) leaves the tangent cone of D = R^2_-
    cert = check_directional_metric_regularity(spec, QVector([0, 0]), QVector([-5, 0]))
    assert cert.status == HOLDS
    assert any("not tangent" in n for n in cert.notes)


def test_smooth_invertible_variational_system():
    spec = VariationalSystemSpec(
        l=1, n=2,
        Jp=[[1], [0]],
        Jx=[[1, 0], [0, 1]],
        gamma=Polyhedron(2),
        xbar=[0, 0], ybarstar=[0, 0],
    )
    assert check_aubin(spec, "corollary").status == HOLDS
    assert check_aubin(spec, "theorem").status == HOLDS
    assert check_foscms_joint(spec).status == HOLDS


def test_foscms_vacuous_when_jx_surjective():
    spec = ConstraintSystemSpec(
        l=1, n=2, m=2, Jp=[[0], [0]], Jx=[[1, 0], [0, 1]], g0=[0, 0],
        D=UnionSet([Polyhedron(2, A=[[1, 0], [0, 1]], b=[0, 0])]),
    )
    assert check_foscms(spec).status == HOLDS


def test_whole_space_d_trivially_calm():
    spec = ConstraintSystemSpec(
        l=1, n=2, m=2, Jp=[[1], [0]], Jx=[[1, 0], [0, 1]], g0=[0, 0],
        D=UnionSet([Polyhedron(2)]),
    )
    cert = check_calmness_constraint(spec, "first")
    assert cert.status == HOLDS and cert.rate("linear_solvability")


def test_soscms_zero_hessians_inherit_foscms_witness():
    spec = ConstraintSystemSpec(
        l=1, n=2, m=2,
        Jp=[[1], [1]], Jx=[[0, 1], [0, -1]], g0=[0, 0],
        D=UnionSet([Polyhedron(2, A=[[1, 0], [0, 1]], b=[0, 0])]),
        hessians=[QMatrix.zero(2, 2), QMatrix.zero(2, 2)],
    )
    first = check_foscms(spec)
    second = check_soscms(spec)
    assert first.status == NOT_CERTIFIED and second.status == NOT_CERTIFIED
    for w in second.witnesses:
        replay_soscms_witness(spec, w)


# -- metamorphic laws over a randomized corpus -----------------------------------


def random_constraint_specs(count=8):
    r = rng(71)
    specs = []
    while len(specs) < count:
        m = r.choice([2, 3])
        n = 2
        l = r.choice([1, 2])
        d = random_union(r, m)
        g0 = QVector.zero(m)
        if not d.contains(g0):
            continue
        specs.append(
            ConstraintSystemSpec(
                l=l, n=n, m=m,
                Jp=random_matrix(r, m, l),
                Jx=random_matrix(r, m, n),
                g0=g0,
                D=d,
                hessians=[random_symmetric(r, n) for _ in range(m)],
            )
        )
    return specs


def random_variational_specs(count=6):
    r = rng(73)
    specs = []
    while len(specs) < count:
        n = 2
        l = r.choice([1, 2])
        gamma = random_gamma(r, n)
        x0 = QVector.zero(n)
        if not gamma.contains(x0):
            continue
        nc = gamma.normal_cone(x0)
        ystar = QVector.zero(n)
        for g in nc.generators():
            ystar = ystar + g.scale(r.choice([0, 1]))
        specs.append(
            VariationalSystemSpec(
                l=l, n=n,
                Jp=random_matrix(r, n, l),
                Jx=random_matrix(r, n, n),
                gamma=gamma, xbar=x0, ybarstar=ystar,
            )
        )
    return specs


def test_ex3_soscms_holds_with_its_hessians():
    assert check_soscms(ex3_spec()).status == HOLDS


def test_foscms_joint_reduces_to_frozen_when_jp_vanishes():
    base = ex4_spec()
    frozen = ConstraintSystemSpec(
        l=1, n=2, m=2, Jp=[[0], [0]], Jx=base.Jx, g0=base.g0, D=base.D,
        hessians=base.hessians,
    )
    assert check_foscms_joint(frozen).status == check_foscms(frozen).status == NOT_CERTIFIED
    surjective = ConstraintSystemSpec(
        l=1, n=2, m=2, Jp=[[0], [0]], Jx=[[1, 0], [0, 1]], g0=base.g0, D=base.D,
    )
    assert check_foscms_joint(surjective).status == check_foscms(surjective).status == HOLDS


def test_metamorphic_foscms_implies_soscms():
    for spec in [ex3_spec(), ex4_spec()] + random_constraint_specs():
        first = check_foscms(spec)
        second = check_soscms(spec)
        if first.status == HOLDS:
            assert second.status == HOLDS
        if first.status == NOT_CERTIFIED:
            for w in first.witnesses:
                replay_foscms_witness(spec, w)
        if second.status == NOT_CERTIFIED:
            for w in second.witnesses:
                replay_soscms_witness(spec, w)


def test_metamorphic_aubin_corollary_implies_theorem():
    for spec in [ex5_spec()] + random_variational_specs() + random_constraint_specs(4):
        cor = check_aubin(spec, "corollary")
        if cor.status == HOLDS:
            thm = check_aubin(spec, "theorem")
            assert thm.status == HOLDS
        else:
            for w in cor.witnesses:
                replay_aubin_witness(spec, w, "corollary")


def test_certificates_invariant_under_row_rescaling():
    base = ex3_spec()
    p1, p2 = base.D.pieces
    scaled_p1 = Polyhedron(
        4,
        [a.scale(3) for a in p1.A],
        [3 * bv for bv in p1.b],
        [g.scale(5) for g in p1.E],
        [5 * ev for ev in p1.e],
    )
    scaled = ConstraintSystemSpec(
        l=2, n=2, m=4, Jp=base.Jp, Jx=base.Jx, g0=base.g0,
        D=UnionSet([scaled_p1, p2]), hessians=base.hessians,
    )
    for check in (check_foscms, lambda s: check_aubin(s, "corollary")):
        assert check(base).status == check(scaled).status


def test_witness_rescaling_preserves_validity():
    spec = ex4_spec()
    cert = check_foscms(spec)
    w = cert.witnesses[0]
    from polyvar.certify import Witness

    scaled = Witness(w.stratum, w.vstar.scale(7), u=w.u.scale(3), q=None)
    replay_foscms_witness(spec, scaled)


# -- projection and coverage helpers ----------------------------------------------


def test_fm_project_matches_generator_projection():
    r = rng(91)
    for _ in range(12):
        dim = r.choice([3, 4])
        keep = r.choice([1, 2])
        rows = [[r.randint(-2, 2) for _ in range(dim)] for _ in range(r.randint(1, 4))]
        eqs = [[r.randint(-1, 1) for _ in range(dim)] for _ in range(r.randint(0, 1))]
        cone = PolyCone.from_ineqs(dim, [q for q in rows if any(q)], [q for q in eqs if any(q)])
        via_fm = fm_project(cone, keep)
        via_generators = PolyCone.from_generators(
            keep,
            [QVector(g.entries[:keep]) for g in cone.rays],
            [QVector(g.entries[:keep]) for g in cone.lin],
        )
        assert via_fm == via_generators


def test_covers_space():
    plus = PolyCone.from_ineqs(2, [[-1, 0], [0, -1]])
    minus = PolyCone.from_ineqs(2, [[1, 0], [0, 1]])
    upper = PolyCone.from_ineqs(2, [[0, -1]])
    lower = PolyCone.from_ineqs(2, [[0, 1]])
    ok, wit = covers_space([upper, lower], 2)
    assert ok and wit is None
    ok, wit = covers_space([plus, minus], 2)
    assert not ok and wit is not None
    assert not plus.contains(wit) and not minus.contains(wit)
