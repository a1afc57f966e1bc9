"""Normal cones to the graph of a polyhedral normal-cone map, step by step.

The running set is the wedge gamma = {x : x1/2 <= x2 <= -x1/2} with reference
graph point (0, 0).  The critical cone is the wedge itself; its four faces
generate, through differences of nested faces, the nine cones whose products
make up the limiting normal cone of the graph.  Restricting to a direction
pair keeps only the faces compatible with it.
"""

from fractions import Fraction as F

from polyvar import (
    GraphPoint,
    Polyhedron,
    QVector,
    directional_coderivative_normal_map,
    directional_limiting_normal_graph,
    limiting_normal_graph,
    regular_normal_graph,
)

gamma = Polyhedron(2, A=[[1, -2], [1, 2]], b=[0, 0])
gp = GraphPoint(gamma, QVector([0, 0]), QVector([0, 0]))
print("critical cone rays:", list(gp.critical.rays))

reg = regular_normal_graph(gp).pieces[0]
print("\nregular normal cone to the graph: K-polar x K with")
print("  K rays:", list(reg.k.rays), " K-polar rays:", list(reg.kpolar.rays))

lim = limiting_normal_graph(gp)
print(f"\nlimiting normal cone: union of {len(lim.pieces)} products (K°, K):")
for p in lim.pieces:
    print(
        f"  K rays {list(p.k.rays)} lin {list(p.k.lin)}"
        f"   from faces F1={sorted(p.f1.active_set)} ⊇ F2={sorted(p.f2.active_set)}"
    )

# Four interesting directions, one per face of the critical cone.  The first
# moves into the interior of the wedge: every face contains the direction
# only if it is the whole critical cone, so a single product survives.
cases = [
    ("into the interior", QVector([-1, 0]), QVector([0, 0])),
    ("along the upper edge", QVector([F(-4, 3), F(2, 3)]), QVector([F(1, 3), F(2, 3)])),
    ("along the lower edge", QVector([F(-4, 3), F(-2, 3)]), QVector([F(1, 3), F(-2, 3)])),
    ("dual direction only", QVector([0, 0]), QVector([1, 0])),
]
for label, v, vstar in cases:
    gnc = directional_limiting_normal_graph(gp, v, vstar)
    print(f"\ndirection ({label}): {len(gnc.pieces)} piece(s)")
    for p in gnc.pieces:
        print(f"  K rays {list(p.k.rays)} lin {list(p.k.lin)}; K° rays {list(p.kpolar.rays)} lin {list(p.kpolar.lin)}")

# The induced coderivative of the normal-cone map in the edge direction:
# feeding a dual vector on the surviving line returns its perpendicular line,
# anything off it returns the empty set.
v, vstar = cases[1][1], cases[1][2]
on_line = directional_coderivative_normal_map(gp, v, vstar, QVector([2, -1]))
off_line = directional_coderivative_normal_map(gp, v, vstar, QVector([0, 1]))
print("\ncoderivative value at a dual vector on the line:", list(on_line.pieces))
print("coderivative value off the line is empty:", off_line.is_empty())
