"""A tour of the exact cone algebra: representations, polarity, faces.

Every number below is an exact rational; run the script and compare the
printed output with what you compute by hand.
"""

from fractions import Fraction as F

from polyvar import PolyCone, face_difference


def show(label, cone):
    print(f"{label}")
    print(f"  rays {list(cone.rays)}  lin {list(cone.lin)}")
    print(f"  ineq rows {list(cone.ineqs)}  eq rows {list(cone.eqs)}")


# A cone can be built from either side of the double description.  The wedge
# {z : z1/2 <= z2 <= -z1/2} opens to the left; its extreme rays are found by
# the conversion, and asking for the H-representation of cone{(-2,1),(-2,-1)}
# gets back the two facets.
wedge = PolyCone.from_ineqs(2, [[F(1, 2), -1], [F(1, 2), 1]])
show("wedge from inequalities", wedge)
again = PolyCone.from_generators(2, [[-2, 1], [-2, -1]])
print("same cone from generators:", wedge == again)

# Polarity is a representation swap: generators become constraints.
polar = wedge.polar()
show("polar of the wedge", polar)
print("bipolar returns the original:", polar.polar() == wedge)

# The face lattice of the wedge: the cone, its two edges, and the origin.
print("\nfaces of the wedge:")
for f in wedge.faces():
    print(f"  active rows {sorted(f.active_set)} -> rays {list(f.cone.rays)} lin {list(f.cone.lin)}")

# Differences of nested faces are the building blocks for the cones attached
# to graphs of normal-cone maps.  Subtracting an edge from the wedge tilts it
# open into a halfplane.
edge = PolyCone.from_generators(2, [[-2, 1]])
half = face_difference(wedge, edge)
show("\nwedge minus its upper edge", half)
line = face_difference(edge, edge)
show("edge minus itself (its span)", line)

# Duality laws hold exactly.
a = PolyCone.from_ineqs(2, [[-1, 0]])
b = PolyCone.from_ineqs(2, [[0, -1]])
lhs = a.intersect(b).polar()
rhs = a.polar().minkowski_sum(b.polar())
print("\n(a ∩ b)° == a° + b°:", lhs == rhs)
