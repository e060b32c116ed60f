"""Reference graphs: the three-leader-group example and the four numerical-example graphs."""

from .graph import SignedDigraph

G0 = SignedDigraph.from_edges(9, [
    (1, 2, -1), (3, 1, 1), (2, 4, 1), (4, 3, -1), (5, 6, 1),
    (6, 7, 1), (7, 5, -1), (2, 9, -1), (5, 9, 1), (8, 9, -1),
])

G1 = SignedDigraph.from_edges(5, [(1, 2, -1), (1, 3, 1), (2, 4, 1), (3, 4, 1), (5, 1, 1)])

G2 = SignedDigraph.from_edges(9, [
    (1, 2, -1), (1, 3, 1), (2, 4, 1), (3, 4, -1), (1, 5, 1),
    (3, 6, -1), (7, 1, -1), (7, 8, 1), (8, 1, -1), (9, 3, 1),
])

# G3 and G4 share G2's layout; edges e7..e9 close the cycle 1 -> 7 -> 8 -> 1
G3 = SignedDigraph.from_edges(9, [
    (1, 2, -1), (1, 3, 1), (2, 4, 1), (3, 4, -1), (1, 5, 1),
    (3, 6, -1), (1, 7, 1), (7, 8, 1), (8, 1, 1), (9, 3, 1),
])

G4 = SignedDigraph.from_edges(9, [
    (1, 2, -1), (1, 3, 1), (2, 4, 1), (3, 4, -1), (1, 5, 1),
    (3, 6, -1), (1, 7, -1), (7, 8, 1), (8, 1, 1), (9, 3, 1),
])

X0_FIVE = (3.5, 4.0, -2.0, -6.5, 5.5)
X0_NINE = (3.5, 4.0, -2.0, -6.5, 5.5, -10.5, 3.5, 12.0, 5.5)

FIXTURES = {"g0": G0, "g1": G1, "g2": G2, "g3": G3, "g4": G4}
