import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_params
from signedcon.fixtures import G1, G2
from signedcon.graph import GraphError, SignedDigraph, is_structurally_balanced, random_leader_graph
from signedcon.incidence import (build_in_incidence, build_incidence, build_laplacians, direct_laplacian,
                                 gauge_transform, incidence_set, matrix_csv)

COOP = SignedDigraph.from_edges(2, [(1, 2, 1)])
COMP = SignedDigraph.from_edges(2, [(1, 2, -1)])


def test_incidence_single_edges():
    assert build_incidence(COOP).tolist() == [[1], [-1]]
    assert build_incidence(COMP).tolist() == [[1], [1]]


def test_incidence_g1_columns():
    Es = build_incidence(G1)
    assert Es.shape == (5, 5)
    assert Es[:, 0].tolist() == [1, 1, 0, 0, 0]
    assert Es[:, 4].tolist() == [-1, 0, 0, 0, 1]


def test_in_incidence():
    assert build_in_incidence(COOP).tolist() == [[0], [-1]]
    assert build_in_incidence(COMP).tolist() == [[0], [1]]
    assert not build_in_incidence(G1)[4].any()


def test_laplacians_small():
    Ls, Le = build_laplacians(build_incidence(COOP), build_in_incidence(COOP))
    assert Ls.tolist() == [[0, 0], [-1, 1]] and Le.tolist() == [[1]]
    Ls, Le = build_laplacians(build_incidence(COMP), build_in_incidence(COMP))
    assert Ls.tolist() == [[0, 0], [1, 1]] and Le.tolist() == [[1]]


def test_trace_is_edge_count():
    assert np.trace(incidence_set(G1).Ls) == G1.m == 5


def test_shape_mismatch():
    with pytest.raises(ValueError):
        build_laplacians(np.zeros((2, 3)), np.zeros((3, 2)))


def test_gauge_identity_for_positive_graph():
    g = SignedDigraph.from_edges(3, [(1, 2, 1), (2, 3, 1)])
    gp = gauge_transform(g)
    assert gp.d.tolist() == [1, 1, 1] and gp.de.tolist() == [1, 1]


def test_gauge_g2():
    gp = gauge_transform(G2)
    assert [i + 1 for i in range(9) if gp.d[i] == 1] == [1, 3, 5, 9]
    E = np.diag(gp.d) @ build_incidence(G2) @ np.diag(gp.de)
    assert E.shape[1] == 10
    for col in E.T:
        assert sorted(col[col != 0].tolist()) == [-1, 1]


def test_gauge_rejects_sub():
    with pytest.raises(GraphError, match="unbalanced"):
        gauge_transform(G1)


def test_csv():
    text = matrix_csv(build_incidence(COMP), "e")
    assert text == "e1\n1\n1\n"
    assert matrix_csv(np.array([[0.5, 1.0]]), "v") == "v1,v2\n0.5,1\n"


def _clusters(eigs, radius=1e-2):
    eigs = list(eigs[np.abs(eigs) > radius])
    out = []
    while eigs:
        seed = eigs[0]
        members = [z for z in eigs if abs(z - seed) < radius]
        eigs = [z for z in eigs if abs(z - seed) >= radius]
        out.append((complex(np.mean(members)), len(members)))
    return sorted(out, key=lambda c: (round(c[0].real, 6), round(c[0].imag, 6)))


def _graphs():
    for seed in range(40):
        params, s = random_params(seed)
        yield random_leader_graph(params, s)


@pytest.mark.parametrize("g", list(_graphs()), ids=lambda g: f"n{g.n}m{g.m}")
def test_invariants_on_random_graphs(g):
    inc = incidence_set(g)
    assert (np.abs(inc.Es).sum(axis=0) == 2).all()
    assert (np.abs(inc.EsIn).sum(axis=0) == 1).all()
    assert np.array_equal(inc.Ls, direct_laplacian(g))
    assert np.array_equal(np.diag(inc.Ls), np.array(g.in_degree()[1:]))
    assert np.array_equal(inc.Le, inc.Es.T @ inc.EsIn)
    # nonzero spectra coincide: power sums p_1..p_N fix the nonzero multiset (exact integers)
    Ls, Le = inc.Ls.astype(object), inc.Le.astype(object)
    A, B = Ls.copy(), Le.copy()
    for _ in range(g.n):
        assert np.trace(A) == np.trace(B)
        A, B = A.dot(Ls), B.dot(Le)
    # numerically: defective eigenvalues scatter like eps**(1/k), so compare cluster
    # centroids and sizes rather than individual eigenvalues
    a = _clusters(np.linalg.eigvals(inc.Ls.astype(float)))
    b = _clusters(np.linalg.eigvals(inc.Le.astype(float)))
    assert [n for _, n in a] == [n for _, n in b]
    for (ca, _), (cb, _) in zip(a, b):
        assert abs(ca - cb) < 1e-9
    if is_structurally_balanced(g)[0]:
        gp = gauge_transform(g)
        DLD = np.diag(gp.d) @ inc.Ls @ np.diag(gp.d)
        assert (DLD[~np.eye(g.n, dtype=bool)] <= 0).all()
        E = np.diag(gp.d) @ inc.Es @ np.diag(gp.de)
        assert ((E == 1).sum(axis=0) == 1).all() and ((E == -1).sum(axis=0) == 1).all()


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 7), st.data())
def test_product_matches_entrywise_definition(n, data):
    pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i < j]
    chosen = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    edges = []
    for i, j in chosen:
        s = data.draw(st.sampled_from([1, -1]))
        direction = data.draw(st.sampled_from(["fwd", "back", "both"]))
        if direction in ("fwd", "both"):
            edges.append((i, j, s))
        if direction in ("back", "both"):
            edges.append((j, i, s))
    g = SignedDigraph.from_edges(n, edges)
    assert np.array_equal(incidence_set(g).Ls, direct_laplacian(g))
