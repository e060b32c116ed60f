"""Signed incidence / in-incidence matrices, Laplacians and gauge transforms.

Everything here is built in exact integer arithmetic (int64 arrays); callers
convert to float for spectral work.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .graph import GraphError, SignedDigraph, is_structurally_balanced


@dataclass(frozen=True)
class IncidenceSet:
    Es: np.ndarray
    EsIn: np.ndarray
    Ls: np.ndarray
    Le: np.ndarray


def build_incidence(g: SignedDigraph) -> np.ndarray:
    Es = np.zeros((g.n, g.m), dtype=np.int64)
    for k, e in enumerate(g.edges):
        Es[e.tail - 1, k] = 1
        Es[e.head - 1, k] = -1 if e.sign == 1 else 1
    return Es


def build_in_incidence(g: SignedDigraph) -> np.ndarray:
    EsIn = np.zeros((g.n, g.m), dtype=np.int64)
    for k, e in enumerate(g.edges):
        EsIn[e.head - 1, k] = -1 if e.sign == 1 else 1
    return EsIn


def build_laplacians(Es: np.ndarray, EsIn: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if Es.shape != EsIn.shape:
        raise ValueError(f"shape mismatch: Es {Es.shape} vs EsIn {EsIn.shape}")
    return EsIn @ Es.T, Es.T @ EsIn


def direct_laplacian(g: SignedDigraph) -> np.ndarray:
    """Entrywise definition: l_ii = sum_k |a_ik|, l_ij = -a_ij."""
    L = np.zeros((g.n, g.n), dtype=np.int64)
    for e in g.edges:
        L[e.head - 1, e.head - 1] += 1
        L[e.head - 1, e.tail - 1] -= e.sign
    return L


def incidence_set(g: SignedDigraph) -> IncidenceSet:
    Es = build_incidence(g)
    EsIn = build_in_incidence(g)
    Ls, Le = build_laplacians(Es, EsIn)
    return IncidenceSet(Es, EsIn, Ls, Le)


@dataclass(frozen=True)
class GaugePair:
    d: np.ndarray
    de: np.ndarray


def gauge_transform(g: SignedDigraph) -> GaugePair:
    """Node gauge from the balance test and edge gauge = gauge of each edge's tail."""
    sb, gauge = is_structurally_balanced(g)
    if not sb:
        raise GraphError("graph is structurally unbalanced; no gauge transformation exists")
    d = np.array(gauge.d, dtype=np.int64)
    de = np.array([d[e.tail - 1] for e in g.edges], dtype=np.int64)
    return GaugePair(d, de)


def matrix_csv(A: np.ndarray, col_prefix: str) -> str:
    """Row-major CSV with a header of column labels <prefix>1..<prefix>k."""
    buf = io.StringIO()
    buf.write(",".join(f"{col_prefix}{j + 1}" for j in range(A.shape[1])) + "\n")
    for row in A:
        if np.issubdtype(A.dtype, np.integer):
            buf.write(",".join(str(int(v)) for v in row) + "\n")
        else:
            buf.write(",".join(f"{v:.12g}" for v in row) + "\n")
    return buf.getvalue()
