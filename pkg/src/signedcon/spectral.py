"""Numerical rank machinery and the zero-eigenvalue structure of the signed edge Laplacian.

The zero eigenvalue of ``Le`` has nilpotency index at most two, so the
algebraic multiplicity is read off as ``dim N(Le^2)`` instead of computing a
Jordan form.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .graph import LeaderStructure, SignedDigraph
from .incidence import IncidenceSet


class SpectralError(ArithmeticError):
    pass


@dataclass(frozen=True)
class TolerancePolicy:
    rank_rtol: float = 1e-9
    eig_tol: float = 1e-8
    sim_tol: float = 1e-6

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_POLICY = TolerancePolicy()


def _check_finite(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def rank_threshold(s: np.ndarray, shape: tuple[int, int], policy: TolerancePolicy = DEFAULT_POLICY) -> float:
    smax = s[0] if s.size else 0.0
    return policy.rank_rtol * smax * max(shape)


def numerical_rank(A: np.ndarray, policy: TolerancePolicy = DEFAULT_POLICY) -> int:
    A = _check_finite(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rank_threshold(s, A.shape, policy)))


def _svd_split(A: np.ndarray, policy: TolerancePolicy):
    A = _check_finite(A)
    U, s, Vt = np.linalg.svd(A)
    r = 0 if (s.size == 0 or s[0] == 0.0) else int(np.sum(s > rank_threshold(s, A.shape, policy)))
    return U, s, Vt, r


def null_space(A: np.ndarray, policy: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of A."""
    _, _, Vt, r = _svd_split(A, policy)
    return Vt[r:].T.copy()


def range_space(A: np.ndarray, policy: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    U, _, _, r = _svd_split(A, policy)
    return U[:, :r].copy()


# ---------------------------------------------------------------------------
# predictions

TABLE_ROWS = {
    "SB-1": "SB: l1 = l2SB = 0, or l1 = 1, or l2SB = 1",
    "SB-2": "SB: l1 > 1, l2SB = 0",
    "SB-3": "SB: l1 = 0, l2SB > 1",
    "SB-4": "SB: l1 >= 1, l2SB >= 1",
    "SUB-1": "SUB: l1 = 1, l2SB = l2SUB = 0",
    "SUB-2": "SUB: l2SB = 1, l1 = l2SUB = 0",
    "SUB-3": "SUB: l2SUB = 1, l1 = l2SB = 0",
    "SUB-4": "SUB: l2SB = 0, l1, l2SUB >= 0",
    "SUB-5": "SUB: l2SB > 0, l1, l2SUB >= 0",
}


def _require_assumption(ls: LeaderStructure, spanning_tree: bool) -> None:
    from .graph import AssumptionError
    if spanning_tree != (ls.m == 1):
        raise AssumptionError("spanning-tree flag inconsistent with the leader structure")
    if ls.m == 0:
        raise AssumptionError("graph has no leader group")


def predict_multiplicities(ls: LeaderStructure, sb: bool, spanning_tree: bool,
                           N: int, M: int) -> tuple[int, int, str]:
    """(gamma, xi, table row id) of the zero eigenvalue of Le from the leader structure."""
    _require_assumption(ls, spanning_tree)
    l1, l2sb, l2sub = ls.l1, ls.l2sb, ls.l2sub
    d = M - N
    if sb:
        if spanning_tree:
            return d + 1, d + 1, "SB-1"
        if l1 > 1 and l2sb == 0:
            return d + l1, d + l1, "SB-2"
        if l1 == 0 and l2sb > 1:
            return d + 1, d + l2sb, "SB-3"
        if l1 >= 1 and l2sb >= 1:
            return d + l1, d + l1 + l2sb, "SB-4"
        raise AssertionError("unreachable SB leader configuration")
    if spanning_tree:
        if l1 == 1:
            return d + 1, d + 1, "SUB-1"
        if l2sb == 1:
            return d, d + 1, "SUB-2"
        return d, d, "SUB-3"
    if l2sb == 0:
        return d + l1, d + l1, "SUB-4"
    return d + l1, d + l1 + l2sb, "SUB-5"


def predict_ranks(ls: LeaderStructure, sb: bool, spanning_tree: bool, N: int) -> dict[str, tuple[int, str]]:
    """Predicted ranks, each with a short name of the structural rule behind it."""
    _require_assumption(ls, spanning_tree)
    l1, l2sb = ls.l1, ls.l2sb
    case = "spanning-tree" if spanning_tree else "multi-leader"
    bal = "SB" if sb else "SUB"
    out = {
        "EsIn": (N - l1, f"{case}: one lost rank per root node"),
        "Es": (N - 1 if sb else N, f"{case} {bal}: incidence rank"),
        "Ls": (N - l1 - l2sb, f"{case} {bal}: one lost rank per root node or SB-rooted SCC"),
    }
    if spanning_tree:
        if sb:
            out["Le"] = (N - 1, "spanning-tree SB: rank N-1")
        elif l1 == 1:
            out["Le"] = (N - 1, "spanning-tree SUB with root node: rank N-1")
        else:
            out["Le"] = (N, "spanning-tree SUB rooted SCC: full rank N")
    elif sb and l1 == 0:
        out["Le"] = (N - 1, "multi-leader SB without root nodes: rank N-1")
    elif sb and l2sb == 0:
        out["Le"] = (N - l1, "multi-leader SB with root nodes only: rank N-l1")
    elif sb:
        # the rank rule only brackets this case; the multiplicity table fixes it
        out["Le"] = (N - l1, "multi-leader SB mixed groups: rank N-l1 (from multiplicities)")
    else:
        out["Le"] = (N - l1, "multi-leader SUB: rank N-l1")
    return out


def predict_null_space_relation(ls: LeaderStructure, sb: bool, spanning_tree: bool) -> bool:
    """The published null-space statement, taken literally: True means N(Le^T) == N(Es)."""
    _require_assumption(ls, spanning_tree)
    if spanning_tree:
        return sb or ls.l1 == 0
    return ls.l1 == 0


def predict_null_space_relation_by_rank(ls: LeaderStructure, sb: bool, spanning_tree: bool, N: int) -> bool:
    """N(Es) is always inside N(Le^T), so the two coincide iff rank(Le) == rank(Es)."""
    r = predict_ranks(ls, sb, spanning_tree, N)
    return r["Le"][0] == r["Es"][0]


# ---------------------------------------------------------------------------
# zero eigenstructure

@dataclass
class SimplePair:
    vr: np.ndarray
    vl: np.ndarray


@dataclass
class ChainPair:
    vr_head: np.ndarray
    vr_tail: np.ndarray
    vl_head: np.ndarray
    vl_tail: np.ndarray


@dataclass
class ZeroEigenstructure:
    gamma: int
    xi: int
    chains: list[ChainPair]
    simples: list[SimplePair]
    Vr: np.ndarray
    Vl: np.ndarray
    Pi0: np.ndarray
    Lambda: np.ndarray
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.Pi0.shape[0]

    def pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """All xi (right, left) pairs in column order of Vr / Vl."""
        return [(self.Vr[:, i], self.Vl[:, i]) for i in range(self.xi)]


def _max_col_norm(A: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(A, axis=0))) if A.size else 0.0


def zero_eigenstructure(Le: np.ndarray, Es: Optional[np.ndarray] = None,
                        policy: TolerancePolicy = DEFAULT_POLICY) -> ZeroEigenstructure:
    """Biorthogonal right/left bases of the generalized kernel of Le.

    Column order of ``Vr``/``Vl``: (head, tail) for every 2x2 Jordan chain,
    followed by the simple zero eigenvectors. ``Es`` is only used for the
    residual that checks left eigenvectors against range(Es^T).
    """
    Le = _check_finite(Le)
    M = Le.shape[0]
    if M == 0:
        z = np.zeros((0, 0))
        return ZeroEigenstructure(0, 0, [], [], z, z, z, z, {})
    Le2 = Le @ Le
    K1 = null_space(Le, policy)
    K2 = null_space(Le2, policy)
    gamma, xi = K1.shape[1], K2.shape[1]
    if xi < gamma or xi > 2 * gamma:
        raise SpectralError(f"inconsistent kernel dimensions: dim N(Le)={gamma}, dim N(Le^2)={xi}")

    s = np.linalg.svd(Le, compute_uv=False)
    tau = rank_threshold(s, Le.shape, policy)
    if xi < M:
        mags = np.sort(np.abs(np.linalg.eigvals(Le)))
        gap = mags[xi]
        if gap < 10 * tau:
            raise SpectralError(f"smallest nonzero eigenvalue magnitude {gap:.3e} is below "
                                f"10*tau = {10 * tau:.3e}; zero cluster cannot be separated")

    n_chain = xi - gamma
    if xi == 0:
        Vr = np.zeros((M, 0))
        Vl = np.zeros((M, 0))
    else:
        R = range_space(Le, policy)
        # directions of N(Le) lying in range(Le) have the smallest sines against range(Le)
        S = K1 - R @ (R.T @ K1)
        _, _, Vt = np.linalg.svd(S)
        rot = K1 @ Vt.T
        simple_r = rot[:, : gamma - n_chain]
        heads = rot[:, gamma - n_chain:]
        tails = np.linalg.lstsq(Le, heads, rcond=policy.rank_rtol * M)[0] if n_chain else heads[:, :0]
        cols = []
        for i in range(n_chain):
            cols.extend([heads[:, i], tails[:, i]])
        cols.extend(simple_r.T)
        Vr = np.column_stack(cols)
        W = null_space(Le2.T, policy)
        Vl = W @ np.linalg.inv(Vr.T @ W)

    chains = [ChainPair(Vr[:, 2 * i], Vr[:, 2 * i + 1], Vl[:, 2 * i], Vl[:, 2 * i + 1])
              for i in range(n_chain)]
    simples = [SimplePair(Vr[:, j], Vl[:, j]) for j in range(2 * n_chain, xi)]
    Pi0 = Vr @ Vl.T
    Lam = np.zeros((M, M))
    for p in simples:
        Lam += np.outer(p.vr, p.vl)
    for c in chains:
        Lam += np.outer(c.vr_head, c.vl_head)

    res = {
        "right_kernel": max([np.linalg.norm(Le @ p.vr) for p in simples]
                            + [np.linalg.norm(Le @ c.vr_head) for c in chains], default=0.0),
        "right_chain": max([np.linalg.norm(Le @ c.vr_tail - c.vr_head) for c in chains], default=0.0),
        "left_kernel": max([np.linalg.norm(p.vl @ Le) for p in simples]
                           + [np.linalg.norm(c.vl_tail @ Le) for c in chains], default=0.0),
        "left_chain": max([np.linalg.norm(c.vl_head @ Le - c.vl_tail) for c in chains], default=0.0),
        "biorthogonality": float(np.linalg.norm(Vl.T @ Vr - np.eye(xi))) if xi else 0.0,
        "idempotency": float(np.linalg.norm(Pi0 @ Pi0 - Pi0)),
        "nilpotency": float(np.linalg.norm(Pi0 @ Le @ Pi0 @ Le)),
    }
    if Es is not None:
        EsT = _check_finite(Es).T
        res["limit_annihilation"] = float(np.linalg.norm(Lam @ Le @ EsT))
    res = {k: float(v) for k, v in res.items()}
    return ZeroEigenstructure(gamma, xi, chains, simples, Vr, Vl, Pi0, Lam, res)


# ---------------------------------------------------------------------------
# reports

def null_space_relation(Le: np.ndarray, Es: np.ndarray, policy: TolerancePolicy = DEFAULT_POLICY
                        ) -> tuple[bool, float]:
    """(N(Le^T) == N(Es), Frobenius distance between the orthogonal projectors)."""
    A = null_space(np.asarray(Le, dtype=float).T, policy)
    B = null_space(np.asarray(Es, dtype=float), policy)
    dist = float(np.linalg.norm(A @ A.T - B @ B.T))
    return dist <= policy.eig_tol * max(1, A.shape[0]), dist


@dataclass
class SpectralReport:
    rank_Es: int
    rank_EsIn: int
    rank_Ls: int
    rank_Le: int
    predicted_ranks: dict[str, int]
    rank_sources: dict[str, str]
    predicted_gamma: int
    predicted_xi: int
    table_row: str
    gamma: int
    xi: int
    rank_match: dict[str, bool]
    gamma_match: bool
    xi_match: bool
    null_space_equal: bool
    null_space_distance: float
    null_space_predicted: bool
    null_space_predicted_by_rank: bool
    policy: TolerancePolicy

    @property
    def all_match(self) -> bool:
        return all(self.rank_match.values()) and self.gamma_match and self.xi_match

    def to_dict(self) -> dict:
        return {
            "rank_Es": self.rank_Es, "rank_EsIn": self.rank_EsIn,
            "rank_Ls": self.rank_Ls, "rank_Le": self.rank_Le,
            "predicted_ranks": self.predicted_ranks, "rank_sources": self.rank_sources,
            "predicted_gamma": self.predicted_gamma, "predicted_xi": self.predicted_xi,
            "table_row": self.table_row, "table_row_condition": TABLE_ROWS[self.table_row],
            "gamma": self.gamma, "xi": self.xi,
            "rank_match": self.rank_match, "gamma_match": self.gamma_match, "xi_match": self.xi_match,
            "null_space_relation": {
                "computed": "Equal" if self.null_space_equal else "NotEqual",
                "projector_distance": self.null_space_distance,
                "predicted_stated": "Equal" if self.null_space_predicted else "NotEqual",
                "predicted_by_rank": "Equal" if self.null_space_predicted_by_rank else "NotEqual",
                "matches_stated": self.null_space_equal == self.null_space_predicted,
                "matches_rank_prediction": self.null_space_equal == self.null_space_predicted_by_rank,
            },
            "tolerance_policy": self.policy.to_dict(),
        }


def rank_report(g: SignedDigraph, ls: LeaderStructure, inc: IncidenceSet, sb: bool,
                spanning_tree: bool, policy: TolerancePolicy = DEFAULT_POLICY) -> SpectralReport:
    N, M = g.n, g.m
    Es, EsIn = inc.Es.astype(float), inc.EsIn.astype(float)
    Ls, Le = inc.Ls.astype(float), inc.Le.astype(float)
    computed = {"Es": numerical_rank(Es, policy), "EsIn": numerical_rank(EsIn, policy),
                "Ls": numerical_rank(Ls, policy), "Le": numerical_rank(Le, policy)}
    pred = predict_ranks(ls, sb, spanning_tree, N)
    pg, px, row = predict_multiplicities(ls, sb, spanning_tree, N, M)
    gamma = M - computed["Le"]
    xi = null_space(Le @ Le, policy).shape[1]
    equal, dist = null_space_relation(Le, Es, policy)
    return SpectralReport(
        rank_Es=computed["Es"], rank_EsIn=computed["EsIn"], rank_Ls=computed["Ls"], rank_Le=computed["Le"],
        predicted_ranks={k: v[0] for k, v in pred.items()},
        rank_sources={k: v[1] for k, v in pred.items()},
        predicted_gamma=pg, predicted_xi=px, table_row=row, gamma=gamma, xi=xi,
        rank_match={k: computed[k] == pred[k][0] for k in computed},
        gamma_match=gamma == pg, xi_match=xi == px,
        null_space_equal=equal, null_space_distance=dist,
        null_space_predicted=predict_null_space_relation(ls, sb, spanning_tree),
        null_space_predicted_by_rank=predict_null_space_relation_by_rank(ls, sb, spanning_tree, N),
        policy=policy,
    )
