"""Lyapunov certificates for the synchronization-error dynamics.

The equation

    P Le + Le^T P = Q - sum_i alpha_i (P vr_i vl_i^T + vl_i vr_i^T P)

is the standard equation P A + A^T P = Q for the shifted operator
A = Le + sum_i alpha_i vr_i vl_i^T, whose zero eigenvalues have been moved to
the alphas. A is then positive stable and the solution is unique and
positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .spectral import DEFAULT_POLICY, TolerancePolicy, ZeroEigenstructure, rank_threshold

VECTORIZED_MAX_EDGES = 40


class LyapunovError(ValueError):
    pass


@dataclass
class LyapunovCertificate:
    P: np.ndarray
    Q: np.ndarray
    alphas: np.ndarray
    residual: float
    min_eig_P: float
    max_eig_P: float
    method: str

    @property
    def ok(self) -> bool:
        if self.P.size == 0:
            return True
        return self.min_eig_P > 0 and self.residual <= 1e-8 * np.linalg.norm(self.Q)

    def to_dict(self, include_matrix: bool = True) -> dict:
        out = {"residual": self.residual, "min_eig_P": self.min_eig_P,
               "max_eig_P": self.max_eig_P, "alphas": self.alphas.tolist(),
               "method": self.method, "ok": bool(self.ok)}
        if include_matrix:
            out["P"] = self.P.tolist()
        return out


def shifted_operator(Le: np.ndarray, zes: ZeroEigenstructure, alphas: np.ndarray) -> np.ndarray:
    return np.asarray(Le, dtype=float) + zes.Vr @ np.diag(alphas) @ zes.Vl.T


def lyapunov_residual(P: np.ndarray, Le: np.ndarray, zes: ZeroEigenstructure,
                      Q: np.ndarray, alphas: np.ndarray) -> float:
    """Frobenius norm of the mismatch in the defining equation, term by term."""
    R = P @ Le + Le.T @ P - Q
    for a, (vr, vl) in zip(alphas, zes.pairs()):
        R += a * (np.outer(P @ vr, vl) + np.outer(vl, vr @ P))
    return float(np.linalg.norm(R))


def solve_standard_lyapunov(A: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """P A + A^T P = Q via the M^2 x M^2 Kronecker system (column-major vec)."""
    M = A.shape[0]
    I = np.eye(M)
    K = np.kron(A.T, I) + np.kron(I, A.T)
    p = np.linalg.solve(K, Q.reshape(-1, order="F"))
    return p.reshape((M, M), order="F")


def _parse_alphas(alphas, xi: int) -> np.ndarray:
    if alphas is None:
        return np.ones(xi)
    a = np.atleast_1d(np.asarray(alphas, dtype=float))
    if a.size == 1 and xi != 1:
        a = np.full(xi, float(a[0]))
    if a.size != xi:
        raise LyapunovError(f"expected {xi} alphas (one per zero eigenvalue), got {a.size}")
    return a


def solve_P(Le: np.ndarray, zes: ZeroEigenstructure, Q: Optional[np.ndarray] = None,
            alphas: Optional[Sequence[float]] = None, policy: TolerancePolicy = DEFAULT_POLICY,
            method: Optional[str] = None) -> LyapunovCertificate:
    Le = np.asarray(Le, dtype=float)
    M = Le.shape[0]
    Q = np.eye(M) if Q is None else np.asarray(Q, dtype=float)
    if Q.shape != (M, M):
        raise LyapunovError(f"Q must be {M}x{M}, got {Q.shape}")
    if np.linalg.norm(Q - Q.T) > 1e-12 * max(1.0, np.linalg.norm(Q)):
        raise LyapunovError("Q is not symmetric")
    if M and np.linalg.eigvalsh(Q).min() <= 0:
        raise LyapunovError("Q is not positive definite")
    a = _parse_alphas(alphas, zes.xi)
    if np.any(a <= 0):
        raise LyapunovError("all alphas must be strictly positive")

    A = shifted_operator(Le, zes, a)
    if M:
        s = np.linalg.svd(Le, compute_uv=False)
        tau = max(rank_threshold(s, Le.shape, policy), np.finfo(float).eps)
        worst = np.linalg.eigvals(A).real.min()
        if worst <= tau:
            raise LyapunovError(f"shifted operator has an eigenvalue with real part {worst:.3e}; "
                                "the graph does not satisfy the connectivity assumptions")
    if method is None:
        method = "vectorized" if M <= VECTORIZED_MAX_EDGES else "bartels-stewart"
    if method == "vectorized":
        P = solve_standard_lyapunov(A, Q)
    elif method == "bartels-stewart":
        # scipy solves a X + X a^H = q; a = A^T gives A^T P + P A = Q
        P = scipy.linalg.solve_continuous_lyapunov(A.T, Q)
    else:
        raise LyapunovError(f"unknown method {method!r}")
    P = 0.5 * (P + P.T)
    eigs = np.linalg.eigvalsh(P) if M else np.zeros(1)
    cert = LyapunovCertificate(P, Q, a, lyapunov_residual(P, Le, zes, Q, a),
                               float(eigs.min()), float(eigs.max()), method)
    if M and cert.min_eig_P <= 0:
        raise LyapunovError(f"solution is not positive definite (min eigenvalue {cert.min_eig_P:.3e})")
    return cert


def evaluate_V(P: np.ndarray, ebar: np.ndarray) -> float:
    ebar = np.asarray(ebar, dtype=float)
    if ebar.shape != (P.shape[0],):
        raise ValueError(f"ebar has shape {ebar.shape}, expected ({P.shape[0]},)")
    return 0.5 * float(ebar @ P @ ebar)


def evaluate_Vdot_bound(Q: np.ndarray, k1: float, ebar: np.ndarray) -> float:
    ebar = np.asarray(ebar, dtype=float)
    if ebar.shape != (Q.shape[0],):
        raise ValueError(f"ebar has shape {ebar.shape}, expected ({Q.shape[0]},)")
    return -0.5 * k1 * float(ebar @ Q @ ebar)


def decay_rate_bound(cert: LyapunovCertificate, k1: float) -> float:
    """Guaranteed exponential rate of ||ebar||: k1 * lambda_min(Q) / (2 lambda_max(P))."""
    qmin = np.linalg.eigvalsh(cert.Q).min()
    return k1 * qmin / (2.0 * cert.max_eig_P)


def vdot_mismatch(times: np.ndarray, Ebar: np.ndarray, cert: LyapunovCertificate, k1: float) -> float:
    """max_t |dV/dt (five-point central difference) - analytic rate| / (1 + |rate|).

    Needs a uniform grid fine enough for the stencil, i.e. every integration step recorded.
    """
    V = 0.5 * np.einsum("ti,ij,tj->t", Ebar, cert.P, Ebar)
    h = float(times[1] - times[0])
    fd = (-V[4:] + 8.0 * V[3:-1] - 8.0 * V[1:-3] + V[:-4]) / (12.0 * h)
    exact = -0.5 * k1 * np.einsum("ti,ij,tj->t", Ebar[2:-2], cert.Q, Ebar[2:-2])
    return float(np.max(np.abs(fd - exact) / (1.0 + np.abs(exact))))
