"""Node / edge / synchronization-error dynamics and their asymptotic limits."""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .incidence import IncidenceSet
from .lyapunov import LyapunovCertificate
from .spectral import DEFAULT_POLICY, TolerancePolicy, ZeroEigenstructure


class SimulationError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


@dataclass
class SimulationConfig:
    x0: Sequence[float]
    k1: float = 4.0
    t_final: float = 10.0
    dt: float = 1e-3
    record_every: int = 10

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.k1 <= 0 or self.dt <= 0 or self.t_final <= 0:
            raise ConfigError("k1, dt and t_final must be positive")
        if self.t_final < self.dt:
            raise ConfigError("t_final must be at least dt")
        if int(self.record_every) < 1:
            raise ConfigError("record_every must be a positive integer")
        self.record_every = int(self.record_every)
        if not np.all(np.isfinite(self.x0)):
            raise ConfigError("x0 has non-finite entries")

    @property
    def n_steps(self) -> int:
        steps = self.t_final / self.dt
        n = int(round(steps))
        if abs(steps - n) > 1e-9 * max(1.0, steps):
            raise ConfigError(f"t_final={self.t_final} is not a whole number of dt={self.dt} steps")
        return n

    def check_stability(self, Le: np.ndarray) -> bool:
        """Warn when dt exceeds 2 / (k1 * spectral radius of Le)."""
        if Le.size == 0:
            return True
        rho = float(np.max(np.abs(np.linalg.eigvals(Le))))
        if rho > 0 and self.dt > 2.0 / (self.k1 * rho):
            warnings.warn(f"dt={self.dt} exceeds the stability bound 2/(k1*rho)={2.0 / (self.k1 * rho):.3e}",
                          RuntimeWarning, stacklevel=2)
            return False
        return True

    def to_dict(self) -> dict:
        return {"k1": self.k1, "x0": self.x0.tolist(), "t_final": self.t_final,
                "dt": self.dt, "record_every": self.record_every}


def node_field(Ls: np.ndarray, k1: float, x: np.ndarray) -> np.ndarray:
    if Ls.shape[1] != np.shape(x)[0]:
        raise ValueError(f"dimension mismatch: Ls {Ls.shape} vs x {np.shape(x)}")
    return -k1 * (Ls @ x)


def edge_field(Le: np.ndarray, k1: float, e: np.ndarray) -> np.ndarray:
    if Le.shape[1] != np.shape(e)[0]:
        raise ValueError(f"dimension mismatch: Le {Le.shape} vs e {np.shape(e)}")
    return -k1 * (Le @ e)


def edge_average(e: np.ndarray, zes: ZeroEigenstructure) -> np.ndarray:
    """Projection onto the generalized zero eigenspace; accepts a vector or rows of vectors."""
    e = np.asarray(e, dtype=float)
    if e.shape[-1] != zes.size:
        raise ValueError(f"dimension mismatch: e has {e.shape[-1]} entries, expected {zes.size}")
    return e @ zes.Pi0.T


def sync_error(e: np.ndarray, zes: ZeroEigenstructure) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    return e - edge_average(e, zes)


def integrate(field_fn: Callable[[np.ndarray], np.ndarray], y0: np.ndarray, t_final: float,
              dt: float, record_every: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Classical fixed-step RK4 for an autonomous field.

    Records t=0, every ``record_every``-th step and the final step.
    """
    n = int(round(t_final / dt))
    y = np.array(y0, dtype=float)
    times = [0.0]
    rows = [y.copy()]
    h = dt
    for i in range(1, n + 1):
        k1 = field_fn(y)
        k2 = field_fn(y + 0.5 * h * k1)
        k3 = field_fn(y + 0.5 * h * k2)
        k4 = field_fn(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise SimulationError(f"non-finite state at t={i * h:.6g}")
        if i % record_every == 0 or i == n:
            times.append(i * h)
            rows.append(y.copy())
    return np.array(times), np.array(rows)


def predict_edge_limit(zes: ZeroEigenstructure, Es: np.ndarray, x0: np.ndarray) -> np.ndarray:
    Es = np.asarray(Es, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if Es.shape[0] != x0.shape[0] or Es.shape[1] != zes.size:
        raise ValueError("dimension mismatch between Es, x0 and the eigenstructure")
    return zes.Lambda @ (Es.T @ x0)


def expm(A: np.ndarray) -> np.ndarray:
    """Scaling and squaring around a truncated Taylor series."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    norm = np.linalg.norm(A, 1)
    s = max(0, int(math.ceil(math.log2(norm / 0.25)))) if norm > 0.25 else 0
    B = A / (2.0 ** s)
    term = np.eye(n)
    out = np.eye(n)
    # ||B|| <= 1/4: 18 terms put the truncation error below 1e-16
    for k in range(1, 19):
        term = term @ B / k
        out = out + term
    for _ in range(s):
        out = out @ out
    if not np.all(np.isfinite(out)):
        raise SimulationError("matrix exponential overflowed")
    return out


def expm_edge_oracle(Le: np.ndarray, k1: float, T: float, e0: np.ndarray) -> np.ndarray:
    Le = np.asarray(Le, dtype=float)
    out = expm(-k1 * T * Le) @ np.asarray(e0, dtype=float)
    if not np.all(np.isfinite(out)):
        raise SimulationError("non-finite oracle result")
    return out


@dataclass
class Trajectory:
    times: np.ndarray
    X: np.ndarray
    E: np.ndarray
    Ebar: np.ndarray
    Em: np.ndarray
    V: Optional[np.ndarray] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def x_final(self) -> np.ndarray:
        return self.X[-1]

    @property
    def e_final(self) -> np.ndarray:
        return self.E[-1]

    def to_csv(self) -> str:
        N, M = self.X.shape[1], self.E.shape[1]
        header = (["t"] + [f"x{i + 1}" for i in range(N)] + [f"e{k + 1}" for k in range(M)]
                  + [f"ebar{k + 1}" for k in range(M)] + [f"em{k + 1}" for k in range(M)])
        cols = [self.times[:, None], self.X, self.E, self.Ebar, self.Em]
        if self.V is not None:
            header.append("V")
            cols.append(self.V[:, None])
        data = np.hstack(cols)
        buf = io.StringIO()
        buf.write(",".join(header) + "\n")
        for row in data:
            buf.write(",".join(f"{v:.12g}" for v in row) + "\n")
        return buf.getvalue()

    def summary(self) -> dict:
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.diagnostics.items()}


def simulate(inc: IncidenceSet, zes: ZeroEigenstructure, cfg: SimulationConfig,
             cert: Optional[LyapunovCertificate] = None,
             policy: TolerancePolicy = DEFAULT_POLICY) -> Trajectory:
    """Integrate the node ODE and derive edge states, averages and errors.

    The edge ODE is co-integrated from e(0) = Es^T x(0) as an independent check.
    """
    Es = inc.Es.astype(float)
    Ls = inc.Ls.astype(float)
    Le = inc.Le.astype(float)
    N, M = Es.shape
    x0 = cfg.x0
    if x0.shape != (N,):
        raise ConfigError(f"x0 has {x0.size} entries but the graph has {N} nodes")
    n_steps = cfg.n_steps
    cfg.check_stability(Le)

    times, X = integrate(lambda x: node_field(Ls, cfg.k1, x), x0, n_steps * cfg.dt, cfg.dt, cfg.record_every)
    E = X @ Es
    _, E_direct = integrate(lambda e: edge_field(Le, cfg.k1, e), Es.T @ x0, n_steps * cfg.dt, cfg.dt,
                            cfg.record_every)
    mismatch = float(np.max(np.abs(E - E_direct))) if M else 0.0
    if mismatch > 1e-8 * max(1.0, float(np.max(np.abs(E))) if M else 1.0):
        raise SimulationError(f"edge ODE disagrees with node-derived edge states by {mismatch:.3e}")
    Em = edge_average(E, zes)
    Ebar = E - Em
    V = None
    if cert is not None:
        V = 0.5 * np.einsum("ti,ij,tj->t", Ebar, cert.P, Ebar)
    e_lim = predict_edge_limit(zes, Es, x0)
    diag = {
        "t_final": float(times[-1]),
        "ebar_final_norm": float(np.max(np.abs(Ebar[-1]))) if M else 0.0,
        "e_final": E[-1].copy(),
        "x_final": X[-1].copy(),
        "predicted_e_limit": e_lim,
        "limit_error": float(np.max(np.abs(E[-1] - e_lim))) if M else 0.0,
        "node_edge_consistency": mismatch,
        "edge_average_drift": float(np.max(np.abs(Em - Em[0]))) if M else 0.0,
    }
    return Trajectory(times, X, E, Ebar, Em, V, diag)


def decay_slope(traj: Trajectory, t_start: float = 1.0, floor: float = 1e-9) -> Optional[float]:
    """Least-squares slope of log ||ebar(t)|| over [t_start, first time the norm drops below floor]."""
    norms = np.linalg.norm(traj.Ebar, axis=1)
    below = np.nonzero(norms < floor)[0]
    stop = below[0] if below.size else len(norms)
    mask = np.zeros(len(norms), dtype=bool)
    mask[:stop] = True
    window = mask & (traj.times >= t_start)
    if window.sum() < 3:
        window = mask
    if window.sum() < 3:
        return None
    slope, _ = np.polyfit(traj.times[window], np.log(norms[window]), 1)
    return float(slope)
