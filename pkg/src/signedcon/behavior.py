"""Predicted emergent behavior and the numerical checks of each control objective."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dynamics import Trajectory
from .graph import AssumptionError, GaugeVector, GroupKind, LeaderStructure


class BehaviorClass(str, Enum):
    BIPARTITE_CONSENSUS = "BipartiteConsensus"
    TRIVIAL_CONSENSUS = "TrivialConsensus"
    INTERVAL_BIPARTITE_CONSENSUS = "IntervalBipartiteConsensus"
    BIPARTITE_CONTAINMENT = "BipartiteContainment"


class WrongClassError(ValueError):
    """A check was requested for a graph outside its objective's hypotheses."""


@dataclass
class Check:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": self.residual, "tol": self.tol, "pass": self.passed}


@dataclass
class BehaviorVerdict:
    predicted: BehaviorClass
    theorem_item: str
    checks: list[Check] = field(default_factory=list)

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"predicted": self.predicted.value, "theorem_item": self.theorem_item,
                "checks": [c.to_dict() for c in self.checks], "overall_pass": self.overall_pass}


def classify(ls: LeaderStructure, sb: bool, spanning_tree: bool) -> tuple[BehaviorClass, str]:
    if ls.m == 0 or spanning_tree != (ls.m == 1):
        raise AssumptionError("neither the spanning-tree nor the multi-leader assumption holds")
    if spanning_tree:
        if sb:
            return BehaviorClass.BIPARTITE_CONSENSUS, "(i)"
        if ls.groups[0].kind is GroupKind.SCC_SUB:
            return BehaviorClass.TRIVIAL_CONSENSUS, "(ii)"
        return BehaviorClass.INTERVAL_BIPARTITE_CONSENSUS, "(iii)"
    if ls.l1 + ls.l2sb >= 1:
        return BehaviorClass.BIPARTITE_CONTAINMENT, "(iv)"
    return BehaviorClass.TRIVIAL_CONSENSUS, "(v)"


def verify_bipartite_consensus(traj: Trajectory, gauge: GaugeVector, tol: float = 1e-6) -> Check:
    if gauge is None:
        raise WrongClassError("bipartite consensus needs a balanced graph")
    x = traj.x_final
    d = gauge.as_array()
    c = float(np.mean(d * x))
    edge_res = float(np.max(np.abs(traj.e_final))) if traj.E.shape[1] else 0.0
    shape_res = float(np.max(np.abs(x - c * d)))
    return Check("bipartite_consensus", max(edge_res, shape_res), tol)


def verify_trivial_consensus(traj: Trajectory, tol: float = 1e-6) -> Check:
    return Check("trivial_consensus", float(np.max(np.abs(traj.x_final))), tol)


def interval_bound(traj: Trajectory, ls: LeaderStructure) -> float:
    """theta estimated from the terminal leader states."""
    idx = [v - 1 for v in ls.leaders]
    return float(np.max(np.abs(traj.x_final[idx])))


def verify_interval_bipartite(traj: Trajectory, ls: LeaderStructure, tol: float = 1e-6) -> Check:
    if ls.m != 1 or ls.groups[0].kind is GroupKind.SCC_SUB:
        raise WrongClassError("interval bipartite consensus needs a single root node or SB-rooted SCC")
    theta = interval_bound(traj, ls)
    res = max(0.0, float(np.max(np.abs(traj.x_final))) - theta)
    return Check("interval_bipartite_consensus", res, tol)


def containment_products(traj: Trajectory, ls: LeaderStructure, gauge: GaugeVector) -> dict[int, float]:
    """Per follower j: (x_j - max_i s_i x_i)(x_j - min_i s_i x_i) with s_i = d_i d_j."""
    x = traj.x_final
    d = gauge.as_array()
    lead = np.array([v - 1 for v in ls.leaders])
    out = {}
    for j in ls.followers:
        signed = d[lead] * d[j - 1] * x[lead]
        out[j] = float((x[j - 1] - signed.max()) * (x[j - 1] - signed.min()))
    return out


def verify_containment_sb(traj: Trajectory, ls: LeaderStructure, gauge: GaugeVector,
                          tol: float = 1e-6) -> Check:
    if gauge is None:
        raise WrongClassError("signed containment needs a balanced graph")
    prods = containment_products(traj, ls, gauge)
    res = max([max(0.0, p) for p in prods.values()], default=0.0)
    return Check("bipartite_containment_sb", res, tol)


def verify_containment_sub(traj: Trajectory, ls: LeaderStructure, tol: float = 1e-6,
                           sb: bool = False) -> Check:
    if sb:
        raise WrongClassError("modulus containment applies to unbalanced graphs")
    x = traj.x_final
    bound = float(np.max(np.abs(x[[v - 1 for v in ls.leaders]])))
    res = max([max(0.0, abs(x[j - 1]) - bound) for j in ls.followers], default=0.0)
    return Check("bipartite_containment_sub", res, tol)


def verify_sync_errors(traj: Trajectory, tol: float = 1e-6) -> Check:
    res = float(np.max(np.abs(traj.Ebar[-1]))) if traj.Ebar.shape[1] else 0.0
    return Check("sync_errors", res, tol)


def objective_check(cls: BehaviorClass, traj: Trajectory, ls: LeaderStructure, sb: bool,
                    gauge: GaugeVector, tol: float = 1e-6) -> Check:
    if cls is BehaviorClass.BIPARTITE_CONSENSUS:
        return verify_bipartite_consensus(traj, gauge, tol)
    if cls is BehaviorClass.TRIVIAL_CONSENSUS:
        return verify_trivial_consensus(traj, tol)
    if cls is BehaviorClass.INTERVAL_BIPARTITE_CONSENSUS:
        return verify_interval_bipartite(traj, ls, tol)
    if sb:
        return verify_containment_sb(traj, ls, gauge, tol)
    return verify_containment_sub(traj, ls, tol)


def verdict(traj: Trajectory, ls: LeaderStructure, sb: bool, spanning_tree: bool,
            gauge: GaugeVector, tol: float = 1e-6) -> BehaviorVerdict:
    cls, item = classify(ls, sb, spanning_tree)
    checks = [objective_check(cls, traj, ls, sb, gauge, tol), verify_sync_errors(traj, tol)]
    return BehaviorVerdict(cls, item, checks)
