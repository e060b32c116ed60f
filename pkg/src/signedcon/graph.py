"""Signed digraph model, connectivity, leader groups and structural balance."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graph documents or infeasible generator requests."""


class AssumptionError(ValueError):
    """The graph has neither a directed spanning tree nor a valid multi-leader structure."""


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    sign: int


@dataclass(frozen=True)
class SignedDigraph:
    """Node count plus an ordered tuple of signed directed edges (1-based nodes).

    The k-th edge defines column k of every incidence matrix.
    """

    n: int
    edges: tuple[Edge, ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]]) -> "SignedDigraph":
        return cls(int(n), tuple(Edge(int(t), int(h), int(s)) for t, h, s in edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    def out_neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n + 1)]
        for e in self.edges:
            adj[e.tail].append(e.head)
        return adj

    def in_degree(self) -> list[int]:
        deg = [0] * (self.n + 1)
        for e in self.edges:
            deg[e.head] += 1
        return deg

    def induced(self, nodes: Iterable[int]) -> tuple["SignedDigraph", list[int]]:
        """Induced subgraph relabelled 1..k, plus the original labels in order."""
        labels = sorted(set(nodes))
        pos = {v: i + 1 for i, v in enumerate(labels)}
        sub = [(pos[e.tail], pos[e.head], e.sign) for e in self.edges
               if e.tail in pos and e.head in pos]
        return SignedDigraph.from_edges(len(labels), sub), labels

    def to_dict(self) -> dict:
        return {"n": self.n,
                "edges": [{"from": e.tail, "to": e.head, "sign": e.sign} for e in self.edges]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations)}


def validate(g: SignedDigraph) -> ValidationReport:
    violations = []
    if g.n < 1:
        violations.append(f"node count must be positive, got {g.n}")
    seen: dict[tuple[int, int], int] = {}
    for k, e in enumerate(g.edges, start=1):
        if not (1 <= e.tail <= g.n and 1 <= e.head <= g.n):
            violations.append(f"edge e{k} ({e.tail},{e.head}) references a node outside 1..{g.n}")
        if e.tail == e.head:
            violations.append(f"self-loop at node {e.tail} (edge e{k})")
        if e.sign not in (1, -1):
            violations.append(f"edge e{k} ({e.tail},{e.head}) has sign {e.sign}, expected +1 or -1")
        key = (e.tail, e.head)
        if key in seen:
            violations.append(f"duplicate edge ({e.tail},{e.head}) at e{seen[key]} and e{k}")
            continue
        seen[key] = k
    for (t, h), k in seen.items():
        if t < h and (h, t) in seen:
            s1 = g.edges[k - 1].sign
            s2 = g.edges[seen[(h, t)] - 1].sign
            if s1 != s2:
                violations.append(f"digon sign asymmetry at ({t},{h})/({h},{t})")
    return ValidationReport(not violations, violations)


def parse_graph(text: str) -> SignedDigraph:
    """Parse a graph JSON document; raises GraphError carrying the validation report."""
    try:
        doc = json.loads(text)
        n = doc["n"]
        edges = [(e["from"], e["to"], e["sign"]) for e in doc["edges"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph document: {exc}") from exc
    if not isinstance(n, int) or not all(isinstance(v, int) for e in edges for v in e):
        raise GraphError("malformed graph document: n and edge fields must be integers")
    g = SignedDigraph.from_edges(n, edges)
    report = validate(g)
    if not report.ok:
        err = GraphError("; ".join(report.violations))
        err.report = report
        raise err
    return g


def load_graph(path) -> SignedDigraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


# ---------------------------------------------------------------------------
# connectivity

@dataclass(frozen=True)
class Condensation:
    components: list[frozenset[int]]
    component_of: dict[int, int]
    dag_edges: frozenset[tuple[int, int]]

    def sources(self) -> list[int]:
        has_in = {b for _, b in self.dag_edges}
        return [c for c in range(len(self.components)) if c not in has_in]


def strongly_connected_components(g: SignedDigraph) -> Condensation:
    """Iterative Tarjan. Components are ordered by their smallest node."""
    adj = g.out_neighbors()
    index = [0] * (g.n + 1)
    low = [0] * (g.n + 1)
    on_stack = [False] * (g.n + 1)
    visited = [False] * (g.n + 1)
    stack: list[int] = []
    found: list[frozenset[int]] = []
    counter = 1
    for root in range(1, g.n + 1):
        if visited[root]:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                visited[v] = True
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for j in range(i, len(adj[v])):
                w = adj[v][j]
                if not visited[w]:
                    work.append((v, j + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.add(w)
                    if w == v:
                        break
                found.append(frozenset(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    found.sort(key=min)
    component_of = {v: c for c, comp in enumerate(found) for v in comp}
    dag = frozenset((component_of[e.tail], component_of[e.head]) for e in g.edges
                    if component_of[e.tail] != component_of[e.head])
    return Condensation(found, component_of, dag)


def reachable_from(g: SignedDigraph, starts: Iterable[int]) -> set[int]:
    adj = g.out_neighbors()
    seen = set(starts)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def has_directed_spanning_tree(g: SignedDigraph) -> bool:
    return len(strongly_connected_components(g).sources()) == 1


def _weak_component(g: SignedDigraph, start: int) -> set[int]:
    nbrs: list[set[int]] = [set() for _ in range(g.n + 1)]
    for e in g.edges:
        nbrs[e.tail].add(e.head)
        nbrs[e.head].add(e.tail)
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in nbrs[v] - seen:
            seen.add(w)
            queue.append(w)
    return seen


def is_weakly_connected(g: SignedDigraph) -> bool:
    return len(_weak_component(g, 1)) == g.n


# ---------------------------------------------------------------------------
# structural balance

@dataclass(frozen=True)
class GaugeVector:
    d: tuple[int, ...]

    @property
    def v1(self) -> list[int]:
        return [i + 1 for i, s in enumerate(self.d) if s == 1]

    @property
    def v2(self) -> list[int]:
        return [i + 1 for i, s in enumerate(self.d) if s == -1]

    def as_array(self) -> np.ndarray:
        return np.array(self.d, dtype=float)


def is_structurally_balanced(g: SignedDigraph, nodes: Optional[Iterable[int]] = None
                             ) -> tuple[bool, Optional[GaugeVector]]:
    """Sign-propagating BFS on the underlying undirected graph.

    The lowest-indexed node of each connected component gets d = +1. When
    ``nodes`` is given the test runs on the induced subgraph and the returned
    gauge is indexed by the sorted node set.
    """
    if nodes is not None:
        g, _ = g.induced(nodes)
    nbrs: list[list[tuple[int, int]]] = [[] for _ in range(g.n + 1)]
    for e in g.edges:
        nbrs[e.tail].append((e.head, e.sign))
        nbrs[e.head].append((e.tail, e.sign))
    d = [0] * (g.n + 1)
    for start in range(1, g.n + 1):
        if d[start]:
            continue
        d[start] = 1
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w, s in nbrs[v]:
                want = d[v] * s
                if d[w] == 0:
                    d[w] = want
                    queue.append(w)
                elif d[w] != want:
                    return False, None
    return True, GaugeVector(tuple(d[1:]))


# ---------------------------------------------------------------------------
# leader groups

class GroupKind(str, Enum):
    ROOT = "Root"
    SCC_SB = "SccSB"
    SCC_SUB = "SccSUB"


@dataclass(frozen=True)
class LeaderGroup:
    kind: GroupKind
    members: frozenset[int]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "members": sorted(self.members)}


@dataclass(frozen=True)
class LeaderStructure:
    groups: tuple[LeaderGroup, ...]
    n: int

    def _count(self, kind: GroupKind) -> int:
        return sum(1 for grp in self.groups if grp.kind is kind)

    @property
    def l1(self) -> int:
        return self._count(GroupKind.ROOT)

    @property
    def l2sb(self) -> int:
        return self._count(GroupKind.SCC_SB)

    @property
    def l2sub(self) -> int:
        return self._count(GroupKind.SCC_SUB)

    @property
    def m(self) -> int:
        return len(self.groups)

    @property
    def leaders(self) -> list[int]:
        return sorted(v for grp in self.groups for v in grp.members)

    @property
    def followers(self) -> list[int]:
        lead = set(self.leaders)
        return [v for v in range(1, self.n + 1) if v not in lead]

    def to_dict(self) -> dict:
        return {"groups": [grp.to_dict() for grp in self.groups],
                "l1": self.l1, "l2sb": self.l2sb, "l2sub": self.l2sub,
                "leaders": self.leaders, "followers": self.followers}


def leader_groups(g: SignedDigraph) -> LeaderStructure:
    cond = strongly_connected_components(g)
    groups = []
    for c in cond.sources():
        members = cond.components[c]
        if len(members) == 1:
            kind = GroupKind.ROOT
        else:
            sb, _ = is_structurally_balanced(g, members)
            kind = GroupKind.SCC_SB if sb else GroupKind.SCC_SUB
        groups.append(LeaderGroup(kind, members))
    return LeaderStructure(tuple(groups), g.n)


def check_multi_leader_hypothesis(g: SignedDigraph, ls: LeaderStructure) -> bool:
    """m > 1 and every follower is reachable from at least one leader."""
    if ls.m <= 1:
        return False
    return set(ls.followers) <= reachable_from(g, ls.leaders)


def every_leader_reaches_every_follower(g: SignedDigraph, ls: LeaderStructure) -> bool:
    """The strict (universal) path condition; diagnostic only."""
    followers = set(ls.followers)
    return all(followers <= reachable_from(g, [v]) for v in ls.leaders)


def applicable_assumption(g: SignedDigraph, ls: Optional[LeaderStructure] = None) -> str:
    """Return ``"spanning_tree"`` or ``"multi_leader"``; raise AssumptionError otherwise.

    The multi-leader case additionally requires the underlying undirected
    graph to be connected, without which the rank and multiplicity
    predictions do not hold.
    """
    ls = ls or leader_groups(g)
    if ls.m == 1:
        return "spanning_tree"
    if not check_multi_leader_hypothesis(g, ls):
        raise AssumptionError("graph violates the multi-leader reachability hypothesis")
    if not is_weakly_connected(g):
        raise AssumptionError("graph has several leader groups but its underlying "
                              "undirected graph is disconnected")
    return "multi_leader"


# ---------------------------------------------------------------------------
# random fixtures

@dataclass
class RandomGraphParams:
    n: int
    l1: int = 1
    l2sb: int = 0
    l2sub: int = 0
    scc_size: int = 3
    density: float = 0.3
    neg_prob: float = 0.3
    force_sb: bool = False


def random_leader_graph(params: RandomGraphParams, seed: int) -> SignedDigraph:
    """Random weakly connected signed digraph with the requested source-SCC structure.

    Leader groups are built first (roots, SB cycles, SUB cycles), followers are
    attached so that each follower has at least one in-edge from an earlier
    node, then extra forward edges are sprinkled with probability ``density``.
    Followers only ever receive edges, so leader groups stay sources.
    """
    p = params
    if min(p.l1, p.l2sb, p.l2sub) < 0 or p.n < 1:
        raise GraphError("counts must be nonnegative and n positive")
    if p.scc_size < 2 and (p.l2sb or p.l2sub):
        raise GraphError("rooted SCCs need at least 2 nodes")
    if p.l2sub and p.scc_size < 3:
        raise GraphError("SUB-rooted SCCs need at least 3 nodes (a digon is always balanced)")
    if p.force_sb and p.l2sub:
        raise GraphError("an overall balanced graph cannot contain a SUB-rooted SCC")
    m = p.l1 + p.l2sb + p.l2sub
    if m == 0:
        raise GraphError("at least one leader group is required")
    k = p.l1 + p.scc_size * (p.l2sb + p.l2sub)
    if k > p.n:
        raise GraphError(f"leader groups need {k} nodes but n = {p.n}")
    if m > 1 and k == p.n:
        raise GraphError("several leader groups need at least one follower to connect them")

    rng = np.random.default_rng(seed)
    gauge = rng.choice([1, -1], size=p.n + 1) if p.force_sb else None

    def sign_for(t: int, h: int) -> int:
        if gauge is not None:
            return int(gauge[t] * gauge[h])
        return -1 if rng.random() < p.neg_prob else 1

    edges: dict[tuple[int, int], int] = {}

    def add(t: int, h: int, s: int) -> None:
        if (h, t) in edges:
            s = edges[(h, t)]
        edges[(t, h)] = s

    nxt = 1
    group_nodes: list[list[int]] = []
    for _ in range(p.l1):
        group_nodes.append([nxt])
        nxt += 1
    for balanced in [True] * p.l2sb + [False] * p.l2sub:
        nodes = list(range(nxt, nxt + p.scc_size))
        nxt += p.scc_size
        group_nodes.append(nodes)
        cycle = list(zip(nodes, nodes[1:] + nodes[:1]))
        if gauge is not None:
            signs = [int(gauge[t] * gauge[h]) for t, h in cycle]
        else:
            signs = [sign_for(t, h) for t, h in cycle]
        # a cycle is balanced iff its sign product is +1
        prod = int(np.prod(signs))
        if balanced != (prod == 1) and gauge is None:
            signs[-1] = -signs[-1]
        for (t, h), s in zip(cycle, signs):
            add(t, h, s)
        # chords kept consistent with a local gauge so balance is unchanged
        local = {nodes[0]: 1}
        for (t, h), s in zip(cycle[:-1], signs[:-1]):
            local[h] = local[t] * s
        for t in nodes:
            for h in nodes:
                if t != h and (t, h) not in edges and rng.random() < p.density:
                    add(t, h, local[t] * local[h])
        if not balanced:
            sub_g, _ = SignedDigraph.from_edges(p.n, [(t, h, s) for (t, h), s in edges.items()]).induced(nodes)
            assert not is_structurally_balanced(sub_g)[0]

    followers = list(range(nxt, p.n + 1))
    leaders = [v for grp in group_nodes for v in grp]
    # followers in order; each gets an in-edge from a leader or earlier follower,
    # and the first few followers tie the leader groups together
    for i, f in enumerate(followers):
        pool = leaders + followers[:i]
        src = int(rng.choice(pool))
        add(src, f, sign_for(src, f))
    for grp in group_nodes:
        if followers and not any((v, f) in edges for v in grp for f in followers):
            v = int(rng.choice(grp))
            f = int(rng.choice(followers))
            add(v, f, sign_for(v, f))
    for i, f in enumerate(followers):
        for src in leaders + followers[:i]:
            if (src, f) not in edges and rng.random() < p.density * 0.5:
                add(src, f, sign_for(src, f))
    # tie every weak component to the one holding the first leader group
    while True:
        g = SignedDigraph.from_edges(p.n, [(t, h, s) for (t, h), s in edges.items()])
        main = _weak_component(g, group_nodes[0][0])
        loose = [grp for grp in group_nodes if grp[0] not in main]
        if not loose:
            break
        targets = [f for f in followers if f in main]
        v = int(rng.choice(loose[0]))
        f = int(rng.choice(targets))
        add(v, f, sign_for(v, f))

    ls = leader_groups(g)
    if (ls.l1, ls.l2sb, ls.l2sub) != (p.l1, p.l2sb, p.l2sub):
        raise GraphError("generator failed to realise the requested leader structure")
    if p.force_sb and not is_structurally_balanced(g)[0]:
        raise GraphError("generator failed to realise a balanced graph")
    if not is_weakly_connected(g):
        raise GraphError("generator produced a disconnected graph")
    return g
