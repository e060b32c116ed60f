import numpy as np
import pytest

from signedcon.fixtures import G0, G1, G2, G3, G4, X0_FIVE, X0_NINE
from signedcon.graph import RandomGraphParams, SignedDigraph


def reach_matrix(g: SignedDigraph) -> np.ndarray:
    """Transitive closure by repeated boolean squaring (independent of BFS/Tarjan)."""
    R = np.eye(g.n, dtype=bool)
    for e in g.edges:
        R[e.tail - 1, e.head - 1] = True
    for _ in range(g.n.bit_length() + 1):
        R = R | ((R.astype(int) @ R.astype(int)) > 0)
    return R


def random_params(seed: int) -> tuple[RandomGraphParams, int]:
    """Mixed leader configurations: l1 in 0..3, l2SB and l2SUB in 0..2, N <= 25."""
    rng = np.random.default_rng(10_000 + seed)
    l1 = int(rng.integers(0, 4))
    l2sb = int(rng.integers(0, 3))
    l2sub = int(rng.integers(0, 3))
    if l1 + l2sb + l2sub == 0:
        l1 = 1
    size = int(rng.integers(3, 5))
    force_sb = l2sub == 0 and bool(rng.random() < 0.5)
    k = l1 + size * (l2sb + l2sub)
    n = min(25, k + int(rng.integers(1, 8)))
    if k >= n:
        l2sub = 0
        k = l1 + size * l2sb
        n = k + 1
    return RandomGraphParams(n, l1, l2sb, l2sub, size, 0.3, 0.3, force_sb), seed


SUB_CYCLE = SignedDigraph.from_edges(3, [(1, 2, 1), (2, 3, 1), (3, 1, -1)])
SB_CYCLE = SignedDigraph.from_edges(3, [(1, 2, 1), (2, 3, 1), (3, 1, 1)])


@pytest.fixture(params=["g1", "g2", "g3", "g4"])
def example_case(request):
    graphs = {"g1": (G1, X0_FIVE), "g2": (G2, X0_NINE), "g3": (G3, X0_NINE), "g4": (G4, X0_NINE)}
    return request.param, *graphs[request.param]


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def report_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
