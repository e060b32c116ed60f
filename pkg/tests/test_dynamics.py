import math
import warnings

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from signedcon.dynamics import (ConfigError, SimulationConfig, decay_slope, edge_average, edge_field, expm,
                                expm_edge_oracle, integrate, node_field, predict_edge_limit, simulate,
                                sync_error)
from signedcon.fixtures import G1, G2, G3, G4, X0_FIVE, X0_NINE
from signedcon.graph import RandomGraphParams, SignedDigraph, random_leader_graph
from signedcon.incidence import incidence_set
from signedcon.lyapunov import solve_P
from signedcon.spectral import zero_eigenstructure


def _prep(g):
    inc = incidence_set(g)
    Le = inc.Le.astype(float)
    return inc, zero_eigenstructure(Le, inc.Es.astype(float))


class TestFields:
    def test_single_cooperative_edge(self):
        inc = incidence_set(SignedDigraph.from_edges(2, [(1, 2, 1)]))
        assert node_field(inc.Ls.astype(float), 1.0, np.array([1.0, 0.0])).tolist() == [0.0, 1.0]

    def test_single_competitive_edge(self):
        inc = incidence_set(SignedDigraph.from_edges(2, [(1, 2, -1)]))
        assert node_field(inc.Ls.astype(float), 1.0, np.array([1.0, 0.0])).tolist() == [0.0, -1.0]

    def test_edge_field(self):
        assert edge_field(np.array([[1.0]]), 4.0, np.array([1.0])).tolist() == [-4.0]

    def test_dimension_errors(self):
        with pytest.raises(ValueError):
            node_field(np.eye(2), 1.0, np.zeros(3))
        with pytest.raises(ValueError):
            edge_field(np.eye(2), 1.0, np.zeros(3))


class TestSyncError:
    def test_no_zero_eigenvalue(self):
        z = zero_eigenstructure(np.array([[1.0]]))
        assert sync_error(np.array([3.0]), z).tolist() == [3.0]

    def test_kernel_vector_has_no_error(self):
        inc, z = _prep(G2)
        v = z.Vr[:, 0]
        assert np.max(np.abs(sync_error(v, z))) < 1e-12
        assert np.max(np.abs(edge_average(v, z) - v)) < 1e-12

    def test_shape_error(self):
        _, z = _prep(G1)
        with pytest.raises(ValueError):
            sync_error(np.zeros(4), z)


class TestIntegrator:
    def test_exponential(self):
        t, y = integrate(lambda y: -y, np.array([1.0]), 1.0, 1e-3)
        assert abs(y[-1, 0] - math.exp(-1.0)) < 1e-9
        assert len(t) == 1001

    def test_record_every(self):
        t, y = integrate(lambda y: -y, np.array([1.0]), 1.0, 1e-3, record_every=300)
        assert t.tolist() == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0])

    def test_fourth_order(self):
        inc, _ = _prep(G3)
        Ls = inc.Ls.astype(float)
        x0 = np.array(X0_NINE)
        finals = [integrate(lambda x: node_field(Ls, 4.0, x), x0, 2.0, dt)[1][-1]
                  for dt in (0.04, 0.02, 0.01, 0.005)]
        diffs = [np.max(np.abs(finals[i + 1] - finals[i])) for i in range(3)]
        assert diffs[1] / diffs[0] <= 1 / 16 * 1.05
        assert diffs[2] / diffs[1] <= 1 / 16 * 1.05


class TestConfig:
    def test_not_whole_steps(self):
        with pytest.raises(ConfigError):
            SimulationConfig([0.0], t_final=1.0, dt=0.3).n_steps

    def test_invalid(self):
        with pytest.raises(ConfigError):
            SimulationConfig([0.0], k1=0)
        with pytest.raises(ConfigError):
            SimulationConfig([np.nan])
        with pytest.raises(ConfigError):
            SimulationConfig([0.0], record_every=0)

    def test_stability_warning(self):
        cfg = SimulationConfig([0.0], k1=4.0, t_final=1.0, dt=1.0)
        with pytest.warns(RuntimeWarning):
            assert not cfg.check_stability(np.array([[1.0]]))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert SimulationConfig([0.0]).check_stability(np.array([[1.0]]))

    def test_x0_length(self):
        inc, z = _prep(G1)
        with pytest.raises(ConfigError):
            simulate(inc, z, SimulationConfig([1.0, 2.0]))


class TestSimulation:
    def test_g1_consensus_on_leader(self):
        inc, z = _prep(G1)
        traj = simulate(inc, z, SimulationConfig(X0_FIVE))
        assert traj.diagnostics["ebar_final_norm"] <= 1e-6
        assert np.all(traj.X[:, 4] == 5.5)
        # the unbalanced merge at node 4 forces it to zero; the rest settle at +-5.5
        assert np.allclose(traj.x_final, [5.5, -5.5, 5.5, 0.0, 5.5], atol=1e-6)
        assert traj.diagnostics["limit_error"] < 1e-6
        assert traj.diagnostics["node_edge_consistency"] < 1e-10

    @pytest.mark.parametrize("g", [G2, G3, G4], ids=["g2", "g3", "g4"])
    def test_nine_node_fixtures(self, g):
        inc, z = _prep(g)
        traj = simulate(inc, z, SimulationConfig(X0_NINE))
        assert traj.diagnostics["ebar_final_norm"] <= 1e-6
        assert np.max(np.abs(traj.e_final)) > 1e-3
        assert traj.diagnostics["limit_error"] <= 1e-6
        assert traj.diagnostics["edge_average_drift"] <= 1e-8

    def test_balanced_spanning_tree_edges_vanish(self):
        g = random_leader_graph(RandomGraphParams(n=10, l1=0, l2sb=1, force_sb=True), 4)
        inc, z = _prep(g)
        x0 = np.linspace(-3, 3, g.n)
        assert np.max(np.abs(predict_edge_limit(z, inc.Es, x0))) < 1e-9
        traj = simulate(inc, z, SimulationConfig(x0, t_final=20.0))
        assert np.max(np.abs(traj.e_final)) < 1e-6

    def test_unbalanced_leaders_drive_states_to_zero(self):
        g = random_leader_graph(RandomGraphParams(n=12, l1=0, l2sb=0, l2sub=2), 2)
        inc, z = _prep(g)
        traj = simulate(inc, z, SimulationConfig(np.linspace(-5, 5, g.n), t_final=30.0))
        assert np.max(np.abs(traj.x_final)) < 1e-6

    def test_V_column(self):
        inc, z = _prep(G3)
        cert = solve_P(inc.Le.astype(float), z)
        traj = simulate(inc, z, SimulationConfig(X0_NINE, t_final=1.0), cert)
        assert traj.V.shape == traj.times.shape
        assert np.all(np.diff(traj.V) <= 0)

    def test_decay_slope_exponential(self):
        inc, z = _prep(G1)
        traj = simulate(inc, z, SimulationConfig(X0_FIVE))
        s = decay_slope(traj)
        eig = np.linalg.eigvals(inc.Le.astype(float))
        slowest = np.min(eig.real[np.abs(eig) > 1e-9])
        # the slow eigenvalue is repeated, so polynomial factors flatten the fit slightly
        assert -4.0 * slowest * 1.02 <= s <= -4.0 * slowest * 0.85


class TestExpm:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.floats(0.01, 40.0))
    def test_against_scipy(self, seed, scale):
        A = np.random.default_rng(seed).normal(size=(5, 5))
        A *= scale / np.linalg.norm(A, 1)
        ref = scipy.linalg.expm(A)
        assert np.max(np.abs(expm(A) - ref)) <= 1e-10 * max(1.0, np.max(np.abs(ref)))

    def test_empty(self):
        assert expm(np.zeros((0, 0))).shape == (0, 0)

    def test_g3_rk4_against_exponential(self):
        inc, z = _prep(G3)
        x0 = np.array(X0_NINE)
        traj = simulate(inc, z, SimulationConfig(x0, t_final=5.0))
        ref = expm_edge_oracle(inc.Le, 4.0, 5.0, inc.Es.T @ x0)
        assert np.max(np.abs(traj.e_final - ref)) <= 1e-7


class TestCsv:
    def test_header_and_format(self):
        inc, z = _prep(G1)
        cert = solve_P(inc.Le.astype(float), z)
        traj = simulate(inc, z, SimulationConfig(X0_FIVE, t_final=0.05, record_every=10), cert)
        lines = traj.to_csv().splitlines()
        header = lines[0].split(",")
        assert header[:6] == ["t", "x1", "x2", "x3", "x4", "x5"]
        assert header[6:11] == [f"e{k}" for k in range(1, 6)]
        assert header[11] == "ebar1" and header[16] == "em1" and header[-1] == "V"
        assert len(lines) == 1 + 6
        assert lines[1].split(",")[0] == "0"
        assert all(len(l.split(",")) == len(header) for l in lines[1:])
