import math
import os
from pathlib import Path

import numpy as np
import pytest

import lpvplan

SOURCE = Path(os.environ.get("LPVPLAN_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_symmetric_vehicle_matrix():
    v = lpvplan.vehicle_preset("MAX")
    m = lpvplan.lpv_matrices(v, 2.0)
    assert m.A.shape == (4, 4)
    assert m.B.shape == (4, 3)
    assert m.A[0, 1] == -1.0
    assert not m.speed_clamped
    assert lpvplan.lpv_matrices(v, 0.0).speed_clamped


def test_output_rows():
    v = lpvplan.vehicle_preset("MOBILE")
    C = lpvplan.output_matrix(v)
    assert C.shape == (6, 4)
    np.testing.assert_array_equal(C[4], [0, 0, v.l_f, 1])
    np.testing.assert_array_equal(C[5], [0, 0, -v.l_r, 1])


def test_discretize_scalar():
    Ad, Bd = lpvplan.discretize(np.array([[-2.0]]), np.array([[3.0]]), 0.25)
    assert Ad[0, 0] == pytest.approx(math.exp(-0.5), rel=1e-13)
    assert Bd[0, 0] == pytest.approx(3.0 * (1 - math.exp(-0.5)) / 2.0, rel=1e-12)


def test_qp_clipped():
    out = lpvplan.solve_qp(np.array([[2.0]]), np.array([-6.0]), np.array([[1.0]]), np.array([1.0]))
    assert out["status"] == lpvplan.SolveStatus.Optimal
    assert out["z"][0] == pytest.approx(1.0, abs=1e-7)
    assert out["kkt"] <= 1e-6


def test_graph_and_path():
    box = [[4.0, -1.0], [6.0, -1.0], [6.0, 1.0], [4.0, 1.0]]
    g = lpvplan.build_visibility_graph([box], [-10, -10, 10, 10], [0, 0, 0], [10, 0, 0], 0.2)
    for a, b, w in g.edges:
        pa, pb = np.array(g.nodes[a]), np.array(g.nodes[b])
        assert w == pytest.approx(np.linalg.norm(pa - pb), abs=1e-9)
    pts, cost = lpvplan.shortest_heading_path(g, [0, 0, 0], [10, 0, 0], 0.0, 0.0)
    assert pts[0] == pytest.approx([0, 0])
    assert pts[-1] == pytest.approx([10, 0])
    assert cost > 10.0
    with pytest.raises(lpvplan._core.InvalidQuery):
        lpvplan.build_visibility_graph([box], [-10, -10, 10, 10], [5, 0, 0], [10, 0, 0], 0.0)


def test_frenet():
    ref = lpvplan.build_reference([[0, 0], [10, 0]])
    assert ref.length == pytest.approx(10.0)
    s, e, _ = lpvplan.project_to_frenet(ref, [3.0, 0.5])
    assert s == pytest.approx(3.0)
    assert e == pytest.approx(0.5)


def test_run_fallback_scenario(tmp_path):
    r = lpvplan.run_scenario(str(SOURCE / "scenarios" / "fallback.json"), out_dir=str(tmp_path))
    assert not r.collision
    assert not r.planning_failed
    assert r.infeasible_cycles == 2
    assert r.cycles == len(r.delta_f)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["corridor.svg", "cycles.csv", "plant.csv", "steering.svg", "trajectory.svg"]
    again = lpvplan.run_scenario(str(SOURCE / "scenarios" / "fallback.json"))
    assert again.delta_f == r.delta_f
