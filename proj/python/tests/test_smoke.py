import math

import numpy as np
import pytest

import actpgo


def test_exp_log_roundtrip():
    xi = np.array([0.3, -0.2, 0.1, 1.0, 2.0, -0.5])
    T = actpgo.exp(xi)
    assert T.shape == (4, 4)
    assert np.allclose(T[:3, :3].T @ T[:3, :3], np.eye(3), atol=1e-12)
    assert np.allclose(actpgo.log(T), xi, atol=1e-12)


def test_chi2_and_update():
    assert abs(actpgo.chi2_critical(6, 0.95) - 12.5916) < 1e-3
    e = np.array([0.1, 0, 0, 0, 0, 0])
    v = actpgo.covariance_update(e, 10.0)
    assert v[0] == pytest.approx(1.0)
    assert v[1] == 1e-12


def test_simulate_solve_evaluate():
    s = actpgo.generate(actpgo.object_slam_config(0.3, 1))
    g = s.graph
    assert (g.num_cameras, g.num_landmarks) == (20, 3)
    assert len(s.outlier_flags) == g.num_measurements
    truth = s.true_camera_poses()

    act = actpgo.solve(g, "act")
    lm = actpgo.solve(g, "lm")
    assert act.method == "act"
    assert act.termination in ("converged", "max_iters")
    trace = [act.initial_loss] + list(act.loss_trace)
    assert all(b <= a * (1 + 1e-9) for a, b in zip(trace, trace[1:]))
    assert actpgo.ate(act.camera_poses(), truth) < actpgo.ate(lm.camera_poses(), truth)

    m = actpgo.evaluate(s, act)
    assert m["ate"] == pytest.approx(actpgo.ate(act.camera_poses(), truth))
    assert m["correct_inliers"] <= m["true_inliers"]
    assert len(m["obj_translation"]) == 3


def test_all_methods_run():
    s = actpgo.generate({"outlier_rate": 0.1, "seed": 4})
    for method in actpgo.method_names():
        r = actpgo.solve(s.graph, method)
        assert len(r.camera_poses()) == 20
        assert math.isfinite(r.loss_trace[-1] if r.loss_trace else r.initial_loss)
    with pytest.raises(ValueError):
        actpgo.solve(s.graph, "nope")


def test_g2o_roundtrip_and_errors():
    g = actpgo.generate({"seed": 2}).graph
    text = g.to_g2o()
    assert actpgo.Graph.from_g2o(text).to_g2o() == text
    with pytest.raises(actpgo.ParseError):
        actpgo.Graph.from_g2o("VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\nBOGUS 1\n")
    with pytest.raises(ValueError):
        actpgo.generate({"num_camras": 3})


def test_bench_csv_deterministic():
    scenarios = {"dirty": actpgo.object_slam_config(0.3, 0)}
    a = actpgo.bench_csv(scenarios, ["lm", "act"], seeds=2)
    b = actpgo.bench_csv(scenarios, ["lm", "act"], seeds=2, jobs=2)
    assert a == b
    assert a.splitlines()[1].startswith("scenario,method,seeds,ate_median")
