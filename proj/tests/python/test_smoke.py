import numpy as np
import pytest

import cglsal


def scene(size=48):
    lo, hi = size * 3 // 10, size * 7 // 10
    rgb = np.full((size, size, 3), 0.2, np.float32)
    t = np.full((size, size), 0.2, np.float32)
    rgb[lo:hi, lo:hi] = (0.9, 0.7, 0.2)
    t[lo:hi, lo:hi] = 0.9
    gt = np.zeros((size, size), np.float32)
    gt[lo:hi, lo:hi] = 1
    return cglsal.ImagePair(rgb, t, "scene"), gt


def test_lab_matches_reference_white_and_black():
    assert cglsal.srgb_to_lab(1, 1, 1) == pytest.approx((100, -0.00245, 0.00465), abs=1e-4)
    lab = cglsal.rgb_to_lab(np.zeros((2, 2, 3), np.float32))
    assert lab.shape == (2, 2, 3)
    assert lab[..., 0] == pytest.approx(0)
    assert lab[..., 1] == pytest.approx(128 / 255)


def test_pair_validation():
    with pytest.raises(cglsal.CglError, match="Channel"):
        cglsal.ImagePair(np.zeros((4, 4), np.float32), np.zeros((4, 4), np.float32))
    with pytest.raises(cglsal.CglError, match="DimensionMismatch"):
        cglsal.ImagePair(np.zeros((4, 4, 3), np.float32), np.zeros((4, 5), np.float32))


def test_slic_and_adjacency():
    pair, _ = scene(64)
    sp = cglsal.slic_segment(pair, n_target=16)
    assert sp.labels.shape == (64, 64)
    assert sp.n == sp.labels.max() + 1
    assert sum(sp.sizes) == 64 * 64
    adj = cglsal.adjacency(sp)
    dense = adj.dense()
    assert (dense == dense.T).all() and not dense.diagonal().any()
    assert adj.edge_count() == len(adj.edges())


def test_solver_step_properties():
    rng = np.random.default_rng(0)
    n = 8
    adj = cglsal.Adjacency(n)
    for i in range(n - 1):
        adj.connect(i, i + 1)
    A = cglsal.build_affinity(rng.uniform(size=(n, 3)), adj, 5.0)
    stack = cglsal.make_stack(1, 1, [A])
    y = np.zeros(n)
    y[0] = 1
    params = cglsal.SolverParams()
    state = cglsal.solve(stack, y, params)
    assert state.converged
    assert state.alpha.sum() == pytest.approx(1)
    G = state.graph()
    assert (G >= 0).all() and (np.diag(G) == 0).all()
    F = np.diag(G.sum(1)) - G
    residual = (params.lambda1 * F + np.eye(n)) @ state.s - y
    assert np.abs(residual).max() < 1e-10
    assert state.trace_csv().startswith("iter,objective,max_delta")


def test_detect_and_metrics():
    pair, gt = scene()
    det = cglsal.detect(pair, cglsal.Config())
    sal = det.saliency
    assert sal.shape == gt.shape
    assert sal.min() == pytest.approx(0) and sal.max() == pytest.approx(1)
    precision, recall = cglsal.pr_curve(sal, gt)
    assert precision.shape == (256,) and recall[0] == 1
    p, r, f = cglsal.adaptive_prf(gt, gt)
    assert (p, r, f) == pytest.approx((1, 1, 1))
    assert cglsal.f_measure(0.5, 0.5) == pytest.approx(0.5)


def test_fixed_graph_detect():
    pair, _ = scene()
    cfg = cglsal.Config()
    cfg.fixed_graph = True
    det = cglsal.detect(pair, cfg)
    assert det.foreground_state is None
    assert det.values.max() == pytest.approx(1)


def test_config_round_trip():
    cfg = cglsal.Config()
    cfg.theta = 1e-5
    cfg.set("modalities", "t")
    text = cglsal.format_config(cfg)
    assert cglsal.parse_config(text) == cfg
    assert "theta" in cglsal.config_keys()
    with pytest.raises(cglsal.CglError, match="InvalidArgument"):
        cfg.set("no_such_key", "1")


def test_tensor_file_format_and_naming(tmp_path):
    path = cglsal.tensor_path(str(tmp_path), "img01", "rgb", "conv1")
    assert path.name == "img01.rgb.conv1.tens"
    assert cglsal.tensor_path("/f", "a", "t", "conv5").as_posix() == "/f/a.t.conv5.tens"
    data = np.arange(2 * 3 * 4, dtype=np.float32).reshape(2, 3, 4) / 7
    raw = cglsal.encode_tensor(data)
    assert raw[:8] == b"CGLTENS1"
    assert np.frombuffer(raw[8:20], "<u4").tolist() == [2, 3, 4]
    assert raw[20] == 1
    assert np.array_equal(np.frombuffer(raw[21:], "<f4").reshape(2, 3, 4), data)
    cglsal.write_tensor(path, data)
    assert path.read_bytes() == raw
    assert np.array_equal(cglsal.read_tensor(path), data)
    with pytest.raises(cglsal.CglError, match="Format"):
        cglsal.decode_tensor(b"XGLTENS1" + raw[8:])
