"""Smoke tests for the python module; the C++ suites carry the real load."""

import math

import pytest

import posekit


def grid_pose(cx, cy, spread=40.0, conf=1.0):
    joints = []
    for j in range(16):
        x = cx + spread * (j % 4 - 1.5) / 1.5
        y = cy + spread * (j // 4 - 1.5) / 1.5
        joints.append(posekit.Joint(x, y, conf, True))
    return posekit.Pose(joints, conf)


def test_box_ops():
    box = posekit.BBox(0, 0, 10, 10)
    grown = posekit.extend_box(box, 0.3)
    assert grown.x_min == pytest.approx(-1.5)
    assert grown.y_max == pytest.approx(11.5)

    gt = posekit.BBox(0, 0, 10, 20)
    det = posekit.BBox(1, 2, 11, 22)
    off = posekit.box_offset(det, gt)
    assert list(off.d) == pytest.approx([0.1, 0.1, 0.1, 0.1])
    back = posekit.apply_offset(gt, off)
    assert back.x_min == pytest.approx(1.0)
    assert posekit.iou(box, box) == pytest.approx(1.0)


def test_sdtn_round_trip_and_gradients():
    m = posekit.AffineMap(posekit.Mat2(1.5, 0.2, -0.3, 0.9), 0.4, -0.1)
    x, y = posekit.stn_apply(m, 0.25, -0.5)
    inv = posekit.sdtn_invert(m)
    bx, by = posekit.sdtn_apply(inv, x, y)
    assert bx == pytest.approx(0.25, abs=1e-12)
    assert by == pytest.approx(-0.5, abs=1e-12)

    max_err, ok = posekit.sdtn_gradcheck(trials=50, tol=1e-5, seed=3)
    assert ok and max_err <= 1e-5

    with pytest.raises(posekit.PosekitError):
        posekit.sdtn_invert(posekit.AffineMap(posekit.Mat2(1, 2, 2, 4)))


def test_nms_removes_duplicates():
    pose_a = grid_pose(200, 200, conf=0.9)
    pose_b = grid_pose(200, 200, conf=0.8)
    box = posekit.BBox(140, 140, 260, 260)
    props = [
        posekit.PoseProposal("img", box, pose_b),
        posekit.PoseProposal("img", box, pose_a),
    ]
    params = posekit.NmsParams(sigma1=0.1, sigma2=10.0, lambda_=1.0, eta=2.0)
    out = posekit.run_nms(props, params)
    assert len(out) == 1
    assert out[0].pose.score == pytest.approx(0.9)

    d = posekit.pose_distance(props[1], props[0], params)
    assert d >= params.eta


def test_eval_perfect_predictions():
    pose = grid_pose(200, 200)
    box = posekit.BBox(140, 140, 260, 260)
    gts = [posekit.ImageAnnotation("img", 640, 480,
                                   [posekit.GtInstance(pose, box, 30.0)])]
    preds = [posekit.PoseProposal("img", box, pose)]
    report = posekit.evaluate(preds, gts)
    assert report.map == pytest.approx(1.0)


def test_synth_fit_sample_cycle(tmp_path):
    cfg = posekit.SynthConfig()
    cfg.image_count = 40
    cfg.duplicate_rate = 1.0
    cfg.seed = 11
    data = posekit.generate(cfg)
    assert len(data.gts) == 40
    assert len(data.proposals) >= 40

    pg = posekit.PgpgConfig()
    pg.k = 3
    pg.components = 2
    pg.seed = 7
    model = posekit.fit_model(data.gts, data.proposals, pg,
                              posekit.JointSchema.mpii16())
    assert model.k == 3

    inst = data.gts[0].gt_poses[0]
    boxes = posekit.sample_proposals(inst.pose, inst.box, model, 5, 13)
    again = posekit.sample_proposals(inst.pose, inst.box, model, 5, 13)
    assert len(boxes) == 5
    for a, b in zip(boxes, again):
        assert a.x_min == b.x_min and a.y_max == b.y_max
        assert posekit.iou(a, inst.box) >= 0.3

    path = str(tmp_path / "props.json")
    posekit.save_proposals(path, data.proposals, posekit.JointSchema.mpii16())
    loaded, schema = posekit.load_proposals(path)
    assert len(loaded) == len(data.proposals)
    assert schema.size() == 16


def test_optimizer_improves_over_disabled():
    cfg = posekit.SynthConfig()
    cfg.image_count = 40
    cfg.duplicate_rate = 1.5
    cfg.joint_noise = 2.5
    cfg.seed = 23
    data = posekit.generate(cfg)

    baseline = posekit.disable_nms_baseline(data.proposals, data.gts)
    ocfg = posekit.OptimConfig()
    ocfg.grid_sigma1 = ocfg.grid_sigma2 = 4
    ocfg.grid_lambda = ocfg.grid_eta = 4
    ocfg.max_rounds = 2
    ocfg.threads = 2
    result = posekit.optimize_params(data.proposals, data.gts, ocfg)
    assert result.map >= baseline
    assert result.trace == sorted(result.trace)


def test_alignment_invariance():
    pose = grid_pose(300, 240)
    schema = posekit.JointSchema.mpii16()
    ref = posekit.align_pose(pose, schema)
    moved = grid_pose(300, 240)
    for j in moved.joints:
        j.x = j.x * 3.0 + 500.0
        j.y = j.y * 3.0 - 120.0
    out = posekit.align_pose(moved, schema)
    assert max(abs(a - b) for a, b in zip(ref.coords, out.coords)) <= 1e-9
