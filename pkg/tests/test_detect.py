import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adaptive_planner.detect import (
    AltitudeAnchor,
    Detection,
    DetectionSet,
    DetectorProfile,
    build_detection_set,
    certainty_measures,
    confidence_threshold_filter,
    default_profile,
    iou,
    noiseless_profile,
    synthetic_detect,
)
from adaptive_planner.detect.calibration import TARGET_F1, image_f1, image_trials
from adaptive_planner.evaluation.experiments import certainty_samples
from adaptive_planner.evaluation.metrics import welch_t
from adaptive_planner.geo import CameraModel, Pose, pixels_to_world

from certainty_oracle import constructed_sets, expected_measures

BOX = (10.0, 10.0, 20.0, 20.0)


def det(box=BOX, conf=0.8, scores=(3.0, 0.0), label=0):
    return Detection(box, scores, conf, label)


def shifted(box, du):
    return (box[0] + du, box[1], box[2] + du, box[3])


# -- iou -------------------------------------------------------------------------


def test_iou_examples():
    assert iou(BOX, BOX) == 1.0
    assert iou(BOX, (30, 30, 40, 40)) == 0.0
    assert iou((0, 0, 1, 1), (0.5, 0, 1.5, 1)) == pytest.approx(0.5 / 1.5)


def test_touching_boxes_do_not_overlap():
    assert iou((0, 0, 1, 1), (1, 0, 2, 1)) == 0.0


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_iou_symmetric_and_bounded(du, dv):
    other = (10 + du, 10 + dv, 22 + du, 19 + dv)
    a, b = iou(BOX, other), iou(other, BOX)
    assert a == pytest.approx(b)
    assert 0.0 <= a <= 1.0


# -- detection sets ----------------------------------------------------------------


def test_detection_rejects_bad_box_and_confidence():
    with pytest.raises(ValueError):
        det(box=(5, 5, 5, 9))
    with pytest.raises(ValueError):
        det(conf=1.2)


def test_every_run_with_a_copy_contributes():
    ref = det()
    s = build_detection_set(ref, [[det()] for _ in range(20)])
    assert len(s.members) == 20 and s.n_runs == 20


def test_no_overlap_no_members():
    s = build_detection_set(det(), [[det(box=(100, 100, 110, 110))] for _ in range(20)])
    assert s.members == []


def test_iou_threshold_filters_members():
    # a 10 px box shifted by d along u has IoU (10 - d) / (10 + d)
    hi = 10 * (1 - 0.6) / (1 + 0.6)  # IoU 0.6
    lo = 10 * (1 - 0.4) / (1 + 0.4)  # IoU 0.4
    runs = [[det(box=shifted(BOX, hi))] for _ in range(10)] + [[det(box=shifted(BOX, lo))] for _ in range(10)]
    s = build_detection_set(det(), runs)
    assert len(s.members) == 10
    assert all(v == pytest.approx(0.6) for v in s.ious)


def test_iou_exactly_half_is_not_a_member():
    d = 10 / 3  # IoU (10 - d) / (10 + d) = 0.5
    s = build_detection_set(det(), [[det(box=shifted(BOX, d))]])
    assert s.members == []


def test_best_overlap_per_run_is_chosen():
    near, far = det(box=shifted(BOX, 0.5)), det(box=shifted(BOX, 2.0))
    s = build_detection_set(det(), [[far, near]])
    assert s.members == [near]


def test_matching_ignores_class():
    runs = [[det(label=1, scores=(0.0, 3.0))], [det(label=0)]]
    s = build_detection_set(det(label=0), runs)
    assert len(s.members) == 2


def test_set_needs_a_run():
    with pytest.raises(ValueError):
        build_detection_set(det(), [])


def test_set_cannot_exceed_runs():
    with pytest.raises(ValueError):
        DetectionSet(det(), [det(), det()], n_runs=1)


# -- certainty measures ------------------------------------------------------------


def test_empty_set_measures_are_zero():
    v = certainty_measures(DetectionSet(det(conf=0.3), [], 20), 2)
    assert (v.occurrence, v.avg_yolo, v.location, v.combined) == (0.0, 0.0, 0.0, 0.0)
    assert v.yolo == 0.3


def test_half_occurrence_single_class():
    members = [det(scores=(1.0,)) for _ in range(10)]
    v = certainty_measures(DetectionSet(det(scores=(1.0,)), members, 20), 1)
    assert v.occurrence == 0.5
    assert v.avg_yolo == pytest.approx(0.8)
    assert v.location == 1.0
    assert v.class_certainty == 1.0
    assert v.combined == pytest.approx(0.5)


def test_uniform_class_probabilities_give_half():
    members = [det(scores=(0.0, 0.0)) for _ in range(5)]
    v = certainty_measures(DetectionSet(det(), members, 20), 2)
    assert v.class_certainty == pytest.approx(0.5)


def test_class_certainty_is_literal_entropy_softmax():
    # one member with class probabilities (0.9, 0.1): per-class terms
    # -0.9 ln 0.9 and -0.1 ln 0.1, then a softmax over the two
    scores = (math.log(0.9), math.log(0.1))
    v = certainty_measures(DetectionSet(det(), [det(scores=scores)], 20), 2)
    e = [-0.9 * math.log(0.9), -0.1 * math.log(0.1)]
    expected = math.exp(e[1]) / (math.exp(e[0]) + math.exp(e[1]))
    assert v.class_certainty == pytest.approx(expected, abs=1e-12)


def test_class_count_must_match_scores():
    with pytest.raises(ValueError):
        certainty_measures(DetectionSet(det(), [det(scores=(1.0, 2.0, 3.0))], 20), 2)


def test_measures_match_independent_oracle():
    rng = np.random.default_rng(7)
    for ref_box, ref_conf, members, n_runs, k in constructed_sets(rng):
        dets = [Detection(b, s, c, int(np.argmax(s))) for b, c, s in members]
        ref = Detection(ref_box, (0.0,) * k, ref_conf, 0)
        got = certainty_measures(DetectionSet(ref, dets, n_runs), k).as_dict()
        want = expected_measures(ref_conf, ref_box, members, n_runs, k)
        for name, value in want.items():
            assert got[name] == pytest.approx(value, abs=1e-12), name


@given(st.integers(1, 20), st.data())
def test_combined_is_product_and_bounded(n_runs, data):
    k = data.draw(st.integers(0, n_runs))
    shifts = data.draw(st.lists(st.floats(0, 3), min_size=k, max_size=k))
    members = [det(box=shifted(BOX, d), scores=(1.0, 0.5)) for d in shifts]
    v = certainty_measures(DetectionSet(det(), members, n_runs), 2)
    assert v.occurrence == k / n_runs
    assert v.combined == pytest.approx(v.occurrence * v.location * v.class_certainty, abs=1e-12)
    assert v.combined <= min(v.occurrence, v.location, v.class_certainty) + 1e-12


# -- threshold filter ----------------------------------------------------------------


def test_threshold_filter_examples():
    dets = [det(conf=c) for c in (0.04, 0.05, 0.6, 1.0)]
    assert confidence_threshold_filter(dets, 0.0) == dets
    assert [d.confidence for d in confidence_threshold_filter(dets, 1.0)] == [1.0]
    assert [d.confidence for d in confidence_threshold_filter(dets, 0.05)] == [0.05, 0.6, 1.0]
    with pytest.raises(ValueError):
        confidence_threshold_filter(dets, 1.5)


# -- synthetic detector --------------------------------------------------------------


def _objects_in_view(pose, camera, n, seed=0):
    rng = np.random.default_rng(seed)
    px = rng.uniform((50, 50), (camera.image_width - 50, camera.image_height - 50), (n, 2))
    locs = pixels_to_world(px, pose, camera)
    return locs, np.arange(n) % 2


def test_noiseless_detector_is_exact():
    camera = CameraModel()
    pose = Pose(10.0, 20.0, 12.0, 0.4)
    locs, classes = _objects_in_view(pose, camera, 15)
    outside = np.array([[500.0, 500.0]])
    image = synthetic_detect(
        (np.vstack((locs, outside)), np.append(classes, 0)), pose, camera, noiseless_profile(), np.random.default_rng(0)
    )
    assert len(image.references) == 15
    assert sorted(image.sources) == list(range(15))
    centers = pixels_to_world(np.array([d.center for d in image.references]), pose, camera)
    for d, src, c in zip(image.references, image.sources, centers):
        assert d.confidence == 1.0 and d.class_label == classes[src]
        # clipping at the box edge can move the center by at most half a pixel
        assert np.hypot(*(c - locs[src])) < 1e-3


def test_synthetic_detect_is_reproducible(profile):
    camera = CameraModel()
    pose = Pose(0.0, 0.0, 24.0, 1.0)
    objs = _objects_in_view(pose, camera, 30)
    a = synthetic_detect(objs, pose, camera, profile, np.random.default_rng(5), mc_runs=None)
    b = synthetic_detect(objs, pose, camera, profile, np.random.default_rng(5), mc_runs=None)
    assert a.references == b.references and a.mc_runs == b.mc_runs
    assert len(a.mc_runs) == profile.mc_runs


def test_extrapolation_is_flagged(profile):
    camera = CameraModel()
    image = synthetic_detect([], Pose(0.0, 0.0, 60.0), camera, profile, np.random.default_rng(0))
    assert image.extrapolated
    image = synthetic_detect([], Pose(0.0, 0.0, 30.0), camera, profile, np.random.default_rng(0))
    assert not image.extrapolated


def test_detection_rate_follows_profile():
    camera = CameraModel()
    anchor = AltitudeAnchor(12.0, p_detect=0.7, fp_rate=0.0, tp_alpha=2, tp_beta=2, fp_alpha=1, fp_beta=1, sigma_px=0)
    prof = DetectorProfile(anchors=(anchor,))
    pose = Pose(0.0, 0.0, 12.0)
    objs = _objects_in_view(pose, camera, 200)
    hits = sum(len(synthetic_detect(objs, pose, camera, prof, np.random.default_rng(s)).references) for s in range(20))
    assert hits / 4000 == pytest.approx(0.7, abs=0.03)


def test_false_positive_rate_follows_profile():
    camera = CameraModel()
    anchor = AltitudeAnchor(12.0, p_detect=1.0, fp_rate=2.0, tp_alpha=2, tp_beta=2, fp_alpha=1, fp_beta=4, sigma_px=0)
    prof = DetectorProfile(anchors=(anchor,))
    counts = [
        len(synthetic_detect([], Pose(0.0, 0.0, 12.0), camera, prof, np.random.default_rng(s)).references)
        for s in range(2000)
    ]
    assert np.mean(counts) == pytest.approx(2.0, abs=0.1)


def test_mc_runs_favour_true_positives(profile):
    camera = CameraModel()
    pose = Pose(0.0, 0.0, 32.0)
    tp_occ, fp_occ = [], []
    for s in range(40):
        image = synthetic_detect(_objects_in_view(pose, camera, 20, s), pose, camera, profile, np.random.default_rng(s), None)
        for ref, src in zip(image.references, image.sources):
            occ = len(build_detection_set(ref, image.mc_runs).members) / len(image.mc_runs)
            (tp_occ if src >= 0 else fp_occ).append(occ)
    assert np.mean(tp_occ) > np.mean(fp_occ)


# -- profile -------------------------------------------------------------------------


def test_profile_round_trip(tmp_path, profile):
    path = tmp_path / "p.yaml"
    profile.save(path)
    assert DetectorProfile.load(path) == profile


def test_profile_interpolates_between_anchors(profile):
    a12, a24 = profile.at(12.0), profile.at(24.0)
    mid = profile.at(18.0)
    assert mid.p_detect == pytest.approx((a12.p_detect + a24.p_detect) / 2)
    assert profile.at(60.0).p_detect == profile.at(48.0).p_detect


def test_profile_rejects_unknown_keys(profile):
    data = profile.to_dict()
    data["colour"] = "green"
    with pytest.raises(ValueError):
        DetectorProfile.from_dict(data)


def test_anchor_validation():
    with pytest.raises(ValueError):
        AltitudeAnchor(12.0, p_detect=1.5, fp_rate=0, tp_alpha=1, tp_beta=1, fp_alpha=1, fp_beta=1, sigma_px=0)
    with pytest.raises(ValueError):
        DetectorProfile(anchors=())


def test_detection_probability_non_increasing_with_altitude(profile):
    p = [profile.at(h).p_detect for h in np.linspace(12, 48, 73)]
    assert all(b <= a + 1e-12 for a, b in zip(p, p[1:]))


def test_image_f1_non_increasing_with_altitude(profile):
    values = [image_f1(profile, h, 1500, seed=3) for h in (12.0, 24.0, 32.0, 48.0)]
    assert all(b <= a + 0.02 for a, b in zip(values, values[1:]))


def test_image_trials_with_noiseless_profile_are_perfect():
    tp, fp, fn = image_trials(noiseless_profile((12.0,)), 12.0, 50, seed=0)
    assert fp == 0 and fn == 0 and tp > 0


def test_calibration_targets_cover_image_anchors():
    assert set(TARGET_F1) == {12.0, 24.0, 32.0}


def test_yolo_separability_drops_with_altitude(profile):
    t = {}
    for h, n_images in ((12.0, 7000), (32.0, 1000)):
        tp, fp = certainty_samples(profile, h, n_images, seed=1)
        assert len(tp["yolo"]) + len(fp["yolo"]) >= 5000
        t[h] = welch_t(tp["yolo"], fp["yolo"])
    assert t[12.0] > t[32.0] > 0
