"""Stochastic stand-in for the detection network.

True objects inside the camera view are detected independently; false
positives appear as a Poisson process over the image. Monte-Carlo dropout
passes are emulated by jittering the reference detections.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from ..geo import CameraModel, Pose, field_of_view, world_to_pixels
from .certainty import Detection
from .profile import AltitudeAnchor, DetectorProfile


class SyntheticImage(NamedTuple):
    references: list[Detection]
    mc_runs: list[list[Detection]]
    # index into the objects passed in, -1 for false positives
    sources: list[int]
    extrapolated: bool


def _beta(rng: np.random.Generator, a: float, b: float, size: int, deterministic: bool) -> np.ndarray:
    if deterministic or a == 0.0 or b == 0.0:
        return np.full(size, a / (a + b))
    return rng.beta(a, b, size)


def _class_scores(
    rng: np.random.Generator, labels: np.ndarray, peak: float, jitter: float, class_count: int
) -> np.ndarray:
    n = len(labels)
    scores = rng.normal(0.0, jitter, (n, class_count)) if jitter > 0 else np.zeros((n, class_count))
    rows = np.arange(n)
    scores[rows, labels] += peak
    # the emitted label is the arg-max class; swap so it stays so
    best = scores.argmax(axis=1)
    swap = best != labels
    if swap.any():
        r = rows[swap]
        hi = scores[r, best[swap]].copy()
        scores[r, best[swap]] = scores[r, labels[swap]]
        scores[r, labels[swap]] = hi
    return scores


def _boxes(centers: np.ndarray, sizes: np.ndarray, camera: CameraModel) -> np.ndarray:
    half = sizes / 2.0
    u0 = np.clip(centers[:, 0] - half[:, 0], 0.0, camera.image_width - 1.0)
    v0 = np.clip(centers[:, 1] - half[:, 1], 0.0, camera.image_height - 1.0)
    u1 = np.clip(centers[:, 0] + half[:, 0], u0 + 1.0, float(camera.image_width))
    v1 = np.clip(centers[:, 1] + half[:, 1], v0 + 1.0, float(camera.image_height))
    return np.column_stack((u0, v0, u1, v1))


def synthetic_detect(
    objects: Sequence[tuple[Sequence[float], int]] | tuple[np.ndarray, np.ndarray],
    pose: Pose,
    camera: CameraModel,
    profile: DetectorProfile,
    rng: np.random.Generator,
    mc_runs: int | None = 0,
) -> SyntheticImage:
    """Simulate one captured image.

    Args:
        objects: True objects as ``[(location, class), ...]`` or as a tuple of
            ``(locations (n, 2), classes (n,))`` arrays. Objects outside the
            view of ``pose`` are ignored.
        pose: Nadir pose the image is actually taken from.
        camera: Camera model.
        profile: Detector behaviour.
        rng: Random stream for this image.
        mc_runs: Number of emulated dropout passes; ``None`` uses the
            profile's setting, 0 skips them.
    """
    if isinstance(objects, tuple) and len(objects) == 2 and isinstance(objects[0], np.ndarray):
        locations, classes = objects
    else:
        locations = np.array([o[0] for o in objects], dtype=float).reshape(-1, 2)
        classes = np.array([o[1] for o in objects], dtype=int)
    locations = np.asarray(locations, dtype=float).reshape(-1, 2)
    classes = np.asarray(classes, dtype=int)

    anchor: AltitudeAnchor = profile.at(pose.altitude)
    extrapolated = not profile.in_range(pose.altitude)
    det = profile.deterministic
    K = profile.class_count
    fov_w, _ = field_of_view(camera, pose.altitude)
    gsd = fov_w / camera.image_width
    obj_px = profile.object_size / gsd

    pixels = world_to_pixels(locations, pose, camera) if len(locations) else np.zeros((0, 2))
    inside = (
        (pixels[:, 0] >= 0)
        & (pixels[:, 0] <= camera.image_width)
        & (pixels[:, 1] >= 0)
        & (pixels[:, 1] <= camera.image_height)
    )
    idx = np.flatnonzero(inside)

    # true positives
    hit = rng.random(len(idx)) < anchor.p_detect
    idx = idx[hit]
    n_tp = len(idx)
    centers = pixels[idx]
    if anchor.sigma_px > 0 and n_tp:
        centers = centers + rng.normal(0.0, anchor.sigma_px, (n_tp, 2))
    centers[:, 0] = np.clip(centers[:, 0], 0.0, camera.image_width)
    centers[:, 1] = np.clip(centers[:, 1], 0.0, camera.image_height)
    tp_conf = _beta(rng, anchor.tp_alpha, anchor.tp_beta, n_tp, det)
    labels = classes[idx].copy()
    if anchor.class_error > 0 and K > 1:
        flip = rng.random(n_tp) < anchor.class_error
        labels[flip] = (labels[flip] + rng.integers(1, K, flip.sum())) % K
    tp_scores = _class_scores(rng, labels, profile.tp_score_peak, profile.score_jitter, K)

    # false positives
    n_fp = 0 if anchor.fp_rate == 0 else int(rng.poisson(anchor.fp_rate))
    fp_centers = rng.random((n_fp, 2)) * np.array([camera.image_width, camera.image_height])
    fp_conf = _beta(rng, anchor.fp_alpha, anchor.fp_beta, n_fp, det)
    fp_labels = rng.integers(0, K, n_fp)
    fp_scores = _class_scores(rng, fp_labels, profile.fp_score_peak, profile.score_jitter, K)
    fp_sizes = obj_px * rng.uniform(0.7, 1.3, (n_fp, 2))

    all_centers = np.vstack((centers, fp_centers))
    sizes = np.vstack((np.full((n_tp, 2), obj_px), fp_sizes))
    boxes = _boxes(all_centers, sizes, camera)
    conf = np.clip(np.concatenate((tp_conf, fp_conf)), 0.0, 1.0)
    labels_all = np.concatenate((labels, fp_labels)).astype(int)
    scores = np.vstack((tp_scores, fp_scores))
    sources = [int(i) for i in idx] + [-1] * n_fp

    references = [
        Detection(tuple(map(float, boxes[i])), tuple(map(float, scores[i])), float(conf[i]), int(labels_all[i]))
        for i in range(len(conf))
    ]

    n_runs = profile.mc_runs if mc_runs is None else mc_runs
    runs = _mc_runs(references, sources, boxes, scores, conf, n_runs, profile, camera, rng) if n_runs else []
    return SyntheticImage(references, runs, sources, extrapolated)


def _mc_runs(references, sources, boxes, scores, conf, n_runs, profile, camera, rng) -> list[list[Detection]]:
    n = len(references)
    if n == 0:
        return [[] for _ in range(n_runs)]
    is_tp = np.array(sources) >= 0
    keep_p = np.where(is_tp, profile.keep_tp, profile.keep_fp)
    jitter = np.where(is_tp, profile.box_jitter_tp, profile.box_jitter_fp)
    keep = rng.random((n_runs, n)) < keep_p
    w = boxes[:, 2] - boxes[:, 0]
    h = boxes[:, 3] - boxes[:, 1]
    cu = (boxes[:, 0] + boxes[:, 2]) / 2.0
    cv = (boxes[:, 1] + boxes[:, 3]) / 2.0
    du = rng.normal(0.0, 1.0, (n_runs, n)) * jitter * w
    dv = rng.normal(0.0, 1.0, (n_runs, n)) * jitter * h
    sw = np.exp(rng.normal(0.0, 1.0, (n_runs, n)) * jitter)
    sh = np.exp(rng.normal(0.0, 1.0, (n_runs, n)) * jitter)
    dconf = rng.normal(0.0, profile.confidence_jitter, (n_runs, n)) if profile.confidence_jitter else np.zeros((n_runs, n))
    K = scores.shape[1]
    dscore = (
        rng.normal(0.0, profile.score_jitter, (n_runs, n, K)) if profile.score_jitter else np.zeros((n_runs, n, K))
    )
    runs = []
    for j in range(n_runs):
        centers = np.column_stack((cu + du[j], cv + dv[j]))
        sizes = np.column_stack((w * sw[j], h * sh[j]))
        jb = _boxes(centers, sizes, camera)
        js = scores + dscore[j]
        jc = np.clip(conf + dconf[j], 0.0, 1.0)
        run = [
            Detection(tuple(map(float, jb[i])), tuple(map(float, js[i])), float(jc[i]), int(js[i].argmax()))
            for i in range(n)
            if keep[j, i]
        ]
        runs.append(run)
    return runs
