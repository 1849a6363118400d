import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptive_planner.geo import CameraModel, GeoPoint, Pose
from adaptive_planner.mapping import ObjectMap, Observation


def obs(x, y, certainty=0.5, altitude=12.0, label=0):
    return Observation(GeoPoint(x, y), label, certainty, altitude)


def test_first_observation_creates_object():
    m = ObjectMap()
    m.insert_or_merge(obs(0, 0))
    assert len(m) == 1


def test_lower_altitude_overwrites():
    m = ObjectMap()
    m.insert_or_merge(obs(0, 0, 0.6, 24.0, label=0))
    m.insert_or_merge(obs(0.1, 0, 0.3, 12.0, label=1))
    (o,) = m.objects
    assert o.certainty == 0.3 and o.location == (0.1, 0) and o.class_label == 1
    assert o.min_view_altitude == 12.0 and o.max_certainty_seen == 0.6
    assert o.observation_count == 2


def test_higher_certainty_overwrites_at_same_or_higher_altitude():
    m = ObjectMap()
    m.insert_or_merge(obs(0, 0, 0.3, 12.0))
    m.insert_or_merge(obs(0.1, 0, 0.9, 24.0, label=1))
    (o,) = m.objects
    assert o.certainty == 0.9 and o.location == (0.1, 0) and o.class_label == 1
    assert o.min_view_altitude == 12.0


def test_lower_certainty_from_higher_altitude_keeps_stored_values():
    m = ObjectMap()
    m.insert_or_merge(obs(0, 0, 0.7, 12.0))
    m.insert_or_merge(obs(0.1, 0, 0.2, 24.0, label=1))
    (o,) = m.objects
    assert o.certainty == 0.7 and o.location == (0, 0) and o.class_label == 0
    assert o.observation_count == 2


def test_far_observation_is_a_new_object():
    m = ObjectMap()
    m.insert_or_merge(obs(0, 0))
    m.insert_or_merge(obs(0.35, 0))  # exactly d_dist away: not the same object
    assert len(m) == 2


def test_merge_goes_to_nearest_and_ties_to_oldest():
    m = ObjectMap()
    a = m.insert_or_merge(obs(0, 0))
    b = m.insert_or_merge(obs(0.6, 0))
    assert m.insert_or_merge(obs(0.5, 0, 0.1, 48.0)) is b
    assert m.insert_or_merge(obs(0.3, 0, 0.1, 48.0)) is a


def test_moving_object_absorbs_new_neighbour():
    m = ObjectMap()
    m.insert_or_merge(obs(0, 0, 0.5, 24.0))
    m.insert_or_merge(obs(0.5, 0, 0.5, 24.0))
    # overwrites the first object's location to 0.3, within 0.35 of the second
    m.insert_or_merge(obs(0.3, 0, 0.4, 12.0))
    assert len(m) == 1
    assert m.objects[0].observation_count == 3


def test_observation_validation():
    with pytest.raises(ValueError):
        obs(0, 0, certainty=1.5)
    with pytest.raises(ValueError):
        obs(0, 0, altitude=0.0)
    with pytest.raises(ValueError):
        ObjectMap().insert_or_merge(obs(0, 0), d_dist=0.0)


CAM = CameraModel()
POSE12 = Pose(0.0, 0.0, 12.0)


def _seen_from_24(max_certainty):
    m = ObjectMap()
    m.insert_or_merge(obs(0, 0, max_certainty, 24.0))
    return m


def test_prune_removes_unconfirmed_object():
    m = _seen_from_24(0.5)
    removed = m.prune_missed(POSE12, CAM, [], c_accept=0.8)
    assert len(removed) == 1 and len(m) == 0


def test_prune_keeps_confident_object():
    m = _seen_from_24(0.9)
    assert m.prune_missed(POSE12, CAM, [], c_accept=0.8) == []


def test_prune_needs_strictly_lower_altitude():
    m = _seen_from_24(0.5)
    assert m.prune_missed(Pose(0.0, 0.0, 24.0), CAM, [], c_accept=0.8) == []


def test_prune_keeps_redetected_object():
    m = _seen_from_24(0.5)
    assert m.prune_missed(POSE12, CAM, [(0.2, 0.1)], c_accept=0.8) == []


def test_prune_keeps_objects_near_the_image_edge():
    m = ObjectMap()
    fov_w = 36.0 * 12.0 / 35.0
    m.insert_or_merge(obs(fov_w / 2 - 0.2, 0, 0.5, 24.0))
    assert m.prune_missed(POSE12, CAM, [], c_accept=0.8, margin=0.35) == []


def test_prune_altitude_override():
    m = _seen_from_24(0.5)
    assert m.prune_missed(POSE12, CAM, [], c_accept=0.8, altitude=24.0) == []


def test_accepted_objects_is_strict():
    m = ObjectMap()
    for x, c in ((0, 0.4), (5, 0.5), (10, 0.9)):
        m.insert_or_merge(obs(x, 0, c))
    assert [o.certainty for o in m.accepted_objects(0.5)] == [0.9]
    assert len(m.accepted_objects(0.0)) == 3
    assert ObjectMap().accepted_objects(0.5) == []


def test_accepted_objects_with_zero_certainty():
    m = ObjectMap()
    m.insert_or_merge(obs(0, 0, 0.0))
    assert m.accepted_objects(0.0) == []


# -- properties ---------------------------------------------------------------------

observations = st.lists(
    st.tuples(
        st.floats(0, 6),
        st.floats(0, 6),
        st.floats(0, 1),
        st.sampled_from([12.0, 24.0, 36.0, 48.0]),
        st.integers(0, 1),
    ),
    max_size=60,
)


def _fill(items, d_dist):
    m = ObjectMap(cell_size=d_dist)
    history = {}
    for x, y, c, h, label in items:
        o = m.insert_or_merge(Observation(GeoPoint(x, y), label, c, h), d_dist)
        history.setdefault(o.id, []).append(o.min_view_altitude)
    return m, history


def _min_pairwise(m):
    locs = np.array([o.location for o in m], dtype=float).reshape(-1, 2)
    if len(locs) < 2:
        return math.inf
    d = np.hypot(*(locs[:, None, :] - locs[None, :, :]).transpose(2, 0, 1))
    return d[np.triu_indices(len(locs), 1)].min()


@settings(max_examples=1000, deadline=None)
@given(observations, st.sampled_from([0.35, 0.5, 0.9]))
def test_no_two_objects_within_d_dist(items, d_dist):
    m, _ = _fill(items, d_dist)
    assert _min_pairwise(m) >= d_dist - 1e-9
    assert sum(o.observation_count for o in m) == len(items)


@settings(max_examples=1000, deadline=None)
@given(observations)
def test_bookkeeping_invariants(items):
    m, history = _fill(items, 0.35)
    for o in m:
        assert o.max_certainty_seen >= o.certainty
        seq = history[o.id]
        assert all(b <= a for a, b in zip(seq, seq[1:]))


@settings(max_examples=200, deadline=None)
@given(observations)
def test_merging_is_deterministic(items):
    a, _ = _fill(items, 0.35)
    b, _ = _fill(items, 0.35)
    assert [vars(o) for o in a] == [vars(o) for o in b]


@settings(max_examples=1000, deadline=None)
@given(observations, st.floats(0, 1), st.floats(-3, 9), st.floats(-3, 9), st.floats(0, 6.28))
def test_prune_never_removes_confident_objects(items, c_accept, x, y, psi):
    m, _ = _fill(items, 0.35)
    removed = m.prune_missed(Pose(x, y, 6.0, psi), CAM, [], c_accept=c_accept)
    assert all(o.max_certainty_seen < c_accept for o in removed)
    assert all(o.min_view_altitude > 6.0 for o in removed)
