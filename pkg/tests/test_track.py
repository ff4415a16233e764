import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sealanes.track import (
    MotionClass,
    TrackPoint,
    Trajectory,
    classify_motion,
    course_diff,
    euclid_dist,
)


def pt(lat, lon, speed=1.0, course=0.0):
    return TrackPoint(lat=lat, lon=lon, speed=speed, course=course)


class TestEuclidDist:
    def test_identity(self):
        a = pt(39.0, -74.0)
        assert euclid_dist(a, a) == 0.0

    def test_3_4_5(self):
        assert euclid_dist(pt(0.0, 0.0), pt(3.0, 4.0)) == 5.0

    def test_small_offsets(self):
        # sqrt(.01^2 + .02^2)
        d = euclid_dist(pt(39.0, -74.0), pt(39.01, -74.02))
        assert d == pytest.approx(0.022360679774997897, rel=1e-12)


class TestCourseDiff:
    def test_identity(self):
        assert course_diff(90.0, 90.0, "plain") == 0.0
        assert course_diff(90.0, 90.0, "circular") == 0.0

    def test_wraparound_circular(self):
        assert course_diff(350.0, 10.0, "circular") == 20.0

    def test_plain_is_raw_absolute(self):
        assert course_diff(350.0, 10.0, "plain") == 340.0


class TestClassifyMotion:
    def test_zero_speed(self):
        assert classify_motion(pt(0, 0, speed=0.0)) is MotionClass.STATIONARY

    def test_just_below_half_knot(self):
        assert classify_motion(pt(0, 0, speed=0.49)) is MotionClass.STATIONARY

    def test_exactly_half_knot_is_moving(self):
        assert classify_motion(pt(0, 0, speed=0.5)) is MotionClass.MOVING


class TestValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"lat": 91.0, "lon": 0.0, "speed": 1.0, "course": 0.0},
            {"lat": 0.0, "lon": -180.5, "speed": 1.0, "course": 0.0},
            {"lat": 0.0, "lon": 0.0, "speed": -0.1, "course": 0.0},
            {"lat": 0.0, "lon": 0.0, "speed": 1.0, "course": 360.0},
        ],
    )
    def test_rejects_out_of_range(self, kwargs):
        with pytest.raises(ValueError):
            TrackPoint(**kwargs)

    def test_trajectory_rejects_decreasing_timestamps(self):
        from datetime import datetime

        a = TrackPoint(0, 0, 1, 0, timestamp=datetime(2017, 1, 1, 0, 1))
        b = TrackPoint(0, 0, 1, 0, timestamp=datetime(2017, 1, 1, 0, 0))
        with pytest.raises(ValueError):
            Trajectory(id="x", points=(a, b))


coords = st.tuples(
    st.floats(min_value=-90, max_value=90),
    st.floats(min_value=-180, max_value=180),
)


@settings(derandomize=True, max_examples=200)
@given(coords, coords, coords)
def test_triangle_inequality_and_symmetry(a, b, c):
    pa, pb, pc = pt(*a), pt(*b), pt(*c)
    assert euclid_dist(pa, pb) == euclid_dist(pb, pa)
    assert euclid_dist(pa, pc) <= euclid_dist(pa, pb) + euclid_dist(pb, pc) + 1e-12


@settings(derandomize=True, max_examples=200)
@given(
    st.floats(min_value=0, max_value=360, exclude_max=True),
    st.floats(min_value=0, max_value=360, exclude_max=True),
)
def test_circular_diff_bounded(c1, c2):
    d = course_diff(c1, c2, "circular")
    assert 0.0 <= d <= 180.0
    assert course_diff(c1, c1, "circular") == 0.0


@settings(derandomize=True, max_examples=100)
@given(st.lists(st.floats(min_value=0, max_value=30), min_size=0, max_size=40))
def test_motion_partition(speeds):
    pts = [pt(0, 0, speed=s) for s in speeds]
    st_count = sum(1 for p in pts if classify_motion(p) is MotionClass.STATIONARY)
    mv_count = sum(1 for p in pts if classify_motion(p) is MotionClass.MOVING)
    assert st_count + mv_count == len(pts)
