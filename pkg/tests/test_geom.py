import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lowentropy.geom import (
    ConeApprox,
    Dims,
    GridGraph,
    PlaneN,
    Polyline,
    SampledSurface,
    circle_polyline,
    directed_hausdorff,
    discrete_second_fundamental,
    hausdorff_distance,
    link_distance,
    restrict_ball,
    sample_plane_disk,
    sphere_profile,
    unit_ball_volume,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
point_sets = arrays(np.float64, st.tuples(st.integers(1, 12), st.just(2)), elements=finite)


def test_dims_rejects_unsupported():
    with pytest.raises(ValueError):
        Dims(3, 2)
    with pytest.raises(ValueError):
        Dims(0, 1)
    assert Dims(3, 1).ambient == 4


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_sampled_surface_rejects_nonpositive_weights():
    with pytest.raises(ValueError):
        SampledSurface(Dims(1, 1), np.zeros((2, 2)), np.array([1.0, 0.0]))


def test_hausdorff_identical_sets_is_zero(rng):
    A = rng.normal(size=(50, 3))
    assert hausdorff_distance(A, A) == 0.0


def test_hausdorff_one_point_asymmetry():
    assert hausdorff_distance([[0.0]], [[0.0], [1.0]]) == 1.0
    assert directed_hausdorff([[0.0]], [[0.0], [1.0]]) == 0.0


def test_hausdorff_empty_set_errors():
    with pytest.raises(ValueError, match="empty set has no Hausdorff distance"):
        hausdorff_distance(np.zeros((0, 2)), np.zeros((1, 2)))


def test_hausdorff_concentric_circles_against_brute_force():
    h = 0.01
    A = circle_polyline(1.0, h).vertices
    B = circle_polyline(2.0, h).vertices
    fast = hausdorff_distance(A, B)
    brute = hausdorff_distance(A, B, method="brute")
    assert fast == brute
    assert abs(fast - 1.0) <= 2 * h


@settings(max_examples=60, deadline=None)
@given(point_sets, point_sets, point_sets)
def test_hausdorff_triangle_inequality(A, B, C):
    ab, bc, ac = hausdorff_distance(A, B), hausdorff_distance(B, C), hausdorff_distance(A, C)
    assert ac <= ab + bc + 1e-9


@settings(max_examples=60, deadline=None)
@given(point_sets, point_sets)
def test_hausdorff_kdtree_matches_brute(A, B):
    assert hausdorff_distance(A, B) == pytest.approx(hausdorff_distance(A, B, method="brute"), abs=1e-12)


def test_restrict_ball_examples():
    disk = sample_plane_disk(PlaneN.coordinate(2, 1), 1.0, 0.1)
    big = restrict_ball(disk, np.zeros(3), 5.0)
    assert np.array_equal(big.points, disk.points) and np.array_equal(big.weights, disk.weights)
    assert len(restrict_ball(circle_polyline(1.0, 0.01).to_sampled(), [0, 0], 0.5)) == 0
    h = 0.01
    line = sample_plane_disk(PlaneN.coordinate(1, 1), 10.0, h)
    assert abs(restrict_ball(line, [0, 0], 1.0).total_weight - 2.0) <= h


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.0, 2.0), finite, finite)
def test_restrict_ball_nested_monotone(R1, dR, cx, cy):
    S = circle_polyline(1.5, 0.05).to_sampled()
    c = [cx / 5, cy / 5]
    small = restrict_ball(S, c, R1)
    large = restrict_ball(S, c, R1 + dR)
    assert small.total_weight <= large.total_weight <= S.total_weight


def test_plane_disk_quadrature():
    seg = sample_plane_disk(PlaneN.coordinate(1, 1), 1.0, 0.01)
    assert abs(seg.total_weight - 2.0) <= 0.02
    disk = sample_plane_disk(PlaneN.coordinate(2, 1, [1.0, 2.0, 3.0]), 1.0, 0.01)
    assert abs(disk.total_weight - math.pi) <= 0.05
    assert np.all(np.linalg.norm(disk.points - [1.0, 2.0, 3.0], axis=1) <= 1.0)


def test_plane_frame_must_be_orthonormal():
    with pytest.raises(ValueError):
        PlaneN(np.zeros(2), np.array([[1.0], [1.0]]))


def test_polyline_weight_equals_length(rng):
    v = np.cumsum(rng.uniform(0.1, 1.0, size=(20, 2)), axis=0)
    P = Polyline(v)
    assert P.to_sampled().total_weight == pytest.approx(P.length, rel=1e-14)
    C = Polyline(v, closed=True)
    assert C.to_sampled().total_weight == pytest.approx(C.length, rel=1e-14)


def test_second_fundamental_straight_and_polygon():
    line = Polyline(np.stack([np.linspace(0, 1, 11), np.zeros(11)], axis=1))
    assert all(discrete_second_fundamental(line, i) == 0.0 for i in range(1, 10))
    with pytest.raises(ValueError, match="undefined at boundary"):
        discrete_second_fundamental(line, 0)
    for m in (16, 64, 256):
        th = 2 * np.pi * np.arange(m) / m
        gon = Polyline(np.stack([np.cos(th), np.sin(th)], axis=1), closed=True)
        assert abs(discrete_second_fundamental(gon, 3) - 1.0) <= 1.0 / m**2


def test_second_fundamental_flat_graph():
    g = GridGraph.from_function(lambda x, y: 0 * x, [-1, -1], [1, 1], 0.1)
    k = g.curvature()
    assert np.nanmax(k) == 0.0
    assert discrete_second_fundamental(g, (5, 5)) == 0.0


def test_second_fundamental_sphere_profile():
    S = sphere_profile(2.0, 2, 0.01)
    k = S.curvature()
    assert np.allclose(k[1:-1], 0.5, atol=1e-3)


def test_sphere_profile_area():
    S = sphere_profile(2.0, 2, 0.01)
    assert S.to_sampled().total_weight == pytest.approx(16 * math.pi, rel=1e-4)


def test_cone_link_normalised_and_scale_invariant():
    C = ConeApprox(1, np.array([[2.0, 0.0], [0.0, -3.0]]))
    assert np.allclose(np.linalg.norm(C.link, axis=1), 1.0, atol=1e-12)
    assert link_distance(C, C.scaled(7.0)) == 0.0
    D = ConeApprox(1, np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert link_distance(C, D) == pytest.approx(math.pi / 2)
