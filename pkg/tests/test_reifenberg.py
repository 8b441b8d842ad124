import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from lowentropy.geom import GridGraph, PlaneN, circle_polyline, restrict_ball, sample_plane_disk
from lowentropy.reifenberg import best_plane, dyadic_scales, planar_distance


def brute_line_score(S, p, R, h, step=1e-3):
    """Best score over lines through p on an angle grid, in the plane."""
    local = restrict_ball(S, p, R).points
    tree = cKDTree(local)
    m = int(math.ceil(R / h))
    s = (np.arange(-m, m) + 0.5) * h
    s = s[np.abs(s) <= R]
    best = math.inf
    for th in np.arange(0.0, math.pi, step):
        u = np.array([math.cos(th), math.sin(th)])
        line = p + s[:, None] * u
        d_ls = tree.query(line)[0].max()
        d_sl = cKDTree(line).query(local)[0].max()
        best = min(best, max(d_ls, d_sl) / R)
    return best


@pytest.fixture(scope="module")
def circle():
    return circle_polyline(1.0, 0.01).to_sampled()


@pytest.mark.parametrize("n", [1, 2])
def test_plane_scores_within_quantisation(n):
    h = 0.05
    S = sample_plane_disk(PlaneN.coordinate(n, 1), 3.0, h)
    for idx in (0, len(S) // 3, len(S) // 2):
        p = S.points[idx]
        if np.linalg.norm(p) > 1.5:
            continue
        for R in (0.2, 0.5, 1.0):
            assert best_plane(S, p, R, h=h).score <= 2 * h / R


def test_circle_small_scale_matches_brute_force(circle):
    p = circle.points[0]
    got = best_plane(circle, p, 0.2).score
    oracle = brute_line_score(circle, p, 0.2, circle.spacing)
    assert got == pytest.approx(oracle, abs=2e-3)
    # the tangent line leaves the arc by about R^2 / 2 at the rim of the ball
    assert got == pytest.approx(0.1, abs=5e-3)


def test_circle_large_scale_is_far_from_flat(circle):
    assert best_plane(circle, circle.points[0], 100.0).score >= 0.9


def test_refinement_never_worse_than_pca(circle):
    _, _, scores = planar_distance(circle, circle.points[::40], [0.1, 0.4, 1.6])
    assert all(s.score <= s.pca_score for s in scores)
    assert all(0 <= s.score <= 2 for s in scores)


def test_planar_distance_monotone_in_scales(circle):
    ps = circle.points[::60]
    a = planar_distance(circle, ps, [0.1, 0.2])[0]
    b = planar_distance(circle, ps, [0.1, 0.2, 0.8])[0]
    c = planar_distance(circle, ps, [0.1, 0.2, 0.8, 3.2])[0]
    assert a <= b <= c


def test_planar_distance_circle_large_rmax(circle):
    est, witness, _ = planar_distance(circle, circle.points[::100], R_max=200.0)
    assert est >= 0.9
    assert witness.score == est


def test_planar_distance_similarity_invariant(circle, rng):
    ps = circle.points[::80]
    Rs = [0.1, 0.4, 1.6]
    base = planar_distance(circle, ps, Rs)[0]
    rho, th = 1.7, rng.uniform(0, 2 * np.pi)
    Q = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    y = rng.normal(size=2)
    moved = circle.transformed(rho, Q, y)
    got = planar_distance(moved, rho * ps @ Q.T + y, [rho * R for R in Rs], h=rho * circle.spacing)[0]
    assert got == pytest.approx(base, abs=1e-3)


def test_plane_disk_planar_distance_small():
    S = sample_plane_disk(PlaneN.coordinate(1, 1), 10.24, 0.01)
    ps = S.points[np.abs(S.points[:, 0]) <= 7.68][::50]
    assert planar_distance(S, ps, [0.64, 1.28, 2.56])[0] <= 0.02


@pytest.mark.parametrize("pair", [(0.0, 0.5), (1.0, 1.0), (-2.0, 0.25)])
def test_graph_sine_against_brute_force(pair):
    x0, R = pair
    g = GridGraph.from_function(lambda x: 0.05 * np.sin(x), [-math.pi], [math.pi], 0.01)
    S = g.to_sampled()
    p = S.points[np.argmin(np.abs(S.points[:, 0] - x0))]
    got = best_plane(S, p, R).score
    assert got <= brute_line_score(S, p, R, S.spacing) + 2e-3


def test_graph_sine_trend():
    vals = []
    for a in (0.05, 0.025):
        S = GridGraph.from_function(lambda x: a * np.sin(x), [-math.pi], [math.pi], 0.01).to_sampled()
        inner = S.points[np.abs(S.points[:, 0]) <= 2.0][::40]
        vals.append(planar_distance(S, inner, R_max=1.0)[0])
    assert vals[0] <= 0.1
    assert vals[1] < vals[0]


def test_errors(circle):
    with pytest.raises(ValueError, match="no surface in ball"):
        best_plane(circle, np.array([5.0, 5.0]), 0.5)
    with pytest.raises(ValueError):
        best_plane(circle, circle.points[0], circle.spacing)


def test_dyadic_scales():
    assert dyadic_scales(1.0, 0.2) == [0.25, 0.5, 1.0]
