import math

import numpy as np
import pytest

from lowentropy.entropy import entropy_sup
from lowentropy.expanders import (
    ExpanderBlowUp,
    area_ratio_probe,
    cone_extract,
    convergence_rate_fit,
    integrate_expander_profile,
    off_cone_excluded,
    scaling_step_probe,
    solve_expander_curve,
    solve_expander_curve_for_slope,
    solve_expander_profile,
    support_check,
)
from lowentropy.geom import ConeApprox, link_distance

# t from 0.1 to 0.003: balls of radius 1 hold the tip (height ~1) and stay
# inside the solved range x <= 20
TIMES = tuple(np.geomspace(1e-1, 3e-3, 6))
R = 1.0


@pytest.fixture(scope="module")
def curve():
    return solve_expander_curve(1.0, 20.0, 1e-3)


@pytest.fixture(scope="module")
def line():
    return solve_expander_curve(0.0, 20.0, 1e-3)


@pytest.fixture(scope="module")
def cone(curve):
    return cone_extract(curve, TIMES, R, 2e-4)[0]


def test_flat_curve_is_the_line(line):
    assert np.all(line.u == 0.0) and np.all(line.du == 0.0)


def test_curve_residual_and_slopes(curve):
    assert np.abs(curve.residual()).max() <= 1e-8
    lo, hi = curve.slopes
    assert hi > 0 and lo == -hi
    assert curve.slope_change <= 1e-3
    mid = np.searchsorted(curve.x, 10.0)
    assert abs(curve.du[-1] - curve.du[mid]) <= 1e-3


def test_curve_half_step_agreement(curve):
    fine = solve_expander_curve(1.0, 20.0, 5e-4)
    assert np.abs(fine.u[::2] - curve.u).max() <= 1e-9


def test_curve_is_symmetric(curve):
    assert np.array_equal(curve.u, curve.u[::-1])


def test_curve_errors():
    with pytest.raises(ExpanderBlowUp) as info:
        solve_expander_curve(60.0, 20.0, 1e-3)
    assert 0 < info.value.x_max < 20
    with pytest.raises(ValueError):
        solve_expander_curve(1.0, 20.0005, 1e-3)
    with pytest.raises(ValueError):
        solve_expander_curve(-1.0, 20.0, 1e-3)


def test_curve_for_slope():
    c = solve_expander_curve_for_slope(1.0, 20.0, 1e-3)
    assert abs(c.slopes[1] - 1.0) <= 1e-4
    assert np.abs(c.residual()).max() <= 1e-8


def test_profile_flat():
    p = solve_expander_profile(2, 0.0, 10.0, 2e-3)
    assert np.all(p.f == 0.0)
    assert np.abs(p.residual()).max() <= 1e-8


@pytest.mark.parametrize("n", [2, 3])
def test_profile_shooting_hits_slope(n):
    p = solve_expander_profile(n, 1.0, 10.0, 1e-3)
    assert abs(p.slope - 1.0) <= 1e-4
    assert np.abs(p.residual()).max() <= 1e-8


def test_profile_tip_height_monotone_in_slope():
    bs = [solve_expander_profile(2, s, 10.0, 2e-3).b for s in (0.25, 0.5, 1.0, 1.5, 2.0)]
    assert all(a < b for a, b in zip(bs, bs[1:]))


def test_profile_bracket_error():
    with pytest.raises(ValueError, match="no graphical expander in bracket"):
        solve_expander_profile(2, 1.0, 10.0, 2e-3, bracket=(1e-3, 0.5))


def test_profile_needs_n_at_least_two():
    with pytest.raises(ValueError):
        integrate_expander_profile(1, 1.0, 10.0, 1e-3)


def test_cone_of_line(line):
    C, _ = cone_extract(line, TIMES, R, 2e-4)
    assert link_distance(C, ConeApprox(1, np.array([[1.0, 0.0], [-1.0, 0.0]]))) <= 1e-12


def test_cone_slopes_match_curve(curve, cone):
    assert len(cone.link) == 2
    slopes = sorted(cone.link[:, 1] / cone.link[:, 0])
    assert slopes[0] == pytest.approx(curve.slopes[0], abs=1e-2)
    assert slopes[1] == pytest.approx(curve.slopes[1], abs=1e-2)


def test_cone_scale_invariance(curve, cone):
    # longer curve so both annuli sit where the curve is already conical
    long = solve_expander_curve(1.0, 40.0, 1e-3)
    times = tuple(np.geomspace(1e-1, 1e-3, 6))
    C1, _ = cone_extract(long, times, R, 2e-4)
    C2, _ = cone_extract(long.scaled(2.0), times, R, 2e-4)
    assert link_distance(C1, C2) <= 1e-6
    C4, _ = cone_extract(curve, tuple(4 * t for t in TIMES[1:]) + (TIMES[-1],), R, 2e-4)
    assert link_distance(cone, C4) <= 1e-3


def test_cone_extract_needs_decreasing_times(curve):
    with pytest.raises(ValueError):
        cone_extract(curve, TIMES[::-1], R)


def test_rate_fit_line_is_exact(line):
    C, _ = cone_extract(line, TIMES, R, 2e-4)
    fit = convergence_rate_fit(line, C, R, TIMES)
    assert fit.exact and math.isnan(fit.p)


def test_rate_fit_curve(curve, cone):
    fit = convergence_rate_fit(curve, cone, R, TIMES, 2e-4)
    assert abs(fit.p - 0.5) <= 0.05
    assert all(fit.used)
    finer = convergence_rate_fit(curve, cone, R, TIMES, 1e-4)
    assert finer.C_fit == pytest.approx(fit.C_fit, rel=0.1)


def test_rate_fit_needs_six_times(curve, cone):
    with pytest.raises(ValueError):
        convergence_rate_fit(curve, cone, R, TIMES[:5])


def test_scaling_step_probe(curve, line):
    spacing = 1e-3
    # the line only moves by resampling
    assert scaling_step_probe(line, 0.1, 0.05, R, spacing) <= spacing / math.sqrt(0.05)
    grid = [(0.1, 0.05), (0.05, 0.02), (0.02, 0.01), (0.02, 0.019)]
    ratios = [scaling_step_probe(curve, a, b, R, spacing) for a, b in grid]
    assert all(math.isfinite(r) for r in ratios)
    assert max(ratios) <= 10


@pytest.mark.parametrize(
    "link, y",
    [
        ([[1.0, 0.0], [-1.0, 0.0]], [0.0, 0.0]),
        ([[1.0, 0.0], [-1.0, 0.0]], [0.5, 0.0]),
        ([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0]),
    ],
)
def test_area_ratio_flat_cases(link, y):
    ratios = area_ratio_probe(ConeApprox(1, np.array(link)), y, 1.0, [0.1, 0.01, 0.001])
    assert all(abs(r - 1) <= 0.05 for r in ratios)


def test_area_ratio_extracted_cone(cone):
    y = 0.5 * cone.link[0]
    ratios = area_ratio_probe(cone, y, 1.0, [0.01, 0.001])
    assert min(ratios) >= 0.4
    assert min(area_ratio_probe(cone, [0.0, 0.0], 1.0, [0.01, 0.001])) >= 0.4


def test_area_ratio_rejects_point_off_cone(cone):
    with pytest.raises(ValueError, match="not on the cone"):
        area_ratio_probe(cone, [0.0, 0.5], 1.0, [0.01])


def test_support_check(curve, cone, line):
    fit = convergence_rate_fit(curve, cone, R, TIMES, 2e-4)
    t = TIMES[-1]
    assert support_check(curve, cone, t, R, 2 * fit.C_fit * math.sqrt(t))
    C_line, _ = cone_extract(line, TIMES, R, 2e-4)
    assert support_check(line, C_line, t, R, 1e-3)


def test_off_cone_point_excluded(curve, cone):
    assert off_cone_excluded(curve, cone, [0.0, 0.3], TIMES[-1])


def test_expander_entropy_trend():
    vals = [entropy_sup(solve_expander_curve(b, 20.0, 1e-3).sampled(20.0, 0.01)).value for b in (1.0, 0.5, 0.25, 0.1)]
    assert all(v < 1.3 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))
