"""Self-expanders ``x_perp / 2 = H``: graphical curves and rotationally
symmetric profiles, their asymptotic cones, and the rescaled convergence
``sqrt(t) Sigma -> C`` measured in Hausdorff distance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .geom import (
    ConeApprox,
    Dims,
    Polyline,
    ProfileSurface,
    SampledSurface,
    sphere_rule,
    directed_hausdorff,
    hausdorff_distance,
    restrict_ball,
    sphere_area,
    unit_ball_volume,
)

BLOWUP_SLOPE = 1e6


class ExpanderBlowUp(RuntimeError):
    """The graphical solution stopped being a graph before the end point."""

    def __init__(self, x_max: float):
        super().__init__(f"slope blow-up: solution stays graphical only up to x = {x_max:.6g}")
        self.x_max = x_max


def _rk4(rhs, y0: tuple, h: float, steps: int, start: float = 0.0):
    """Classical RK4 on a 2-vector with plain floats; returns node arrays."""
    u, v = y0
    us, vs = [u], [v]
    x = start
    for i in range(steps):
        k1u, k1v = rhs(x, u, v)
        k2u, k2v = rhs(x + h / 2, u + h / 2 * k1u, v + h / 2 * k1v)
        k3u, k3v = rhs(x + h / 2, u + h / 2 * k2u, v + h / 2 * k2v)
        k4u, k4v = rhs(x + h, u + h * k3u, v + h * k3v)
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        x = start + (i + 1) * h
        if not (abs(v) < BLOWUP_SLOPE and math.isfinite(u)):
            raise ExpanderBlowUp(start + i * h)
        us.append(u)
        vs.append(v)
    return np.array(us), np.array(vs)


def _fd_derivative(v: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central difference at nodes 2 .. len-3."""
    return (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)


# ---------------------------------------------------------------------------
# curves


def _curve_rhs(x, u, v):
    return v, 0.5 * (1 + v * v) * (u - x * v)


@dataclass(frozen=True, eq=False)
class ExpanderCurve:
    """Graph of ``u`` over ``[-L, L]`` solving
    ``u'' / (1 + u'^2) = (u - x u') / 2`` with ``u(0) = b``, ``u'(0) = 0``."""

    b: float
    L: float
    h: float
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray

    @property
    def dims(self) -> Dims:
        return Dims(1, 1)

    @property
    def slopes(self) -> tuple:
        return float(self.du[0]), float(self.du[-1])

    @property
    def slope_change(self) -> float:
        """``|u'(L) - u'(L/2)|``, the convergence of the end slope."""
        mid = int(np.searchsorted(self.x, self.L / 2))
        return float(abs(self.du[-1] - self.du[mid]))

    @cached_property
    def vertices(self) -> np.ndarray:
        v = np.stack([self.x, self.u], axis=1)
        v.flags.writeable = False
        return v

    @property
    def polyline(self) -> Polyline:
        return Polyline(self.vertices, closed=False)

    def residual(self) -> np.ndarray:
        """ODE defect at interior nodes with ``u''`` from a fourth-order
        difference of the integrated ``u'``."""
        d2 = _fd_derivative(self.du, self.h)
        x, u, v = self.x[2:-2], self.u[2:-2], self.du[2:-2]
        return d2 / (1 + v * v) - 0.5 * (u - x * v)

    def sampled(self, radius: float, spacing: Optional[float] = None) -> SampledSurface:
        """Midpoint quadrature of ``Sigma & B_radius(0)`` from vertices
        thinned to about ``spacing``."""
        stride = 1 if spacing is None else max(1, int(spacing / self.h))
        V = self.vertices
        inside = np.nonzero(np.einsum("ij,ij->i", V, V) <= radius * radius)[0]
        if len(inside) < 2:
            raise ValueError("ball too small to hold an edge of the expander")
        lo, hi = inside[0], inside[-1]
        # the curve is a graph over x, so the part in a centred ball is contiguous
        idx = np.arange(lo, hi + 1, stride)
        if idx[-1] != hi:
            idx = np.append(idx, hi)
        return Polyline(V[idx]).to_sampled()

    def scaled(self, rho: float) -> "ScaledExpander":
        return ScaledExpander(self, rho)


def solve_expander_curve(b: float, L: float, h: float) -> ExpanderCurve:
    """RK4 from ``x = 0`` to ``L`` with step ``h``, mirrored to ``[-L, 0]``."""
    if b < 0 or L <= 0 or h <= 0:
        raise ValueError("need b >= 0, L > 0, h > 0")
    steps = int(round(L / h))
    if abs(steps * h - L) > 1e-9 * L:
        raise ValueError("L must be a whole number of steps h")
    u, v = _rk4(_curve_rhs, (float(b), 0.0), h, steps)
    x = h * np.arange(steps + 1)
    X = np.concatenate([-x[:0:-1], x])
    U = np.concatenate([u[:0:-1], u])
    V = np.concatenate([-v[:0:-1], v])
    return ExpanderCurve(float(b), float(L), float(h), X, U, V)


# ---------------------------------------------------------------------------
# rotationally symmetric profiles


def _profile_rhs(n: int, b: float):
    def rhs(r, f, g):
        rot = (n - 1) * (g / r if r > 0 else b / (2 * n))
        return g, (1 + g * g) * (0.5 * (f - r * g) - rot)

    return rhs


@dataclass(frozen=True, eq=False)
class ExpanderProfile:
    """Rotationally symmetric expander in ``R^(n+1)``: the graph
    ``z = f(|y|)`` over the hyperplane orthogonal to the axis, with
    ``f(0) = b`` and ``f'(0) = 0``."""

    n: int
    b: float
    L: float
    h: float
    r: np.ndarray
    f: np.ndarray
    df: np.ndarray

    @property
    def dims(self) -> Dims:
        return Dims(self.n, 1)

    @property
    def slope(self) -> float:
        """Asymptotic slope.  With ``f ~ m r + c / r`` the mean of ``f/r``
        and ``f'`` cancels the leading correction."""
        return float(0.5 * (self.f[-1] / self.r[-1] + self.df[-1]))

    def residual(self) -> np.ndarray:
        d2 = _fd_derivative(self.df, self.h)
        r, f, g = self.r[2:-2], self.f[2:-2], self.df[2:-2]
        return d2 / (1 + g * g) + (self.n - 1) * g / r - 0.5 * (f - r * g)

    def surface(self, spacing: Optional[float] = None) -> ProfileSurface:
        stride = 1 if spacing is None else max(1, int(spacing / self.h))
        idx = np.arange(0, len(self.r), stride)
        if idx[-1] != len(self.r) - 1:
            idx = np.append(idx, len(self.r) - 1)
        return ProfileSurface(self.n, np.stack([self.r[idx], self.f[idx]], axis=1))

    def sampled(self, radius: float, spacing: Optional[float] = None) -> SampledSurface:
        spacing = self.h if spacing is None else spacing
        inside = self.r**2 + self.f**2 <= radius * radius
        last = int(np.nonzero(inside)[0][-1]) if inside.any() else -1
        if last < 1:
            raise ValueError("ball too small to hold the expander tip")
        stride = max(1, int(spacing / self.h))
        idx = np.arange(0, last + 1, stride)
        if idx[-1] != last:
            idx = np.append(idx, last)
        r, f = self.r[idx], self.f[idx]
        mid_r, mid_f = 0.5 * (r[1:] + r[:-1]), 0.5 * (f[1:] + f[:-1])
        ds = np.hypot(np.diff(r), np.diff(f))
        seg_w = sphere_area(self.n - 1) * mid_r ** (self.n - 1) * ds
        pts, ws = [], []
        for rm, fm, sw in zip(mid_r, mid_f, seg_w):
            dirs, dw = sphere_rule(self.n, spacing / max(rm, spacing))
            pts.append(np.concatenate([rm * dirs, np.full((len(dirs), 1), fm)], axis=1))
            ws.append(sw * dw / dw.sum())
        return SampledSurface(self.dims, np.concatenate(pts), np.concatenate(ws))

    def scaled(self, rho: float) -> "ScaledExpander":
        return ScaledExpander(self, rho)


def integrate_expander_profile(n: int, b: float, L: float, h: float) -> ExpanderProfile:
    if n < 2:
        raise ValueError("profiles need n >= 2")
    steps = int(round(L / h))
    f, g = _rk4(_profile_rhs(n, b), (float(b), 0.0), h, steps)
    return ExpanderProfile(n, float(b), float(L), float(h), h * np.arange(steps + 1), f, g)


def _profile_slope(n: int, b: float, L: float, h: float) -> float:
    try:
        return integrate_expander_profile(n, b, L, h).slope
    except ExpanderBlowUp:
        return math.inf


def _shoot(slope_of, target: float, bracket: tuple, tol: float, max_iter: int) -> float:
    """Tip height whose end slope is ``target``.  Scans upward from the
    low end of the bracket by doubling, since past the graphical range
    the integrator returns noise, then bisects."""
    lo, top = bracket
    if slope_of(lo) > target:
        raise ValueError("no graphical expander in bracket")
    hi = lo
    while True:
        hi = min(2 * hi, top)
        if slope_of(hi) >= target:
            break
        if hi >= top:
            raise ValueError("no graphical expander in bracket")
        lo = hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        m = slope_of(mid)
        if abs(m - target) <= tol:
            return mid
        if m < target:
            lo = mid
        else:
            hi = mid
    raise ValueError(f"shooting did not reach slope {target:g} within {max_iter} bisections")


def solve_expander_profile(
    n: int,
    cone_slope: float,
    L: float,
    h: float,
    bracket: tuple = (1e-3, 1e3),
    tol: float = 1e-4,
    max_iter: int = 100,
) -> ExpanderProfile:
    """Shoot on the tip height ``b`` until the end slope matches
    ``cone_slope`` within ``tol``; slope 0 gives the flat hyperplane."""
    if cone_slope < 0:
        raise ValueError("cone slope must be nonnegative")
    if cone_slope == 0:
        return integrate_expander_profile(n, 0.0, L, h)
    b = _shoot(lambda b: _profile_slope(n, b, L, h), cone_slope, bracket, tol, max_iter)
    return integrate_expander_profile(n, b, L, h)


def _curve_slope(b: float, L: float, h: float) -> float:
    try:
        return solve_expander_curve(b, L, h).slopes[1]
    except ExpanderBlowUp:
        return math.inf


def solve_expander_curve_for_slope(
    cone_slope: float,
    L: float,
    h: float,
    bracket: tuple = (1e-3, 1e3),
    tol: float = 1e-4,
    max_iter: int = 100,
) -> ExpanderCurve:
    """Expander curve whose ends have slopes ``-cone_slope`` and
    ``cone_slope`` within ``tol``."""
    if cone_slope < 0:
        raise ValueError("cone slope must be nonnegative")
    if cone_slope == 0:
        return solve_expander_curve(0.0, L, h)
    b = _shoot(lambda b: _curve_slope(b, L, h), cone_slope, bracket, tol, max_iter)
    return solve_expander_curve(b, L, h)


# ---------------------------------------------------------------------------
# scaled copies and cones


@dataclass(frozen=True, eq=False)
class ScaledExpander:
    """``rho * Sigma`` for an expander ``Sigma`` (sampled lazily)."""

    base: object
    rho: float

    @property
    def dims(self) -> Dims:
        return self.base.dims

    def sampled(self, radius: float, spacing: Optional[float] = None) -> SampledSurface:
        sp = None if spacing is None else spacing / self.rho
        return self.base.sampled(radius / self.rho, sp).transformed(self.rho)


def rescaled_ball(Sigma, t: float, R: float, spacing: Optional[float] = None) -> SampledSurface:
    """Samples of ``sqrt(t) Sigma & B_R(0)``; ``spacing`` is measured after
    scaling."""
    s = math.sqrt(t)
    sp = None if spacing is None else spacing / s
    S = Sigma.sampled(R / s, sp).transformed(s)
    return restrict_ball(S, np.zeros(S.dims.ambient), R)


def _merge_directions(dirs: np.ndarray, w: np.ndarray, tol: float):
    """Greedy clustering of unit vectors within angle ``tol``; each cluster
    is represented by its weighted mean direction."""
    order = np.lexsort(dirs.T[::-1])
    dirs, w = dirs[order], w[order]
    tree = cKDTree(dirs)
    chord = 2 * math.sin(tol / 2)
    label = np.full(len(dirs), -1)
    reps, weights = [], []
    for i in range(len(dirs)):
        if label[i] >= 0:
            continue
        members = [j for j in tree.query_ball_point(dirs[i], chord) if label[j] < 0]
        label[members] = len(reps)
        m = np.array(members)
        v = (dirs[m] * w[m, None]).sum(axis=0)
        reps.append(v / np.linalg.norm(v))
        weights.append(w[m].sum())
    return np.array(reps), np.array(weights)


def cone_extract(Sigma, t_list: Sequence[float], R: float, spacing: Optional[float] = None, merge_tol: float = 1e-3):
    """Asymptotic cone of an expander from ``sqrt(t) Sigma & B_R`` as
    ``t -> 0``.

    Successive Hausdorff distances must shrink (two increases beyond
    round-off are an error).  The link comes from the last rescaling,
    using samples in the annulus ``R/2 <= |x| <= R`` so the region near
    the apex, where the rescaled surface is still curved, is ignored.
    Returns ``(cone, distances)``.
    """
    t = [float(x) for x in t_list]
    if len(t) < 4 or any(a <= b for a, b in zip(t, t[1:])):
        raise ValueError("t_list must hold at least 4 strictly decreasing times")
    sets = [rescaled_ball(Sigma, ti, R, spacing) for ti in t]
    gaps = [hausdorff_distance(a.points, b.points) for a, b in zip(sets, sets[1:])]
    floor = 3 * max(s.spacing for s in sets)
    rises = sum(1 for a, b in zip(gaps, gaps[1:]) if b > a and b > floor)
    if rises >= 2:
        raise ValueError("rescaled surfaces do not form a Hausdorff-Cauchy sequence")
    last = sets[-1]
    r = np.linalg.norm(last.points, axis=1)
    ring = (r >= R / 2) & (r <= R)
    if not ring.any():
        raise ValueError("no samples in the outer annulus")
    dirs = last.points[ring] / r[ring, None]
    n = Sigma.dims.n
    link, mass = _merge_directions(dirs, last.weights[ring], merge_tol)
    # mass of a cone in the annulus is (link measure) R^n (1 - 2^-n) / n
    weights = mass * n / (R**n * (1 - 2.0**-n))
    return ConeApprox(n, link, weights), gaps


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit ``d = C_fit t^p`` of rescaled Hausdorff distances."""

    t: tuple
    d: tuple
    used: tuple
    p: float
    C_fit: float
    exact: bool = False


def convergence_rate_fit(Sigma, C: ConeApprox, R: float, t_list: Sequence[float], spacing: float = 2e-4) -> RateFit:
    """Fit ``dist_H(sqrt(t) Sigma & B_R, C & B_R) ~ C_fit t^p``.

    Distances below three sample spacings are at the resolution floor and
    dropped; when none survive the fit is flagged exact (``p = nan``).
    """
    t = np.array([float(x) for x in t_list])
    if len(t) < 6:
        raise ValueError("rate fit needs at least 6 times")
    if np.any(t <= 0) or np.any(t > 1):
        raise ValueError("times must lie in (0, 1]")
    cone_pts = C.points(R, spacing)
    d = []
    for ti in t:
        S = rescaled_ball(Sigma, ti, R, spacing)
        d.append(hausdorff_distance(S.points, cone_pts))
    d = np.array(d)
    floor = 3 * spacing
    used = d >= floor
    if not used.any():
        return RateFit(tuple(t), tuple(d), tuple(used), math.nan, 0.0, exact=True)
    if used.sum() < 4:
        raise ValueError("fewer than 4 distances above the resolution floor")
    p, logC = np.polyfit(np.log(t[used]), np.log(d[used]), 1)
    return RateFit(tuple(t), tuple(d), tuple(used), float(p), float(math.exp(logC)))


def scaling_step_probe(Sigma, t1: float, t2: float, R: float, spacing: float = 1e-3) -> float:
    """``dist_H(sqrt(t1) Sigma & B_R, sqrt(t2) Sigma & B_R) / sqrt(t1 - t2)``
    with both sides built from the same samples of ``Sigma``."""
    if not (0 < t2 < t1 <= 1):
        raise ValueError("need 0 < t2 < t1 <= 1")
    base = Sigma.sampled(R / math.sqrt(t2), spacing / math.sqrt(t1))
    pts = base.points
    A = math.sqrt(t1) * pts
    B = math.sqrt(t2) * pts
    A = A[np.einsum("ij,ij->i", A, A) <= R * R]
    B = B[np.einsum("ij,ij->i", B, B) <= R * R]
    return hausdorff_distance(A, B) / math.sqrt(t1 - t2)


def area_ratio_probe(C: ConeApprox, y, gamma: float, t_list: Sequence[float], tol: Optional[float] = None) -> list:
    """``H^n(B_{gamma sqrt t}(y) & C) / (omega_n (gamma^2 t)^(n/2))`` for
    each ``t``, measured on a cone quadrature of spacing at most
    ``gamma sqrt(t_min) / 10``."""
    y = np.asarray(y, dtype=float)
    t = np.array([float(x) for x in t_list])
    rho_min = gamma * math.sqrt(t.min())
    ds = rho_min / 10
    ny = float(np.linalg.norm(y))
    tol = ds if tol is None else tol
    if ny > 0:
        u = y / ny
        gap = np.min(2 * np.arcsin(np.clip(np.linalg.norm(C.link - u, axis=1) / 2, 0, 1)))
        if gap * ny > tol:
            raise ValueError("point is not on the cone")
    if C.n >= 2 and len(C.link) > 1:
        tree = cKDTree(C.link)
        nn = tree.query(C.link, k=2)[0][:, 1].max()
        if nn * (ny + rho_min) > ds:
            raise ValueError("link sampling too coarse for the probed balls; refine the link")
    R = ny + gamma * math.sqrt(t.max())
    Q = C.quadrature(R * (1 + 1e-9), ds)
    n = C.n
    out = []
    for ti in t:
        rho = gamma * math.sqrt(ti)
        mass = restrict_ball(Q, y, rho).total_weight
        out.append(mass / (unit_ball_volume(n) * rho**n))
    return out


def support_check(Sigma, C: ConeApprox, t_small: float, R: float, eps_sup: float, spacing: float = 2e-4) -> bool:
    """Two-sided closeness of ``sqrt(t) Sigma & B_R`` and ``C & B_R``:
    every sample of either set lies within ``eps_sup`` of the other."""
    S = rescaled_ball(Sigma, t_small, R, spacing).points
    K = C.points(R, spacing)
    return directed_hausdorff(K, S) <= eps_sup and directed_hausdorff(S, K) <= eps_sup


def off_cone_excluded(Sigma, C: ConeApprox, x, t_small: float, spacing: float = 2e-4) -> bool:
    """For ``x`` at distance ``d`` from the cone, no sample of
    ``sqrt(t) Sigma`` lies within ``d / 2`` of ``x``."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    d = float(cKDTree(C.points(2 * r + 1, spacing)).query(x)[0])
    S = rescaled_ball(Sigma, t_small, 2 * r + 1, spacing).points
    return bool(np.linalg.norm(S - x, axis=1).min() > d / 2)
