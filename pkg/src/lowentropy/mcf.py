"""Explicit mean curvature flow for curves, graphs and surfaces of
revolution, plus probes of the flow: monotonicity, clearing out and the
curvature decay bound."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .entropy import CutoffProfile, density_ratio
from .geom import (
    Dims,
    GridGraph,
    Polyline,
    ProfileSurface,
    SampledSurface,
    curvature_vectors,
    restrict_ball,
    unit_ball_volume,
)


@dataclass(frozen=True)
class FlowConfig:
    """Time stepping and remeshing controls.

    ``h_min`` defaults to the mean initial edge length; ``dt`` (optional)
    is a requested step that must respect the explicit stability bound.
    """

    T: float
    record_dt: float
    dt_safety: float = 0.25
    h_min: Optional[float] = None
    dt: Optional[float] = None
    max_steps: int = 5_000_000

    def __post_init__(self):
        if not 0 < self.dt_safety < 1:
            raise ValueError("dt_safety must lie in (0, 1)")
        if not self.T > 0 or not self.record_dt > 0:
            raise ValueError("end time and record cadence must be positive")


@dataclass(frozen=True, eq=False)
class FlowTrack:
    """Recorded states of one flow.

    ``status`` is ``"complete"`` (reached ``T``), ``"extinct"`` or
    ``"singular"``; ``event_time`` is the time the flow stopped early.
    """

    times: tuple
    states: tuple
    dims: Dims
    boundary: Optional[str] = None
    status: str = "complete"
    event_time: Optional[float] = None
    self_intersections: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        t = np.asarray(self.times)
        if len(t) == 0 or np.any(np.diff(t) <= 0):
            raise ValueError("track times must be strictly increasing")
        if len({type(s) for s in self.states}) != 1 or len(self.states) != len(t):
            raise ValueError("one state of a single surface class per recorded time")

    @property
    def extinction_time(self) -> Optional[float]:
        return self.event_time if self.status == "extinct" else None

    @property
    def singular_time(self) -> Optional[float]:
        return self.event_time if self.status == "singular" else None

    def sampled(self, i: int) -> SampledSurface:
        if i not in self._cache:
            self._cache[i] = self.states[i].to_sampled()
        return self._cache[i]

    def index_at(self, t: float) -> int:
        """Index of the recorded time nearest to ``t``."""
        return int(np.argmin(np.abs(np.asarray(self.times) - t)))

    def curvature_samples(self, i: int):
        """Representative points and ``|A|`` at the discretisation nodes."""
        return node_curvature(self.states[i])


def node_curvature(state):
    if isinstance(state, Polyline):
        return np.asarray(state.vertices), state.curvature()
    if isinstance(state, GridGraph):
        P = state.node_points().reshape(-1, state.n + state.k)
        return P, state.curvature().ravel()
    if isinstance(state, ProfileSurface):
        p = np.asarray(state.profile)
        pts = np.zeros((len(p), state.n + 1))
        pts[:, 0] = p[:, 0]
        pts[:, -1] = p[:, 1]
        return pts, state.curvature()
    raise TypeError(type(state).__name__)


def sample_curvature(state) -> np.ndarray:
    """``|A|`` attached to each exported quadrature sample (mean over the
    defined values at the cell's nodes)."""
    _, A = node_curvature(state)
    if isinstance(state, Polyline):
        nxt = np.roll(A, -1) if state.closed else A[1:]
        cur = A if state.closed else A[:-1]
        return np.nanmean(np.stack([cur, nxt]), axis=0)
    if isinstance(state, GridGraph):
        A = A.reshape(state.u.shape[: state.n])
        if state.n == 1:
            stack = np.stack([A[1:], A[:-1]])
        else:
            stack = np.stack([A[1:, 1:], A[1:, :-1], A[:-1, 1:], A[:-1, :-1]]).reshape(4, -1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return np.nanmean(stack, axis=0)
    if isinstance(state, ProfileSurface):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            seg = np.nanmean(np.stack([A[1:], A[:-1]]), axis=0)
        return seg[state.sample_segments()]
    raise TypeError(type(state).__name__)


# ---------------------------------------------------------------------------
# remeshing shared by curves and profiles


def _split_long(v: np.ndarray, closed: bool, h_min: float) -> np.ndarray:
    while True:
        nxt = np.roll(v, -1, axis=0) if closed else v[1:]
        cur = v if closed else v[:-1]
        e = np.linalg.norm(nxt - cur, axis=1)
        long = np.nonzero(e > 2 * h_min)[0]
        if len(long) == 0:
            return v
        K = curvature_vectors(v, closed)
        Kn = np.roll(K, -1, axis=0) if closed else K[1:]
        Kc = K if closed else K[:-1]
        # midpoint lifted by the sagitta of the local osculating circle
        new = 0.5 * (cur[long] + nxt[long]) - 0.5 * (Kc[long] + Kn[long]) * (e[long] ** 2 / 8)[:, None]
        v = np.insert(v, long + 1, new, axis=0)


def _collapse_short(v: np.ndarray, closed: bool, h_min: float, keep: set) -> np.ndarray:
    while True:
        m = len(v)
        if m <= (3 if closed else 2):
            return v
        nxt = np.roll(v, -1, axis=0) if closed else v[1:]
        cur = v if closed else v[:-1]
        e = np.linalg.norm(nxt - cur, axis=1)
        short = np.nonzero(e < h_min / 2)[0]
        if len(short) == 0:
            return v
        marked: set = set()
        for i in short:
            a, b = int(i), (int(i) + 1) % m
            # drop the endpoint whose other edge is shorter
            ea = e[(a - 1) % m] if (closed or a > 0) else math.inf
            eb = e[b % len(e)] if (closed or b < m - 1) else math.inf
            order = (a, b) if ea <= eb else (b, a)
            for c in order:
                if c in keep:
                    continue
                if c in marked or (c - 1) % m in marked or (c + 1) % m in marked:
                    break
                marked.add(c)
                break
        if not marked:
            return v
        v = np.delete(v, sorted(marked), axis=0)


def _enclosing_radius(pts: np.ndarray) -> float:
    c = pts.mean(axis=0)
    return float(np.linalg.norm(pts - c, axis=1).max())


def _segments_intersect(v: np.ndarray, closed: bool) -> bool:
    """Proper crossing test between non-adjacent segments of a planar curve."""
    if v.shape[1] != 2:
        return False
    a = v if closed else v[:-1]
    b = np.roll(v, -1, axis=0) if closed else v[1:]
    m = len(a)
    if m < 4:
        return False

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    A1, B1 = a[:, None], b[:, None]
    A2, B2 = a[None, :], b[None, :]
    d1 = orient(A1, B1, A2)
    d2 = orient(A1, B1, B2)
    d3 = orient(A2, B2, A1)
    d4 = orient(A2, B2, B1)
    cross = (d1 * d2 < 0) & (d3 * d4 < 0)
    idx = np.arange(m)
    gap = np.abs(idx[:, None] - idx[None, :])
    if closed:
        gap = np.minimum(gap, m - gap)
    cross &= gap > 1
    return bool(cross.any())


class _Recorder:
    def __init__(self, cfg: FlowConfig):
        self.cfg = cfg
        self.times: list = []
        self.states: list = []
        self.j = 1

    @property
    def next_time(self) -> float:
        return min(self.j * self.cfg.record_dt, self.cfg.T)

    def add(self, t, state):
        if self.times and t <= self.times[-1]:
            self.times[-1], self.states[-1] = t, state
            return
        self.times.append(t)
        self.states.append(state)


def _check_dt(cfg: FlowConfig, bound: float) -> None:
    if cfg.dt is not None and cfg.dt > bound:
        raise ValueError(f"time step {cfg.dt:g} violates the explicit bound {bound:g}")


# ---------------------------------------------------------------------------
# curve shortening


def flow_polyline_csf(init: Polyline, cfg: FlowConfig) -> FlowTrack:
    """Curve shortening flow by explicit Euler steps on the vertices.

    The step is ``dt_safety * e_min^2`` with ``e_min`` the current shortest
    edge (never more than ``dt_safety * h_min^2``).  Closed curves stop
    when their enclosing radius drops below ``3 h_min``.
    """
    v = np.array(init.vertices, dtype=float)
    closed = init.closed
    h_min = cfg.h_min or float(init.edge_lengths.mean())
    _check_dt(cfg, cfg.dt_safety * h_min**2)
    keep = set() if closed else {0}
    rec = _Recorder(cfg)
    rec.add(0.0, init)
    crossings = []
    status, event = "complete", None
    t, steps = 0.0, 0

    while t < cfg.T and steps < cfg.max_steps:
        emin = Polyline.edge_lengths_of(v, closed).min()
        dt = cfg.dt_safety * min(emin, h_min) ** 2
        if cfg.dt is not None:
            dt = min(dt, cfg.dt)
        target = rec.next_time
        landing = t + dt >= target
        dt = target - t if landing else dt
        K = curvature_vectors(v, closed)
        v = v + dt * K
        t = target if landing else t + dt
        steps += 1
        v = _split_long(v, closed, h_min)
        if not closed:
            keep = {0, len(v) - 1}
        v = _collapse_short(v, closed, h_min, keep)

        if closed:
            radius = _enclosing_radius(v)
            if radius < 3 * h_min or len(v) < 4:
                status, event = "extinct", t
                rec.add(t, Polyline(v, closed, init.boundary_fixed))
                break
            kappa = np.linalg.norm(curvature_vectors(v, closed), axis=1).max()
            if kappa > 1 / (5 * h_min) and radius > 10 * h_min:
                status, event = "singular", t
                rec.add(t, Polyline(v, closed, init.boundary_fixed))
                break
        if landing:
            state = Polyline(v, closed, init.boundary_fixed)
            rec.add(t, state)
            if _segments_intersect(v, closed):
                crossings.append(t)
            rec.j += 1
    return FlowTrack(
        tuple(rec.times),
        tuple(rec.states),
        init.dims,
        boundary=None if closed else "fixed",
        status=status,
        event_time=event,
        self_intersections=tuple(crossings),
    )


# ---------------------------------------------------------------------------
# graphs


class GradientBlowUp(RuntimeError):
    pass


def graph_velocity(u: np.ndarray, h: np.ndarray) -> tuple:
    """Right-hand side of graphical MCF at interior nodes and the largest
    gradient norm there."""
    if u.ndim == 1:
        ux = (u[2:] - u[:-2]) / (2 * h[0])
        uxx = (u[2:] - 2 * u[1:-1] + u[:-2]) / h[0] ** 2
        return uxx / (1 + ux * ux), float(np.abs(ux).max())
    c = (slice(1, -1), slice(1, -1))
    ux = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2 * h[0])
    uy = (u[1:-1, 2:] - u[1:-1, :-2]) / (2 * h[1])
    uxx = (u[2:, 1:-1] - 2 * u[c] + u[:-2, 1:-1]) / h[0] ** 2
    uyy = (u[1:-1, 2:] - 2 * u[c] + u[1:-1, :-2]) / h[1] ** 2
    uxy = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4 * h[0] * h[1])
    g2 = ux * ux + uy * uy
    vel = ((1 + uy * uy) * uxx - 2 * ux * uy * uxy + (1 + ux * ux) * uyy) / (1 + g2)
    return vel, float(np.sqrt(g2.max()))


def flow_graph_mcf(init: GridGraph, cfg: FlowConfig) -> FlowTrack:
    """Graphical MCF ``u_t = (delta_ij - u_i u_j / (1 + |Du|^2)) u_ij`` with
    the boundary trace held fixed."""
    if init.k != 1:
        raise ValueError("graphical flow needs codimension 1")
    h = init.spacing
    n = init.n
    bound = cfg.dt_safety * float(h.min()) ** 2 / (2 * n)
    _check_dt(cfg, bound)
    dt_max = bound if cfg.dt is None else cfg.dt
    u = np.array(init.u[..., 0], dtype=float)
    inner = (slice(1, -1),) * n
    rec = _Recorder(cfg)
    rec.add(0.0, init)
    t, steps = 0.0, 0
    while t < cfg.T and steps < cfg.max_steps:
        target = rec.next_time
        landing = t + dt_max >= target
        dt = target - t if landing else dt_max
        vel, gmax = graph_velocity(u, h)
        if gmax > 1e3:
            raise GradientBlowUp(f"|grad u| = {gmax:.3g} exceeds 1e3 at t = {t:.6g}")
        u[inner] += dt * vel
        t = target if landing else t + dt
        steps += 1
        if landing:
            rec.add(t, init.with_values(u[..., None].copy()))
            rec.j += 1
    return FlowTrack(tuple(rec.times), tuple(rec.states), init.dims, boundary="fixed")


# ---------------------------------------------------------------------------
# surfaces of revolution


def profile_velocity(p: np.ndarray, n: int, start_axis: bool, end_axis: bool) -> np.ndarray:
    """Velocity ``kappa_vec - (n-1) (nu_r / r) nu`` of every profile vertex.

    Axis endpoints move along the axis with ``n`` times the profile
    curvature (all principal curvatures agree there); endpoints off the
    axis are held fixed.
    """
    K, nu, _ = ProfileSurface(n, p).geometry()
    r = p[:, 0]
    V = np.zeros_like(p)
    inner = slice(1, -1)
    V[inner] = K[inner] - (n - 1) * (nu[inner, 0] / r[inner])[:, None] * nu[inner]
    if start_axis:
        V[0] = [0.0, n * K[0, 1]]
    if end_axis:
        V[-1] = [0.0, n * K[-1, 1]]
    return V


def flow_profile_mcf(init: ProfileSurface, cfg: FlowConfig) -> FlowTrack:
    """MCF of a hypersurface of revolution through its profile curve.

    Endpoints on the axis move along it; endpoints off the axis are held
    fixed.  The flow stops with status ``"singular"`` when the radius
    vanishes at an interior sample or ``|A|`` exceeds ``1 / (5 h_min)``
    while the surface is still wider than ``10 h_min``, and ``"extinct"``
    when a closed surface fits in a ball of radius ``3 h_min``.
    """
    n = init.n
    p = np.array(init.profile, dtype=float)
    start_axis, end_axis = init.axis_ends
    closed_surface = start_axis and end_axis
    h_min = cfg.h_min or float(np.linalg.norm(np.diff(p, axis=0), axis=1).mean())
    _check_dt(cfg, cfg.dt_safety * h_min**2)
    rec = _Recorder(cfg)
    rec.add(0.0, init)
    status, event = "complete", None
    t, steps = 0.0, 0
    while t < cfg.T and steps < cfg.max_steps:
        emin = np.linalg.norm(np.diff(p, axis=0), axis=1).min()
        # rotational terms stiffen the stencil by a factor ~ n near the axis
        dt = cfg.dt_safety * min(emin, h_min) ** 2 / n
        if cfg.dt is not None:
            dt = min(dt, cfg.dt)
        target = rec.next_time
        landing = t + dt >= target
        dt = target - t if landing else dt
        V = profile_velocity(p, n, start_axis, end_axis)
        p = p + dt * V
        if start_axis:
            p[0, 0] = 0.0
        if end_axis:
            p[-1, 0] = 0.0
        t = target if landing else t + dt
        steps += 1
        p = _split_long(p, False, h_min)
        p = _collapse_short(p, False, h_min, {0, len(p) - 1})
        # vertices next to a pole sit about one edge off the axis by design
        lo, hi = (2 if start_axis else 1), (len(p) - 2 if end_axis else len(p) - 1)
        if np.any(p[lo:hi, 0] <= h_min / 2):
            status, event = "singular", t
            rec.add(t, ProfileSurface(n, p))
            break
        if closed_surface and (_profile_enclosing_radius(p) < 3 * h_min or len(p) < 4):
            status, event = "extinct", t
            rec.add(t, ProfileSurface(n, p))
            break
        A = ProfileSurface(n, p).curvature()
        if np.nanmax(A) > 1 / (5 * h_min) and _profile_enclosing_radius(p) > 10 * h_min:
            status, event = "singular", t
            rec.add(t, ProfileSurface(n, p))
            break
        if landing:
            rec.add(t, ProfileSurface(n, p))
            rec.j += 1
    return FlowTrack(
        tuple(rec.times),
        tuple(rec.states),
        init.dims,
        boundary=None if closed_surface else "fixed",
        status=status,
        event_time=event,
    )


def _profile_enclosing_radius(p: np.ndarray) -> float:
    zc = 0.5 * (p[:, 1].max() + p[:, 1].min())
    return float(np.sqrt(p[:, 0] ** 2 + (p[:, 1] - zc) ** 2).max())


def flow(init, cfg: FlowConfig) -> FlowTrack:
    """Dispatch on the surface class."""
    if isinstance(init, Polyline):
        return flow_polyline_csf(init, cfg)
    if isinstance(init, GridGraph):
        return flow_graph_mcf(init, cfg)
    if isinstance(init, ProfileSurface):
        return flow_profile_mcf(init, cfg)
    raise TypeError(f"cannot flow a {type(init).__name__}")


def static_track(state, times: Sequence[float]) -> FlowTrack:
    """Constant track, e.g. for a plane which does not move."""
    return FlowTrack(tuple(float(t) for t in times), tuple(state for _ in times), state.dims)


# ---------------------------------------------------------------------------
# probes


@dataclass(frozen=True)
class MonotonicityReport:
    values: tuple  # (r, theta) in increasing r
    max_violation: float
    skipped: tuple = ()


def monotonicity_probe(M: FlowTrack, x0, t0: float, radii, cutoff: Optional[CutoffProfile] = None) -> MonotonicityReport:
    """Density ratios at increasing scales and the largest decrease of
    ``Theta`` as ``r`` grows (zero when monotone)."""
    vals, skipped = [], []
    for r in sorted(float(r) for r in radii):
        try:
            vals.append((r, density_ratio(M, x0, t0, r, cutoff)))
        except ValueError as exc:
            warnings.warn(f"scale r={r:g} skipped: {exc}")
            skipped.append(r)
    theta = np.array([v for _, v in vals])
    viol = 0.0
    if len(theta) > 1:
        # largest Theta(r1) - Theta(r2) over r1 < r2
        running_max = np.maximum.accumulate(theta)
        viol = float(max(0.0, (running_max[:-1] - theta[1:]).max()))
    return MonotonicityReport(tuple(vals), viol, tuple(skipped))


def _mass_at(M: FlowTrack, s: float, x0, r: float) -> float:
    times = np.asarray(M.times)
    if s < times[0] - 1e-12 or s > times[-1] + 1e-12:
        raise ValueError("clearing-out probe needs t0 - r^2 and t0 + r^2 inside the track")
    s = min(max(s, times[0]), times[-1])

    def mass(i):
        return restrict_ball(M.sampled(i), x0, r).total_weight

    i = min(max(int(np.searchsorted(times, s, side="right")) - 1, 0), len(times) - 1)
    if times[i] == s or i == len(times) - 1:
        return mass(i)
    lam = (s - times[i]) / (times[i + 1] - times[i])
    return (1 - lam) * mass(i) + lam * mass(i + 1)


def clearing_out_probe(M: FlowTrack, x0, t0: float, r: float, tol: Optional[float] = None):
    """Masses of ``B_r(x0)`` one parabolic step before and after ``t0``.

    Returns ``(mass_minus, mass_plus, min(mass) / r^n)``.
    """
    x0 = np.asarray(x0, dtype=float)
    S0 = M.sampled(M.index_at(t0))
    if tol is None:
        tol = max(S0.spacing, 1e-12)
    if np.linalg.norm(S0.points - x0, axis=1).min() > tol:
        raise ValueError("x0 must lie on the surface at time t0")
    minus = _mass_at(M, t0 - r * r, x0, r)
    plus = _mass_at(M, t0 + r * r, x0, r)
    return minus, plus, min(minus, plus) / r**M.dims.n


@dataclass(frozen=True)
class CurvatureBoundReport:
    rows: tuple  # (t, sup|A|, sup|A| sqrt(t))
    constant: float


def curvature_bound_probe(M: FlowTrack, center, radius: float, times=None) -> CurvatureBoundReport:
    """``sup |A|`` over nodes in ``B_radius(center)`` at each time, its
    product with ``sqrt(t)``, and the sup of that product."""
    center = np.asarray(center, dtype=float)
    if times is None:
        idx = range(len(M.times))
    else:
        idx = [M.index_at(t) for t in times]
    rows = []
    for i in idx:
        t = float(M.times[i])
        pts, A = M.curvature_samples(i)
        inside = (np.linalg.norm(pts - center, axis=1) <= radius) & ~np.isnan(A)
        supA = float(A[inside].max()) if inside.any() else 0.0
        rows.append((t, supA, supA * math.sqrt(max(t, 0.0))))
    const = max((r[2] for r in rows), default=0.0)
    return CurvatureBoundReport(tuple(rows), const)


def clearing_out_threshold(n: int) -> float:
    """Half the flat density ``omega_n``."""
    return unit_ball_volume(n) / 2
