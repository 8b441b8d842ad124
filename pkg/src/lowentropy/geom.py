"""Surface representations, quadrature export, Hausdorff distance and
discrete curvature.

Every other module consumes the :class:`SampledSurface` produced here: a
weighted point cloud approximating the measure ``H^n`` restricted to a
surface.  The concrete classes :class:`Polyline`, :class:`GridGraph` and
:class:`ProfileSurface` are the states that the flow solvers evolve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

import numpy as np
from scipy.spatial import cKDTree

SUPPORTED_DIMS = frozenset({(1, 1), (1, 2), (2, 1), (3, 1)})
GRAM_TOL = 1e-12


def unit_ball_volume(n: int) -> float:
    """Volume ``omega_n`` of the unit ball in ``R^n``."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sphere_area(m: int) -> float:
    """Area of the unit sphere ``S^m`` in ``R^(m+1)``."""
    return 2 * math.pi ** ((m + 1) / 2) / math.gamma((m + 1) / 2)


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dims:
    """Intrinsic dimension ``n`` and codimension ``k``."""

    n: int
    k: int

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError(f"dimensions must be positive, got n={self.n}, k={self.k}")
        if (self.n, self.k) not in SUPPORTED_DIMS:
            raise ValueError(f"unsupported configuration (n={self.n}, k={self.k})")

    @property
    def ambient(self) -> int:
        return self.n + self.k


def _check_frames(frames: np.ndarray, n: int) -> None:
    gram = np.einsum("pdi,pdj->pij", frames, frames)
    err = np.abs(gram - np.eye(n)).max() if len(frames) else 0.0
    if err > GRAM_TOL:
        raise ValueError(f"frames are not orthonormal (Gram error {err:.3g})")


@dataclass(frozen=True, eq=False)
class SampledSurface:
    """Quadrature representation of an n-dimensional surface in ``R^(n+k)``.

    ``points`` has shape ``(N, n+k)``, ``weights`` shape ``(N,)`` with each
    weight the ``H^n`` measure of the cell the point represents.  ``frames``,
    when present, has shape ``(N, n+k, n)`` with orthonormal columns.
    """

    dims: Dims
    points: np.ndarray
    weights: np.ndarray
    frames: Optional[np.ndarray] = None
    lambda_bound: Optional[float] = None

    def __post_init__(self):
        pts = _frozen(self.points).reshape(-1, self.dims.ambient)
        w = _frozen(self.weights).reshape(-1)
        if len(pts) != len(w):
            raise ValueError("points and weights differ in length")
        if np.any(~(w > 0)):
            raise ValueError("quadrature weights must be positive")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        if self.frames is not None:
            fr = _frozen(self.frames).reshape(len(pts), self.dims.ambient, self.dims.n)
            _check_frames(fr, self.dims.n)
            object.__setattr__(self, "frames", fr)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @cached_property
    def spacing(self) -> float:
        """Largest nearest-neighbour distance between samples."""
        if len(self) < 2:
            return 0.0
        d, _ = cKDTree(self.points).query(self.points, k=2)
        return float(d[:, 1].max())

    def transformed(self, rho: float = 1.0, Q=None, y=None) -> "SampledSurface":
        """Image under ``x -> rho * Q x + y``; weights scale by ``rho^n``."""
        d = self.dims.ambient
        Q = np.eye(d) if Q is None else np.asarray(Q, dtype=float)
        y = np.zeros(d) if y is None else np.asarray(y, dtype=float)
        pts = rho * self.points @ Q.T + y
        frames = None if self.frames is None else np.einsum("ij,pjk->pik", Q, self.frames)
        lam = self.lambda_bound
        return SampledSurface(self.dims, pts, self.weights * rho**self.dims.n, frames, lam)

    def union(self, other: "SampledSurface") -> "SampledSurface":
        if other.dims != self.dims:
            raise ValueError("cannot join surfaces of different dimensions")
        frames = None
        if self.frames is not None and other.frames is not None:
            frames = np.concatenate([self.frames, other.frames])
        return SampledSurface(
            self.dims,
            np.concatenate([self.points, other.points]),
            np.concatenate([self.weights, other.weights]),
            frames,
        )

    def subset(self, mask) -> "SampledSurface":
        mask = np.asarray(mask)
        frames = None if self.frames is None else self.frames[mask]
        return SampledSurface(
            self.dims, self.points[mask], self.weights[mask], frames, self.lambda_bound
        )

    def volume_growth_ok(self, center, R: float) -> bool:
        """Check ``H^n(S ∩ B_R) <= lambda (4 pi)^(n/2) e^(1/4) R^n``."""
        if self.lambda_bound is None:
            return True
        n = self.dims.n
        mass = restrict_ball(self, center, R).total_weight
        return mass <= self.lambda_bound * (4 * math.pi) ** (n / 2) * math.exp(0.25) * R**n


def restrict_ball(S: SampledSurface, center, R: float) -> SampledSurface:
    """Keep the quadrature points lying in the closed ball ``B_R(center)``."""
    if R <= 0:
        raise ValueError("ball radius must be positive")
    c = np.asarray(center, dtype=float)
    mask = np.einsum("ij,ij->i", S.points - c, S.points - c) <= R * R
    return S.subset(mask)


def _as_points(A) -> np.ndarray:
    if isinstance(A, SampledSurface):
        return A.points
    arr = np.asarray(A, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


def directed_hausdorff(A, B, method: str = "kdtree") -> float:
    """``sup_{a in A} dist(a, B)`` for finite point sets."""
    A = _as_points(A)
    B = _as_points(B)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("empty set has no Hausdorff distance")
    if method == "kdtree":
        d, _ = cKDTree(B).query(A)
        return float(d.max())
    if method == "brute":
        # direct differences, chunked to bound memory
        rows = max(1, (1 << 22) // (len(B) * B.shape[1]))
        best = 0.0
        for start in range(0, len(A), rows):
            diff = A[start : start + rows, None, :] - B[None, :, :]
            d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).min(axis=1)
            best = max(best, float(d.max()))
        return best
    raise ValueError(f"unknown method {method!r}")


def hausdorff_distance(A, B, method: str = "kdtree") -> float:
    """Hausdorff distance between two finite point sets.

    ``method="brute"`` compares all pairs; ``"kdtree"`` answers the same
    nearest-neighbour queries through a k-d tree and is exact as well.
    """
    return max(directed_hausdorff(A, B, method), directed_hausdorff(B, A, method))


# ---------------------------------------------------------------------------
# planes


@dataclass(frozen=True, eq=False)
class PlaneN:
    """Affine n-plane ``base + span(frame)``; ``frame`` has orthonormal columns."""

    base: np.ndarray
    frame: np.ndarray

    def __post_init__(self):
        base = _frozen(self.base).reshape(-1)
        frame = _frozen(self.frame)
        if frame.ndim == 1:
            frame = frame.reshape(-1, 1)
        if frame.shape[0] != len(base):
            raise ValueError("frame and base live in different spaces")
        _check_frames(frame[None], frame.shape[1])
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "frame", frame)

    @property
    def n(self) -> int:
        return self.frame.shape[1]

    @property
    def dims(self) -> Dims:
        return Dims(self.n, len(self.base) - self.n)

    @classmethod
    def coordinate(cls, n: int, k: int, base=None) -> "PlaneN":
        """The plane spanned by the first ``n`` coordinate axes."""
        base = np.zeros(n + k) if base is None else base
        return cls(base, np.eye(n + k)[:, :n])

    def distance(self, x) -> np.ndarray:
        v = np.atleast_2d(np.asarray(x, dtype=float)) - self.base
        proj = v @ self.frame
        return np.linalg.norm(v - proj @ self.frame.T, axis=1)


def sample_plane_disk(P: PlaneN, R: float, h: float) -> SampledSurface:
    """Cell-centred quadrature of the disk ``P.base + frame . B_R^n``."""
    if R <= 0 or not 0 < h < R:
        raise ValueError("need R > 0 and 0 < h < R")
    n = P.n
    m = int(math.ceil(R / h))
    offsets = (np.arange(-m, m) + 0.5) * h
    grids = np.meshgrid(*([offsets] * n), indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    coords = coords[np.einsum("ij,ij->i", coords, coords) <= R * R]
    pts = P.base + coords @ P.frame.T
    frames = np.broadcast_to(P.frame, (len(pts),) + P.frame.shape)
    return SampledSurface(P.dims, pts, np.full(len(pts), h**n), frames)


# ---------------------------------------------------------------------------
# curves


def curvature_vectors(vertices: np.ndarray, closed: bool) -> np.ndarray:
    """Discrete curvature vector ``2 (tau_next - tau_prev) / (|e_next| + |e_prev|)``.

    Rows for the two endpoints of an open curve are left at zero.
    """
    v = np.asarray(vertices, dtype=float)
    K = np.zeros_like(v)
    if closed:
        e_next = np.roll(v, -1, axis=0) - v
        e_prev = v - np.roll(v, 1, axis=0)
        sl = slice(None)
    else:
        e_next = v[2:] - v[1:-1]
        e_prev = v[1:-1] - v[:-2]
        sl = slice(1, -1)
    ln = np.linalg.norm(e_next, axis=1)
    lp = np.linalg.norm(e_prev, axis=1)
    K[sl] = 2 * (e_next / ln[:, None] - e_prev / lp[:, None]) / (ln + lp)[:, None]
    return K


@dataclass(frozen=True, eq=False)
class Polyline:
    """Ordered vertices in ``R^(1+k)``; the n=1 discretisation."""

    vertices: np.ndarray
    closed: bool = False
    boundary_fixed: bool = True

    def __post_init__(self):
        v = _frozen(self.vertices)
        if v.ndim != 2 or v.shape[1] < 2:
            raise ValueError("vertices must be an (m, 1+k) array")
        min_count = 3 if self.closed else 2
        if len(v) < min_count:
            raise ValueError(f"need at least {min_count} vertices")
        if np.any(self.edge_lengths_of(v, self.closed) == 0):
            raise ValueError("consecutive vertices must be distinct")
        object.__setattr__(self, "vertices", v)

    @staticmethod
    def edge_lengths_of(v, closed) -> np.ndarray:
        e = np.diff(v, axis=0)
        if closed:
            e = np.vstack([e, v[:1] - v[-1:]])
        return np.linalg.norm(e, axis=1)

    @property
    def dims(self) -> Dims:
        return Dims(1, self.vertices.shape[1] - 1)

    @property
    def edge_lengths(self) -> np.ndarray:
        return self.edge_lengths_of(self.vertices, self.closed)

    @property
    def length(self) -> float:
        return float(self.edge_lengths.sum())

    def edge_endpoints(self):
        v = self.vertices
        nxt = np.roll(v, -1, axis=0) if self.closed else v[1:]
        return (v if self.closed else v[:-1]), nxt

    def to_sampled(self) -> SampledSurface:
        """Midpoint rule: one sample per edge, weighted by its length."""
        a, b = self.edge_endpoints()
        return SampledSurface(self.dims, 0.5 * (a + b), self.edge_lengths)

    def curvature(self) -> np.ndarray:
        """``|A|`` at every vertex; NaN at the endpoints of an open curve."""
        kappa = np.linalg.norm(curvature_vectors(self.vertices, self.closed), axis=1)
        if not self.closed:
            kappa[[0, -1]] = np.nan
        return kappa

    def transformed(self, rho=1.0, Q=None, y=None) -> "Polyline":
        d = self.vertices.shape[1]
        Q = np.eye(d) if Q is None else np.asarray(Q, dtype=float)
        y = np.zeros(d) if y is None else np.asarray(y, dtype=float)
        return Polyline(rho * self.vertices @ Q.T + y, self.closed, self.boundary_fixed)


def circle_polyline(radius: float, h: float, center=(0.0, 0.0)) -> Polyline:
    """Regular polygon inscribed in a circle with edges close to ``h``."""
    c = np.asarray(center, dtype=float)
    m = max(8, int(math.ceil(2 * math.pi * radius / h)))
    th = 2 * math.pi * np.arange(m) / m
    v = np.zeros((m, len(c)))
    v[:, 0] = radius * np.cos(th)
    v[:, 1] = radius * np.sin(th)
    return Polyline(v + c, closed=True, boundary_fixed=False)


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True, eq=False)
class GridGraph:
    """Graph of ``u: box in R^n -> R^k`` sampled on a uniform node grid.

    ``u`` has shape ``(N_1 + 1, ..., N_n + 1, k)``.  The trace of ``u`` on the
    box boundary is the fixed Dirichlet datum used by the flow.
    """

    lower: np.ndarray
    upper: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        lo = _frozen(self.lower).reshape(-1)
        hi = _frozen(self.upper).reshape(-1)
        u = _frozen(self.u)
        n = len(lo)
        if n not in (1, 2):
            raise ValueError("GridGraph supports n = 1 or 2")
        if u.ndim == n:
            u = _frozen(u[..., None])
        if u.ndim != n + 1 or np.any(np.array(u.shape[:n]) < 3):
            raise ValueError("u must have at least three nodes per axis")
        if np.any(hi <= lo):
            raise ValueError("empty domain")
        if not np.all(np.isfinite(u)):
            raise ValueError("u must be finite")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "u", u)
        Dims(n, u.shape[-1])

    @classmethod
    def from_function(cls, f, lower, upper, h: float) -> "GridGraph":
        """Sample ``f`` (vectorised over coordinate arrays) on a grid of step
        at most ``h`` that covers the box exactly."""
        lo = np.atleast_1d(np.asarray(lower, dtype=float))
        hi = np.atleast_1d(np.asarray(upper, dtype=float))
        cells = [max(2, int(math.ceil((b - a) / h - 1e-9))) for a, b in zip(lo, hi)]
        axes = [np.linspace(a, b, c + 1) for a, b, c in zip(lo, hi, cells)]
        mesh = np.meshgrid(*axes, indexing="ij")
        vals = np.asarray(f(*mesh), dtype=float)
        vals = np.broadcast_to(vals, mesh[0].shape) if vals.ndim == mesh[0].ndim else vals
        return cls(lo, hi, np.array(vals))

    @property
    def n(self) -> int:
        return len(self.lower)

    @property
    def k(self) -> int:
        return self.u.shape[-1]

    @property
    def dims(self) -> Dims:
        return Dims(self.n, self.k)

    @property
    def cells(self) -> tuple:
        return tuple(s - 1 for s in self.u.shape[: self.n])

    @property
    def spacing(self) -> np.ndarray:
        return (self.upper - self.lower) / np.array(self.cells)

    @property
    def h(self) -> float:
        return float(self.spacing.max())

    def axes(self):
        return [np.linspace(a, b, c + 1) for a, b, c in zip(self.lower, self.upper, self.cells)]

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.u.shape[: self.n], dtype=bool)
        for ax in range(self.n):
            idx = [slice(None)] * self.n
            idx[ax] = 0
            mask[tuple(idx)] = True
            idx[ax] = -1
            mask[tuple(idx)] = True
        return mask

    def node_points(self) -> np.ndarray:
        """Embedded nodes ``(x, u(x))`` with shape ``(*nodes, n + k)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.concatenate([np.stack(mesh, axis=-1), self.u], axis=-1)

    def with_values(self, u) -> "GridGraph":
        return GridGraph(self.lower, self.upper, u)

    def to_sampled(self) -> SampledSurface:
        """Cell-centred quadrature, weight ``sqrt(det(I + Du^T Du)) h^n``."""
        P = self.node_points()
        h = self.spacing
        if self.n == 1:
            centers = 0.5 * (P[1:] + P[:-1])
            du = (self.u[1:] - self.u[:-1]) / h[0]
            w = np.sqrt(1 + np.einsum("ij,ij->i", du, du)) * h[0]
            return SampledSurface(self.dims, centers, w)
        centers = 0.25 * (P[1:, 1:] + P[1:, :-1] + P[:-1, 1:] + P[:-1, :-1])
        ux = 0.5 * ((self.u[1:, 1:] - self.u[:-1, 1:]) + (self.u[1:, :-1] - self.u[:-1, :-1])) / h[0]
        uy = 0.5 * ((self.u[1:, 1:] - self.u[1:, :-1]) + (self.u[:-1, 1:] - self.u[:-1, :-1])) / h[1]
        gxx = 1 + np.einsum("...k,...k->...", ux, ux)
        gyy = 1 + np.einsum("...k,...k->...", uy, uy)
        gxy = np.einsum("...k,...k->...", ux, uy)
        w = np.sqrt(gxx * gyy - gxy**2) * h[0] * h[1]
        return SampledSurface(self.dims, centers.reshape(-1, self.n + self.k), w.ravel())

    def derivatives(self):
        """Central first and second differences at interior nodes.

        Returns ``(Du, D2u)`` with shapes ``(*interior, k, n)`` and
        ``(*interior, k, n, n)``.
        """
        u = self.u
        h = self.spacing
        if self.n == 1:
            du = (u[2:] - u[:-2]) / (2 * h[0])
            d2 = (u[2:] - 2 * u[1:-1] + u[:-2]) / h[0] ** 2
            return du[..., None], d2[..., None, None]
        c = (slice(1, -1), slice(1, -1))
        ux = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2 * h[0])
        uy = (u[1:-1, 2:] - u[1:-1, :-2]) / (2 * h[1])
        uxx = (u[2:, 1:-1] - 2 * u[c] + u[:-2, 1:-1]) / h[0] ** 2
        uyy = (u[1:-1, 2:] - 2 * u[c] + u[1:-1, :-2]) / h[1] ** 2
        uxy = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4 * h[0] * h[1])
        Du = np.stack([ux, uy], axis=-1)
        D2 = np.stack([np.stack([uxx, uxy], -1), np.stack([uxy, uyy], -1)], -2)
        return Du, D2

    def curvature(self) -> np.ndarray:
        """Frobenius norm of the second fundamental form at every node
        (NaN on the boundary)."""
        n, k = self.n, self.k
        Du, D2 = self.derivatives()
        shape = Du.shape[:n]
        Du = Du.reshape(-1, k, n)
        D2 = D2.reshape(-1, k, n, n)
        # tangent vectors T_i = (e_i, u_i) as columns of a (n+k, n) matrix
        T = np.concatenate([np.broadcast_to(np.eye(n), (len(Du), n, n)), Du], axis=1)
        g = np.einsum("pai,paj->pij", T, T)
        ginv = np.linalg.inv(g)
        # second derivatives of the embedding: (0, u_ij)
        X2 = np.concatenate([np.zeros((len(Du), n, n, n)), np.moveaxis(D2, 1, -1)], axis=-1)
        # normal projection P_N = I - T g^{-1} T^T
        coef = np.einsum("pai,pij,pklj->pkla", T, ginv, np.einsum("pbj,pklb->pklj", T, X2))
        B = X2 - coef
        norm2 = np.einsum("pik,pjl,pija,pkla->p", ginv, ginv, B, B)
        out = np.full(self.u.shape[:n], np.nan)
        out[(slice(1, -1),) * n] = np.sqrt(np.maximum(norm2, 0)).reshape(shape)
        return out


# ---------------------------------------------------------------------------
# surfaces of revolution


def sphere_rule(m: int, h_ang: float):
    """Directions and weights integrating over ``S^(m-1)`` (m = 2 or 3) with
    angular spacing about ``h_ang``."""
    if m == 2:
        count = max(8, int(math.ceil(2 * math.pi / h_ang)))
        th = 2 * math.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(count, 2 * math.pi / count)
    if m == 3:
        n_pol = max(4, int(math.ceil(math.pi / h_ang)))
        x, wx = np.polynomial.legendre.leggauss(n_pol)
        dirs, ws = [], []
        for c, wc in zip(x, wx):
            s = math.sqrt(1 - c * c)
            count = max(8, int(math.ceil(2 * math.pi * s / h_ang)))
            ph = 2 * math.pi * (np.arange(count) + 0.5) / count
            dirs.append(np.stack([s * np.cos(ph), s * np.sin(ph), np.full(count, c)], axis=1))
            ws.append(np.full(count, wc * 2 * math.pi / count))
        return np.concatenate(dirs), np.concatenate(ws)
    raise ValueError("surfaces of revolution support n = 2 or 3")


@dataclass(frozen=True, eq=False)
class ProfileSurface:
    """Hypersurface of revolution in ``R^(n+1)`` about the last axis.

    ``profile`` holds ordered samples ``(r_i, z_i)`` with ``r_i >= 0``; the
    radius may vanish only at an endpoint, where the curve meets the axis.
    """

    n: int
    profile: np.ndarray

    def __post_init__(self):
        p = _frozen(self.profile)
        if self.n < 2:
            raise ValueError("ProfileSurface needs n >= 2")
        Dims(self.n, 1)
        if p.ndim != 2 or p.shape[1] != 2 or len(p) < 3:
            raise ValueError("profile must be an (m, 2) array with m >= 3")
        r = p[:, 0]
        if np.any(r < 0):
            raise ValueError("profile radii must be nonnegative")
        if np.any(r[1:-1] == 0):
            raise ValueError("profile may touch the axis only at its endpoints")
        if np.any(np.linalg.norm(np.diff(p, axis=0), axis=1) == 0):
            raise ValueError("consecutive profile samples must be distinct")
        object.__setattr__(self, "profile", p)

    @property
    def dims(self) -> Dims:
        return Dims(self.n, 1)

    @property
    def axis_ends(self) -> tuple:
        return bool(self.profile[0, 0] == 0), bool(self.profile[-1, 0] == 0)

    def segment_weights(self) -> np.ndarray:
        """``|S^(n-1)| r^(n-1) ds`` per profile segment, r at the midpoint."""
        p = self.profile
        ds = np.linalg.norm(np.diff(p, axis=0), axis=1)
        rm = 0.5 * (p[1:, 0] + p[:-1, 0])
        return sphere_area(self.n - 1) * rm ** (self.n - 1) * ds

    @property
    def area(self) -> float:
        return float(self.segment_weights().sum())

    def to_sampled(self, h: Optional[float] = None) -> SampledSurface:
        """Rotate segment midpoints around the axis with angular spacing
        giving arc spacing about ``h`` (default: median segment length)."""
        pts, ws, _ = self._rotated(h)
        return SampledSurface(self.dims, pts, ws)

    def sample_segments(self, h: Optional[float] = None) -> np.ndarray:
        """Profile segment index of every exported sample."""
        return self._rotated(h)[2]

    def _rotated(self, h):
        p = self.profile
        ds = np.linalg.norm(np.diff(p, axis=0), axis=1)
        if h is None:
            h = float(np.median(ds))
        mid = 0.5 * (p[1:] + p[:-1])
        seg_w = self.segment_weights()
        pts, ws, seg = [], [], []
        for j, ((r, z), sw) in enumerate(zip(mid, seg_w)):
            dirs, dw = sphere_rule(self.n, h / max(r, h))
            pts.append(np.concatenate([r * dirs, np.full((len(dirs), 1), z)], axis=1))
            ws.append(sw * dw / dw.sum())
            seg.append(np.full(len(dirs), j))
        return np.concatenate(pts), np.concatenate(ws), np.concatenate(seg)

    def geometry(self):
        """Per-vertex curvature vector, unit normal and ``|A|``.

        Axis endpoints are treated by reflecting the neighbouring sample
        across the axis; there both principal curvatures coincide.
        """
        p = np.asarray(self.profile)
        start, end = self.axis_ends
        ext = p
        if start:
            ext = np.vstack([p[1] * [-1, 1], ext])
        if end:
            ext = np.vstack([ext, p[-2] * [-1, 1]])
        K = curvature_vectors(ext, closed=False)
        tang = np.zeros_like(ext)
        tang[1:-1] = ext[2:] - ext[:-2]
        lo = 1 if start else 0
        K = K[lo : lo + len(p)]
        tang = tang[lo : lo + len(p)]
        tn = np.linalg.norm(tang, axis=1)
        tn[tn == 0] = 1.0
        tang = tang / tn[:, None]
        nu = np.stack([tang[:, 1], -tang[:, 0]], axis=1)
        kappa = np.linalg.norm(K, axis=1)
        r = p[:, 0]
        rot = np.where(r > 0, np.abs(nu[:, 0]) / np.where(r > 0, r, 1.0), kappa)
        A = np.maximum(kappa, rot)
        if not start:
            A[0] = np.nan
        if not end:
            A[-1] = np.nan
        return K, nu, A

    def curvature(self) -> np.ndarray:
        return self.geometry()[2]


def sphere_profile(radius: float, n: int, h: float) -> ProfileSurface:
    """Profile of the round n-sphere: a half circle from pole to pole."""
    m = max(8, int(math.ceil(math.pi * radius / h)))
    th = np.linspace(-math.pi / 2, math.pi / 2, m + 1)
    prof = np.stack([radius * np.cos(th), radius * np.sin(th)], axis=1)
    prof[[0, -1], 0] = 0.0
    return ProfileSurface(n, prof)


Surface = Union[Polyline, GridGraph, ProfileSurface]


def as_sampled(S) -> SampledSurface:
    """Coerce any surface class to its quadrature."""
    if isinstance(S, SampledSurface):
        return S
    return S.to_sampled()


def discrete_second_fundamental(S: Surface, index) -> float:
    """``|A|`` of the discrete surface at one sample.

    ``index`` is a vertex index for curves and profiles and a node index
    (tuple or flat) for graphs.
    """
    if isinstance(S, GridGraph):
        idx = np.unravel_index(index, S.u.shape[: S.n]) if np.isscalar(index) else tuple(index)
        val = S.curvature()[idx]
    elif isinstance(S, (Polyline, ProfileSurface)):
        val = S.curvature()[index]
    else:
        raise TypeError(f"no discrete curvature for {type(S).__name__}")
    if np.isnan(val):
        raise ValueError("second fundamental form undefined at boundary sample")
    return float(val)


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True, eq=False)
class ConeApprox:
    """Cone ``{rho w : rho >= 0, w in link}`` with weighted link directions.

    For ``n = 1`` the link is a finite set of rays, each of weight 1; in
    general each weight is the ``(n-1)``-measure the direction represents.
    """

    n: int
    link: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        L = np.atleast_2d(np.array(self.link, dtype=float))
        L = L / np.linalg.norm(L, axis=1, keepdims=True)
        w = np.ones(len(L)) if self.weights is None else np.asarray(self.weights, dtype=float)
        if len(w) != len(L) or np.any(~(w > 0)):
            raise ValueError("link weights must be positive, one per direction")
        object.__setattr__(self, "link", _frozen(L))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def ambient(self) -> int:
        return self.link.shape[1]

    def scaled(self, rho: float) -> "ConeApprox":
        if rho <= 0:
            raise ValueError("scale must be positive")
        return self

    def points(self, R: float, spacing: float) -> np.ndarray:
        """Point set sampling ``C ∩ B̄_R`` along each ray, apex included."""
        m = max(1, int(math.ceil(R / spacing)))
        rho = np.linspace(0.0, R, m + 1)
        pts = (rho[None, :, None] * self.link[:, None, :]).reshape(-1, self.ambient)
        return np.vstack([np.zeros((1, self.ambient)), pts[np.any(pts != 0, axis=1)]])

    def quadrature(self, R: float, spacing: float) -> SampledSurface:
        """Midpoint quadrature of ``H^n`` on ``C ∩ B_R``."""
        m = max(1, int(math.ceil(R / spacing)))
        ds = R / m
        rho = (np.arange(m) + 0.5) * ds
        pts = (rho[None, :, None] * self.link[:, None, :]).reshape(-1, self.ambient)
        w = (self.weights[:, None] * rho[None, :] ** (self.n - 1) * ds).ravel()
        return SampledSurface(Dims(self.n, self.ambient - self.n), pts, w)


def link_distance(a: ConeApprox, b: ConeApprox) -> float:
    """Hausdorff distance between two links measured in angle (radians)."""
    chord = np.linalg.norm(a.link[:, None, :] - b.link[None, :, :], axis=2)
    ang = 2 * np.arcsin(np.clip(chord / 2, 0.0, 1.0))
    return float(max(ang.min(axis=1).max(), ang.min(axis=0).max()))
