"""Gaussian surface area, the entropy supremum, density ratios along flows
and the polynomial-growth truncation radius."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .geom import Dims, SampledSurface, as_sampled

_CHUNK = 1 << 22  # matrix entries per distance block


@dataclass(frozen=True, eq=False)
class GaussianCenter:
    x0: np.ndarray
    t0: float

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError(f"Gaussian scale t0 must be positive, got {self.t0}")
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).reshape(-1))
        object.__setattr__(self, "t0", float(self.t0))


@dataclass(frozen=True)
class EntropyEstimate:
    """Result of :func:`entropy_sup`.

    ``branch`` is ``"attained"`` when the probed maximum wins and
    ``"asymptotic"`` when the ``1 - eps`` floor for complete noncompact
    inputs is larger.
    """

    value: float
    argmax: GaussianCenter
    grid_resolution: tuple
    refined: bool
    branch: str = "attained"
    grid_value: float = float("nan")
    probed_value: float = float("nan")
    evaluations: int = 0


@dataclass(frozen=True)
class CutoffProfile:
    """``phi_R(x) = phi_0(|x - center| / R)``: 1 on ``s <= 1/2``, 0 on ``s >= 1``
    and a quintic smoothstep (C^2) in between."""

    R: float
    center: Optional[tuple] = None

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("cutoff radius must be positive")

    @staticmethod
    def phi0(s):
        s = np.asarray(s, dtype=float)
        tau = np.clip(2 * s - 1, 0.0, 1.0)
        return 1 - tau**3 * (10 - 15 * tau + 6 * tau**2)

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        c = np.zeros(pts.shape[1]) if self.center is None else np.asarray(self.center, float)
        return self.phi0(np.linalg.norm(pts - c, axis=1) / self.R)


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = centers[:, None, :] - points[None, :, :]
    return np.einsum("mnd,mnd->mn", diff, diff)


def f_functional(S, c: GaussianCenter, weights: Optional[np.ndarray] = None) -> float:
    """``sum_i w_i (4 pi t0)^(-n/2) exp(-|p_i - x0|^2 / (4 t0))``.

    ``weights`` optionally multiplies the quadrature weights (cutoffs).
    """
    S = as_sampled(S)
    if len(S) == 0:
        raise ValueError("F-functional of an empty surface")
    n = S.dims.n
    d2 = np.einsum("ij,ij->i", S.points - c.x0, S.points - c.x0)
    w = S.weights if weights is None else S.weights * weights
    g = np.exp(-d2 / (4 * c.t0))
    return float((4 * math.pi * c.t0) ** (-n / 2) * np.dot(w, g))


def f_table(S: SampledSurface, centers: np.ndarray, t0s: Sequence[float], threads: int = 1) -> np.ndarray:
    """F at every (center, t0) pair; shape ``(len(centers), len(t0s))``."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    t0s = np.asarray(t0s, dtype=float)
    n = S.dims.n
    norm = (4 * math.pi * t0s) ** (-n / 2)
    rows = max(1, _CHUNK // max(1, len(S)))
    blocks = [(s, min(s + rows, len(centers))) for s in range(0, len(centers), rows)]

    def work(block):
        a, b = block
        d2 = _sq_dists(S.points, centers[a:b])
        out = np.empty((b - a, len(t0s)))
        for j, t0 in enumerate(t0s):
            out[:, j] = np.exp(d2 * (-1.0 / (4 * t0))) @ S.weights
        return out * norm

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(b) for b in blocks]
    if not parts:
        return np.empty((0, len(t0s)))
    return np.vstack(parts)


# ---------------------------------------------------------------------------
# entropy search


@dataclass(frozen=True, eq=False)
class EntropySearch:
    """Grid plus coordinate-descent configuration for :func:`entropy_sup`.

    The grid is explicit so that it can be carried along by a similarity
    (see :meth:`transported`); ``basis`` holds the descent directions for
    the centre as columns.
    """

    centers: np.ndarray
    t0s: np.ndarray
    basis: np.ndarray
    x_steps: np.ndarray
    log_t_step: float
    rel_tol: float = 1e-7
    max_evals: int = 4000

    def transported(self, rho: float = 1.0, Q=None, y=None) -> "EntropySearch":
        d = self.centers.shape[1]
        Q = np.eye(d) if Q is None else np.asarray(Q, dtype=float)
        y = np.zeros(d) if y is None else np.asarray(y, dtype=float)
        return replace(
            self,
            centers=rho * self.centers @ Q.T + y,
            t0s=rho**2 * self.t0s,
            basis=Q @ self.basis,
            x_steps=rho * self.x_steps,
        )

    @property
    def resolution(self) -> tuple:
        return tuple(float(s) for s in self.x_steps) + (float(self.log_t_step),)


def default_search(
    S: SampledSurface, points_per_axis: Optional[int] = None, n_t0: int = 25
) -> EntropySearch:
    """Grid over the bounding box inflated by 2 in each direction and
    ``t0`` log-spaced in ``[(2 spacing)^2, 10 diam^2]``."""
    pts = S.points
    d = pts.shape[1]
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    diam = float(np.linalg.norm(hi - lo))
    if diam == 0:
        raise ValueError("degenerate surface: all samples coincide")
    if points_per_axis is None:
        points_per_axis = {1: 9, 2: 9, 3: 7}.get(d, 5)
    axes, steps = [], []
    scale = diam * 1e-12
    for j in range(d):
        if half[j] <= scale:
            axes.append(np.array([mid[j]]))
            steps.append(0.0)
        else:
            ax = np.linspace(mid[j] - 2 * half[j], mid[j] + 2 * half[j], points_per_axis)
            axes.append(ax)
            steps.append(ax[1] - ax[0])
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.stack([m.ravel() for m in mesh], axis=1)
    t_lo = (2 * S.spacing) ** 2 if S.spacing > 0 else diam**2 * 1e-6
    t_hi = 10 * diam**2
    t0s = np.geomspace(t_lo, t_hi, n_t0)
    return EntropySearch(
        centers=centers,
        t0s=t0s,
        basis=np.eye(d),
        x_steps=np.array(steps),
        log_t_step=float(np.log(t0s[1] / t0s[0])),
    )


def _grid_argmax(values: np.ndarray, centers: np.ndarray, t0s: np.ndarray):
    vmax = values.max()
    ci, ti = np.nonzero(values == vmax)
    # ties: smallest t0 first, then lexicographic centre
    order = np.argsort(t0s[ti], kind="stable")
    best_t = t0s[ti[order[0]]]
    cands = sorted(int(c) for c, t in zip(ci, ti) if t0s[t] == best_t)
    cands.sort(key=lambda c: tuple(centers[c]))
    c = cands[0]
    return c, int(np.nonzero(t0s == best_t)[0][0]), float(vmax)


def entropy_sup(
    S,
    search: Optional[EntropySearch] = None,
    *,
    refine: bool = True,
    complete_noncompact: bool = False,
    eps: float = 1e-6,
    threads: int = 1,
) -> EntropyEstimate:
    """Estimate ``sup_{x0, t0} F`` by a coarse grid followed by
    coordinate descent from the best grid cell.

    The returned value is never below F at any probed centre.  For inputs
    declared complete and noncompact the supremum may only be approached
    at infinity, so ``max(probed, 1 - eps)`` is reported.
    """
    S = as_sampled(S)
    if len(S) < 2 or np.all(S.points == S.points[0]):
        raise ValueError("degenerate surface: entropy needs more than one point")
    if search is None:
        search = default_search(S)
    table = f_table(S, search.centers, search.t0s, threads=threads)
    ci, ti, grid_val = _grid_argmax(table, search.centers, search.t0s)
    x = search.centers[ci].copy()
    logt = math.log(search.t0s[ti])
    best = grid_val
    evals = table.size

    if refine:
        B = search.basis
        steps = np.append(np.asarray(search.x_steps, dtype=float), search.log_t_step)
        floor = steps * search.rel_tol
        coords = [j for j in range(len(steps)) if steps[j] > 0]

        def value(xx, lt):
            return f_functional(S, GaussianCenter(xx, math.exp(lt)))

        while evals < table.size + search.max_evals:
            moved = False
            for j in coords:
                for sgn in (1.0, -1.0):
                    if j < len(x):
                        xx, lt = x + sgn * steps[j] * B[:, j], logt
                    else:
                        xx, lt = x, logt + sgn * steps[j]
                    v = value(xx, lt)
                    evals += 1
                    if v > best:
                        best, x, logt, moved = v, xx, lt, True
                        break
            if not moved:
                steps = steps * 0.5
                if all(steps[j] < floor[j] for j in coords):
                    break

    argmax = GaussianCenter(x, math.exp(logt))
    value = best
    branch = "attained"
    if complete_noncompact and 1 - eps > value:
        value, branch = 1 - eps, "asymptotic"
    return EntropyEstimate(
        value=float(value),
        argmax=argmax,
        grid_resolution=search.resolution,
        refined=refine,
        branch=branch,
        grid_value=grid_val,
        probed_value=float(best),
        evaluations=int(evals),
    )


# ---------------------------------------------------------------------------
# flows


def density_ratio(M, x0, t: float, r: float, cutoff: Optional[CutoffProfile] = None) -> float:
    """Gaussian density ratio of the track ``M`` at ``(x0, t)`` and scale ``r``.

    Evaluated on the surface at time ``t - r^2`` with centre ``(x0, r^2)``;
    between recorded times the two bracketing values are interpolated
    linearly.
    """
    if not r > 0:
        raise ValueError("scale r must be positive")
    times = np.asarray(M.times)
    s = t - r * r
    slack = 1e-12 * max(1.0, abs(times[-1]))
    if s < times[0] - slack:
        raise ValueError("density ratio undefined before initial time")
    if s > times[-1] + slack:
        raise ValueError("density ratio undefined beyond the recorded track")
    s = min(max(s, times[0]), times[-1])
    c = GaussianCenter(x0, r * r)

    def at(i):
        S = M.sampled(i)
        w = None if cutoff is None else cutoff(S.points)
        return f_functional(S, c, w)

    i = int(np.searchsorted(times, s, side="right")) - 1
    i = min(max(i, 0), len(times) - 1)
    if times[i] == s or i == len(times) - 1:
        return at(i)
    lam = (s - times[i]) / (times[i + 1] - times[i])
    return (1 - lam) * at(i) + lam * at(i + 1)


# ---------------------------------------------------------------------------
# tail control

COVERING_BASE = 12


def area_ratio_constant(n: int) -> float:
    """``(4 pi)^(n/2) e^(1/4)``: volume growth constant implied by an entropy bound."""
    return (4 * math.pi) ** (n / 2) * math.exp(0.25)


def tail_bound(dims: Dims, lambda_bound: float, R: float) -> float:
    """Explicit upper bound on the Gaussian tail outside ``B_R`` for a surface
    with entropy at most ``lambda_bound``, summed over dyadic annuli."""
    n, k = dims.n, dims.k
    pref = area_ratio_constant(n) * COVERING_BASE ** (n + k) * lambda_bound / (4 * math.pi) ** (n / 2)
    total = 0.0
    for i in range(64):
        expo = (i - 1) * n * math.log(2) - 2.0 ** (2 * i - 4) * R * R
        if expo < -745:
            if i > 2:
                break
            continue
        total += math.exp(expo)
    return pref * total * R**n


def truncation_radius(dims: Dims, lambda_bound: float, eps: float) -> float:
    """Smallest ``R > 1`` on a 0.1-step grid whose tail bound is ``<= eps``."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if lambda_bound < 1:
        raise ValueError("entropy bound must be at least 1")
    j = 11
    while True:
        R = round(0.1 * j, 10)
        if tail_bound(dims, lambda_bound, R) <= eps:
            return R
        j += 1


def gaussian_tail(S, c: GaussianCenter, R: float) -> float:
    """Measured Gaussian mass outside ``B_{R sqrt(t0)}(x0)``."""
    S = as_sampled(S)
    n = S.dims.n
    d2 = np.einsum("ij,ij->i", S.points - c.x0, S.points - c.x0)
    out = d2 > R * R * c.t0
    g = np.exp(-d2[out] / (4 * c.t0))
    return float((4 * math.pi * c.t0) ** (-n / 2) * np.dot(S.weights[out], g))
