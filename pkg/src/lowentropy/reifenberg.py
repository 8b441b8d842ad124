"""Best approximating planes and the scale-invariant planar distance."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .geom import PlaneN, SampledSurface, as_sampled, restrict_ball, sample_plane_disk


@dataclass(frozen=True)
class PlanarScore:
    """Score ``dist_H((P + p) & B_R(p), S & B_R(p)) / R`` of one plane."""

    p: np.ndarray
    R: float
    plane: PlaneN
    score: float
    pca_score: float


def _givens(d: int, i: int, j: int, theta: float) -> np.ndarray:
    G = np.eye(d)
    c, s = np.cos(theta), np.sin(theta)
    G[i, i] = G[j, j] = c
    G[i, j], G[j, i] = -s, s
    return G


class _PlaneObjective:
    """Hausdorff score of a rotated disk sampling against fixed samples.

    Distances from surface samples to the disk samples split into a normal
    part and an in-plane part, so one in-plane search tree serves every
    rotation.  In the other direction the distance to the surface is
    1-Lipschitz along the disk: coarse cell representatives give a lower
    bound and only cells that could beat it are evaluated point by point.
    """

    def __init__(self, local: SampledSurface, p: np.ndarray, R: float, h: float):
        n = local.dims.n
        self.p, self.R, self.n = p, R, n
        self.rel = local.points - p
        self.tree = cKDTree(local.points)
        disk = sample_plane_disk(PlaneN.coordinate(n, local.dims.k, np.zeros_like(p)), R, h)
        coords = disk.points[:, :n]
        self.coords = coords
        self.coord_tree = cKDTree(coords)
        per_axis = max(1, int(round(np.sqrt(2 * R / h))))
        cell = np.floor((coords + R) / (2 * R / per_axis)).astype(np.int64)
        key = np.ravel_multi_index(tuple(np.clip(cell, 0, per_axis - 1).T), (per_axis,) * n)
        order = np.argsort(key, kind="stable")
        _, starts = np.unique(key[order], return_index=True)
        groups = np.split(order, starts[1:])
        reps, rads = [], []
        for g in groups:
            pts = coords[g]
            j = int(np.argmin(np.linalg.norm(pts - pts.mean(axis=0), axis=1)))
            reps.append(g[j])
            rads.append(np.linalg.norm(pts - pts[j], axis=1).max())
        self.groups = groups
        self.reps = np.array(reps)
        self.rads = np.array(rads)

    def __call__(self, basis: np.ndarray, bound: float = np.inf) -> float:
        """Score of the plane spanned by the first ``n`` columns of
        ``basis``; returns ``inf`` as soon as it is known to be ``>= bound``."""
        F = basis[:, : self.n]
        c = self.rel @ F
        normal2 = np.maximum(np.einsum("ij,ij->i", self.rel, self.rel) - np.einsum("ij,ij->i", c, c), 0)
        inplane = self.coord_tree.query(c)[0]
        d2 = np.sqrt(normal2 + inplane**2).max()
        cap = bound * self.R
        if d2 >= cap:
            return np.inf
        drep = self.tree.query(self.p + self.coords[self.reps] @ F.T)[0]
        low = max(drep.max(), d2)
        if low >= cap:
            return np.inf
        cand = np.nonzero(drep + self.rads > low)[0]
        if len(cand):
            idx = np.concatenate([self.groups[i] for i in cand])
            # neighbours beyond the cap come back as inf, which rejects the trial
            d = self.tree.query(self.p + self.coords[idx] @ F.T, distance_upper_bound=cap)[0]
            low = max(low, d.max())
        return float(low) / self.R


def _pca_basis(local: SampledSurface, p: np.ndarray) -> np.ndarray:
    X = local.points - p
    C = (X * local.weights[:, None]).T @ X
    vals, vecs = np.linalg.eigh(C)
    order = np.argsort(vals)[::-1]
    basis = vecs[:, order]
    # fix signs so the result does not depend on the eigen solver
    for c in range(basis.shape[1]):
        j = int(np.argmax(np.abs(basis[:, c])))
        if basis[j, c] < 0:
            basis[:, c] = -basis[:, c]
    return basis


def best_plane(
    S,
    p,
    R: float,
    h: Optional[float] = None,
    restarts: int = 3,
    step0: float = 0.1,
    min_step: float = 1e-4,
) -> PlanarScore:
    """Best plane through ``p`` at scale ``R``.

    Starts from the weighted principal axes of ``S & B_R(p)`` about ``p``
    and refines by coordinate search over the ``n k`` rotation angles that
    tilt a tangent direction into a normal direction.  The plane side is a
    disk quadrature with spacing ``h`` (default: the spacing of ``S``).
    """
    S = as_sampled(S)
    p = np.asarray(p, dtype=float)
    if h is None:
        h = S.spacing
    if R < 4 * h:
        raise ValueError(f"scale R={R:g} is below four sample spacings ({4 * h:g})")
    local = restrict_ball(S, p, R)
    if len(local) == 0:
        raise ValueError("no surface in ball")
    n, d = S.dims.n, S.dims.ambient
    f = _PlaneObjective(local, p, R, h)
    base = _pca_basis(local, p) if len(local) > 1 else np.eye(d)
    pca = f(base)
    pairs = [(i, j) for i in range(n) for j in range(n, d)]

    best_basis, best = base, pca
    offsets = [0.0, 3 * step0, -3 * step0][: max(1, restarts)]
    for off in offsets:
        basis = base
        for i, j in pairs:
            basis = basis @ _givens(d, i, j, off)
        val = f(basis) if off else pca
        step = step0
        while step >= min_step:
            moved = False
            for i, j in pairs:
                for sgn in (1.0, -1.0):
                    trial = basis @ _givens(d, i, j, sgn * step)
                    tv = f(trial, val)
                    if tv < val:
                        basis, val, moved = trial, tv, True
                        break
            if not moved:
                step /= 2
        if val < best:
            best_basis, best = basis, val
    frame = best_basis[:, :n]
    return PlanarScore(p, float(R), PlaneN(p, frame), float(best), float(pca))


def dyadic_scales(R_max: float, R_min: float) -> list:
    """``R_max, R_max/2, ...`` down to ``R_min``, in increasing order."""
    out = []
    R = float(R_max)
    while R >= R_min * (1 - 1e-12):
        out.append(R)
        R /= 2
    return sorted(out)


def planar_distance(
    S,
    p_samples: Optional[Sequence] = None,
    R_samples: Optional[Sequence[float]] = None,
    R_max: Optional[float] = None,
    h: Optional[float] = None,
    threads: int = 1,
    stride: int = 5,
):
    """Worst best-plane score over sampled points and scales.

    Returns ``(estimate, witness, scores)`` where ``scores`` lists every
    evaluated :class:`PlanarScore` in (p, R) order.  Pairs that fail (for
    instance an empty ball) are skipped with a warning.
    """
    S = as_sampled(S)
    if h is None:
        h = S.spacing
    if p_samples is None:
        p_samples = S.points[::stride]
    p_samples = np.atleast_2d(np.asarray(p_samples, dtype=float))
    if R_samples is None:
        if R_max is None:
            raise ValueError("give R_samples or R_max")
        R_samples = dyadic_scales(R_max, 4 * h)
    R_samples = [float(r) for r in R_samples]
    if len(p_samples) == 0 or not R_samples:
        raise ValueError("need at least one point and one scale")
    cells = [(p, R) for p in p_samples for R in R_samples]

    def one(cell):
        p, R = cell
        try:
            return best_plane(S, p, R, h=h)
        except ValueError as exc:
            return exc

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, cells))
    else:
        results = [one(c) for c in cells]
    scores = []
    for (p, R), res in zip(cells, results):
        if isinstance(res, Exception):
            warnings.warn(f"skipped p={p}, R={R:g}: {res}")
            continue
        scores.append(res)
    if not scores:
        raise ValueError("no admissible (p, R) pair")
    # first maximum in iteration order keeps the witness schedule-independent
    witness = scores[int(np.argmax([s.score for s in scores]))]
    return witness.score, witness, scores
