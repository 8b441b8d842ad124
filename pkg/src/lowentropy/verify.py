"""Acceptance harness: fixed, seeded scenarios with one pass/fail row each."""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import expanders as xp
from .csvio import format_cell, render_csv
from .entropy import EntropySearch, GaussianCenter, entropy_sup, gaussian_tail, truncation_radius
from .expr import format_real
from .geom import (
    Dims,
    GridGraph,
    PlaneN,
    circle_polyline,
    link_distance,
    sample_plane_disk,
    sphere_profile,
    unit_ball_volume,
)
from .mcf import (
    FlowConfig,
    clearing_out_probe,
    curvature_bound_probe,
    flow_graph_mcf,
    flow_polyline_csf,
    flow_profile_mcf,
    monotonicity_probe,
)
from .reifenberg import planar_distance

SUITES = {
    "entropy": (1, 2, 3, 12),
    "flow": (4, 5, 6, 7),
    "reifenberg": (8,),
    "expander": (9, 10, 11),
}
SUITES["all"] = tuple(sorted(i for ids in SUITES.values() for i in ids))

FAMILY = (0.4, 0.2, 0.1, 0.05)
CIRCLE_H = 0.01
CIRCLE_RECORD = 0.005
GRAPH_H = 0.01
GRAPH_RECORD = 0.01
EXPANDER_TIMES = tuple(np.geomspace(1e-1, 1e-4, 8))
EXPANDER_R = 5.0
EXPANDER_SPACING = 2e-4


@dataclass(frozen=True)
class CriterionResult:
    id: int
    name: str
    measured: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class VerifyReport:
    suite: str
    seed: int
    results: tuple = field(default_factory=tuple)

    @property
    def overall(self) -> bool:
        return all(r.passed for r in self.results)

    HEADER = ("criterion", "name", "measured", "threshold", "status", "seed", "detail")

    def rows(self):
        for r in self.results:
            yield (r.id, r.name, r.measured, r.threshold, "pass" if r.passed else "fail", self.seed, r.detail)

    def to_csv(self) -> str:
        return render_csv(self.HEADER, self.rows())

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            lines.append(
                f"[{status}] criterion {r.id:2d} {r.name}: measured {format_cell(r.measured)}"
                f" (threshold {format_cell(r.threshold)}) {r.detail}".rstrip()
            )
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'} (suite {self.suite}, seed {self.seed})")
        return "\n".join(lines) + "\n"


def _fmt(*pairs) -> str:
    return "; ".join(f"{k}={format_real(v) if isinstance(v, float) else v}" for k, v in pairs)


class _Artifacts:
    """Expensive shared inputs, built once under a per-key lock."""

    def __init__(self):
        self._lock = threading.Lock()
        self._locks: dict = {}
        self._values: dict = {}

    def get(self, key, build):
        with self._lock:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            if key not in self._values:
                self._values[key] = build()
            return self._values[key]

    def circle_track(self):
        return self.get(
            "circle",
            lambda: flow_polyline_csf(
                circle_polyline(1.0, CIRCLE_H), FlowConfig(T=0.6, record_dt=CIRCLE_RECORD, h_min=CIRCLE_H)
            ),
        )

    def graph_track(self, a):
        def build():
            g = GridGraph.from_function(lambda x: a * np.cos(x), [-math.pi / 2], [math.pi / 2], GRAPH_H)
            return flow_graph_mcf(g, FlowConfig(T=1.0, record_dt=GRAPH_RECORD))

        return self.get(("graph", a), build)

    def sphere_track(self):
        return self.get(
            "sphere",
            lambda: flow_profile_mcf(sphere_profile(2.0, 2, 0.05), FlowConfig(T=1.2, record_dt=0.01, h_min=0.05)),
        )

    def expander(self):
        return self.get("expander", lambda: xp.solve_expander_curve(1.0, 520.0, 1e-3))

    def expander_cone(self):
        return self.get(
            "cone",
            lambda: xp.cone_extract(self.expander(), EXPANDER_TIMES, EXPANDER_R, EXPANDER_SPACING)[0],
        )


def _random_similarity(rng: np.random.Generator, d: int):
    A = rng.normal(size=(d, d))
    Q, Rm = np.linalg.qr(A)
    Q = Q * np.sign(np.diag(Rm))
    return float(rng.uniform(0.5, 2.0)), Q, rng.normal(size=d)


# ---------------------------------------------------------------------------
# criteria


def c1_plane_entropy(art, seed):
    rng = np.random.default_rng(seed)
    devs, parts = [], []
    for n, k in ((1, 1), (2, 1), (1, 2)):
        dims = Dims(n, k)
        R_T = truncation_radius(dims, 1.0, 1e-6)
        h = 0.05 if n == 1 else 0.25
        S = sample_plane_disk(PlaneN.coordinate(n, k), R_T + 2.0, h)
        axes = [np.linspace(-1, 1, 5)] * n + [np.linspace(-0.5, 0.5, 3)] * k
        mesh = np.meshgrid(*axes, indexing="ij")
        centers = np.stack([m.ravel() for m in mesh], axis=1)
        t0s = np.geomspace(0.25, 1.0, 7)
        search = EntropySearch(centers, t0s, np.eye(n + k), np.array([0.5] * n + [0.5] * k), float(np.log(t0s[1] / t0s[0])))
        rho, Q, y = _random_similarity(rng, n + k)
        est = entropy_sup(S.transformed(rho, Q, y), search.transported(rho, Q, y))
        devs.append(abs(est.value - 1))
        parts.append((f"lambda{n}{k}", est.value))
    dev = max(devs)
    return "plane entropy", dev, 1e-3, dev <= 1e-3, _fmt(*parts)


def c2_circle_entropy(art, seed):
    est = entropy_sup(circle_polyline(1.0, 0.01).to_sampled())
    target = math.sqrt(2 * math.pi / math.e)
    dev = abs(est.value - target)
    dt = abs(est.argmax.t0 - 0.5)
    dx = float(np.linalg.norm(est.argmax.x0))
    ok = dev <= 1e-3 and dt <= 1e-2 and dx <= 1e-2
    return "circle entropy", dev, 1e-3, ok, _fmt(("lambda", est.value), ("t0", est.argmax.t0), ("x0_offset", dx))


def c3_sphere_entropy(art, seed):
    est = entropy_sup(sphere_profile(2.0, 2, 0.05).to_sampled())
    dev = abs(est.value - 4 / math.e)
    return "sphere entropy", dev, 5e-3, dev <= 5e-3, _fmt(("lambda", est.value), ("t0", est.argmax.t0))


def c4_shrinking_circle(art, seed):
    M = art.circle_track()
    worst = 0.0
    for t, state in zip(M.times, M.states):
        exact = math.sqrt(max(1 - 2 * t, 0.0))
        if exact < 5 * CIRCLE_H:
            continue
        v = state.vertices
        r = float(np.linalg.norm(v - v.mean(axis=0), axis=1).mean())
        worst = max(worst, abs(r - exact) / exact)
    ext = M.extinction_time
    ext_err = abs(ext - 0.5) if ext is not None else math.inf
    ok = worst <= 1e-3 and ext_err <= 2e-3
    return "shrinking circle law", worst, 1e-3, ok, _fmt(("extinction", float(ext) if ext is not None else "none"), ("extinction_error", ext_err))


def c5_monotonicity(art, seed):
    M = art.circle_track()
    viols = []
    # scales chosen so that t - r^2 falls on recorded times
    r_ext = np.sqrt(np.arange(12, 101) * CIRCLE_RECORD)
    viols.append(monotonicity_probe(M, [0.0, 0.0], 0.5, r_ext).max_violation)
    p = math.sqrt(1 - 2 * 0.3)
    viols.append(monotonicity_probe(M, [p, 0.0], 0.3, np.sqrt(np.arange(2, 61) * CIRCLE_RECORD)).max_violation)
    for a in FAMILY:
        G = art.graph_track(a)
        mid = G.states[-1].u.shape[0] // 2
        x0 = [0.0, float(G.states[-1].u[mid, 0])]
        r_g = np.sqrt(np.arange(1, 7) * GRAPH_RECORD)
        viols.append(monotonicity_probe(G, x0, 1.0, r_g).max_violation)
    worst = max(viols)
    return "Huisken monotonicity", worst, 1e-4, worst <= 1e-4, _fmt(("probes", len(viols)))


def c6_clearing_out(art, seed):
    ratios = []
    M = art.circle_track()
    for t0, r in ((0.1, 0.2), (0.2, 0.15), (0.3, 0.1)):
        ratios.append(clearing_out_probe(M, [math.sqrt(1 - 2 * t0), 0.0], t0, r)[2])
    for a in FAMILY:
        G = art.graph_track(a)
        i = G.index_at(0.5)
        mid = G.states[i].u.shape[0] // 2
        ratios.append(clearing_out_probe(G, [0.0, float(G.states[i].u[mid, 0])], 0.5, 0.25)[2])
    S = art.sphere_track()
    ratio_1 = min(ratios)
    x0 = [math.sqrt(4 - 4 * 0.25), 0.0, 0.0]
    ratio_2 = clearing_out_probe(S, x0, 0.25, 0.3)[2]
    margin = min(ratio_1 / (unit_ball_volume(1) / 2), ratio_2 / (unit_ball_volume(2) / 2))
    return "two-sided clearing out", margin, 1.0, margin >= 1.0, _fmt(("min_ratio_n1", ratio_1), ("ratio_n2", ratio_2))


def c7_curvature_trend(art, seed):
    consts = [curvature_bound_probe(art.graph_track(a), [0.0, 0.0], 1.0).constant for a in FAMILY]
    worst = max(b / a for a, b in zip(consts, consts[1:]))
    return "curvature bound trend", worst, 1.0, worst < 1.0, _fmt(*[(f"C(a={a})", c) for a, c in zip(FAMILY, consts)])


def c8_stability(art, seed):
    ent, pd = [], []
    R_samples = [0.0625, 0.125, 0.25]
    for a in FAMILY:
        g = GridGraph.from_function(lambda x: a * np.cos(x), [-math.pi / 2], [math.pi / 2], 5e-4).to_sampled()
        ent.append(entropy_sup(g).value)
        inner = g.points[np.abs(g.points[:, 0]) <= math.pi / 2 - 0.3]
        ps = inner[:: len(inner) // 40]
        pd.append(planar_distance(g, ps, R_samples)[0])
    low = [d for e, d in zip(ent, pd) if e <= 1.001]
    low_max = max(low) if low else math.inf
    decreasing = all(b < a for a, b in zip(ent, ent[1:])) and all(b < a for a, b in zip(pd, pd[1:]))

    # point-set comparison has a floor of about spacing / (2 R), so the plane
    # is probed at scales of at least 64 spacings
    plane = sample_plane_disk(PlaneN.coordinate(1, 1), 10.24, 0.01)
    ps = plane.points[np.abs(plane.points[:, 0]) <= 7.68][::50]
    pd_plane = planar_distance(plane, ps, [0.64, 1.28, 2.56])[0]
    circle = circle_polyline(1.0, 0.01).to_sampled()
    pd_circle = planar_distance(circle, circle.points[::100], R_max=200.0)[0]
    ok = decreasing and low_max <= 0.05 and pd_plane <= 0.02 and pd_circle >= 0.9
    detail = _fmt(
        *[(f"excess(a={a})", e - 1) for a, e in zip(FAMILY, ent)],
        *[(f"dist(a={a})", d) for a, d in zip(FAMILY, pd)],
        ("plane", pd_plane),
        ("circle", pd_circle),
        ("strictly_decreasing", decreasing),
    )
    return "rigidity/stability trend", low_max, 0.05, ok, detail


def c9_expander_rate(art, seed):
    fit = xp.convergence_rate_fit(art.expander(), art.expander_cone(), EXPANDER_R, EXPANDER_TIMES, EXPANDER_SPACING)
    dev = abs(fit.p - 0.5)
    return "expander rate", dev, 0.05, dev <= 0.05, _fmt(("p", fit.p), ("C_fit", fit.C_fit), ("samples", sum(fit.used)))


def c10_cone_scale(art, seed):
    C1 = art.expander_cone()
    C2 = xp.cone_extract(art.expander().scaled(2.0), EXPANDER_TIMES, EXPANDER_R, EXPANDER_SPACING)[0]
    ang = link_distance(C1, C2)
    return "cone scale invariance", ang, 1e-3, ang <= 1e-3, _fmt(("directions", len(C1.link)))


def c11_area_ratio(art, seed):
    C = art.expander_cone()
    ratios = []
    for y in [np.zeros(2)] + [s * w for w in C.link for s in (1.0, 2.5)]:
        ratios += xp.area_ratio_probe(C, y, 1.0, EXPANDER_TIMES)
    P = xp.solve_expander_profile(2, 1.0, 40.0, 2e-3)
    ts = np.geomspace(1e-1, 1e-2, 4)
    C2 = xp.cone_extract(P, ts, EXPANDER_R, 0.02)[0]
    u = C2.link[0]
    for y in (np.zeros(3), u):
        ratios += xp.area_ratio_probe(C2, y, 1.0, ts)
    worst = min(ratios)
    return "cone area ratio", worst, 0.4, worst >= 0.4, _fmt(("probes", len(ratios)), ("max", max(ratios)))


def c12_tail_control(art, seed):
    eps = 1e-6
    worst = 0.0
    parts = []
    line = sample_plane_disk(PlaneN.coordinate(1, 1), 200.0, 0.05)
    R = truncation_radius(Dims(1, 1), 1.0, eps)
    tails = [gaussian_tail(line, GaussianCenter([0.0, 0.0], t0), R) for t0 in (0.25, 1.0, 16.0)]
    parts.append(("plane", max(tails)))
    circle = circle_polyline(1.0, 0.01).to_sampled()
    R = truncation_radius(Dims(1, 1), 1.53, eps)
    tails += [gaussian_tail(circle, GaussianCenter([0.0, 0.0], t0), R) for t0 in (0.01, 0.5, 4.0)]
    parts.append(("circle", max(tails[-3:])))
    E = art.expander().sampled(520.0, 0.01)
    R = truncation_radius(Dims(1, 1), 1.2, eps)
    tails += [gaussian_tail(E, GaussianCenter(x0, t0), R) for x0, t0 in (([0.0, 0.0], 1.0), ([0.0, 1.0], 4.0), ([3.0, 3.0], 9.0))]
    parts.append(("expander", max(tails[-3:])))
    worst = max(tails)
    return "tail control", worst, eps, worst <= eps, _fmt(*parts)


CRITERIA = {
    1: c1_plane_entropy,
    2: c2_circle_entropy,
    3: c3_sphere_entropy,
    4: c4_shrinking_circle,
    5: c5_monotonicity,
    6: c6_clearing_out,
    7: c7_curvature_trend,
    8: c8_stability,
    9: c9_expander_rate,
    10: c10_cone_scale,
    11: c11_area_ratio,
    12: c12_tail_control,
}


def _run_one(cid, art, seed) -> CriterionResult:
    try:
        name, measured, threshold, ok, detail = CRITERIA[cid](art, seed)
        return CriterionResult(cid, name, float(measured), float(threshold), bool(ok), detail)
    except Exception as exc:  # a crash is a failure, the harness continues
        return CriterionResult(cid, CRITERIA[cid].__name__, math.nan, math.nan, False, f"error: {type(exc).__name__}: {exc}")


def run_verify(suite: str = "all", threads: int = 1, seed: int = 0) -> VerifyReport:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    ids = SUITES[suite]
    art = _Artifacts()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda c: _run_one(c, art, seed), ids))
    else:
        results = [_run_one(c, art, seed) for c in ids]
    return VerifyReport(suite, int(seed), tuple(sorted(results, key=lambda r: r.id)))
