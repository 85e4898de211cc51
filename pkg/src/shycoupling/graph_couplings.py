"""Coupled-pair stepping on metric graphs.

Three couplings are provided. The hybrid coupling runs the pair as
independent copies while they are far apart, switches to a correlated
interpolation once the gap closes to half the minimum edge length, and to a
skew-walk phase whenever one particle sits at a vertex; the mixing profile
keeps the gap from ever closing below a quarter edge length. The isometry
coupling moves one particle and carries the other along a fixed-point-free
isometry. The two-bubble machine reproduces the hand-built coupling on the
fig36 fixture by switching between three local transition rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _graph_kernels as gk
from .metric_graph import (GraphFixture, GraphIsometry, GraphPosition,
                           MetricGraph, geodesic_distance)
from .rng import path_rng, pregenerate_step_draws


class CouplingError(ValueError):
    pass


@dataclass(frozen=True)
class SigmaProfile:
    """Mixing profile: 0 below r0/4, 1 above r0/2, linear in between."""

    r0: float

    def sigma(self, r: float) -> float:
        return min(max((4.0 * abs(r) - self.r0) / self.r0, 0.0), 1.0)

    def gamma(self, r: float) -> float:
        s = self.sigma(r + self.r0 / 4.0)
        return (math.sqrt(1.0 - s * s) - 1.0) ** 2 + s * s


def sigma(profile: SigmaProfile, r: float) -> float:
    return profile.sigma(r)


_PHASE_NAMES = {gk.PH_INDEP: "independent", gk.PH_INTERP: "interpolated",
                gk.PH_SKEW: "skew_at_vertex"}


@dataclass
class GraphCouplingState:
    """Pair positions plus the active phase record of the hybrid coupling."""

    graph: MetricGraph
    x: GraphPosition
    y: GraphPosition
    phase: str
    skew_vertex: Optional[str] = None
    anchor: Optional[tuple] = None          # (x0, y0, v0) of the active phase
    _si: np.ndarray = field(default=None, repr=False)
    _sf: np.ndarray = field(default=None, repr=False)
    _cnt: np.ndarray = field(default=None, repr=False)

    @property
    def tie_events(self) -> int:
        return int(self._cnt[gk.CNT_TIE])

    @property
    def corridor_breaches(self) -> int:
        return int(self._cnt[gk.CNT_BREACH])


def _state_from_arrays(g: MetricGraph, si, sf, cnt) -> GraphCouplingState:
    x = g.pair_to_position(si[gk.SI_XE], sf[gk.SF_XO])
    y = g.pair_to_position(si[gk.SI_YE], sf[gk.SF_YO])
    ph = _PHASE_NAMES.get(int(si[gk.SI_PHASE]), "select")
    skew_vertex = None
    anchor = None
    if si[gk.SI_PHASE] == gk.PH_SKEW:
        skew_vertex = g.vertices[int(si[gk.SI_W])]
        anchor = (x, y, float(sf[gk.SF_V0]))
    elif si[gk.SI_PHASE] == gk.PH_INTERP:
        anchor = (float(sf[gk.SF_AX]), float(sf[gk.SF_AY]), float(sf[gk.SF_V0]))
    return GraphCouplingState(g, x, y, ph, skew_vertex, anchor, si, sf, cnt)


def _check_hybrid_graph(g: MetricGraph):
    for v in g.vertices:
        if g.degree(v) < 3:
            raise CouplingError(
                f"hybrid coupling needs all vertex degrees >= 3; {v} has "
                f"degree {g.degree(v)}")


def init_hybrid_state(g: MetricGraph, x: GraphPosition,
                      y: GraphPosition) -> GraphCouplingState:
    """Validate the starting pair and select the first phase."""
    _check_hybrid_graph(g)
    d0 = geodesic_distance(g, x, y)
    if d0 <= g.r0 / 4.0:
        raise CouplingError(f"initial distance {d0} <= r0/4 = {g.r0 / 4}")
    cg = g.compiled()
    si = np.zeros(gk.SI_LEN, dtype=np.int64)
    sf = np.zeros(gk.SF_LEN, dtype=np.float64)
    cnt = np.zeros(gk.CNT_LEN, dtype=np.int64)
    si[gk.SI_PHASE] = gk.PH_SELECT
    si[gk.SI_XE], sf[gk.SF_XO] = g.position_to_pair(x)
    si[gk.SI_YE], sf[gk.SF_YO] = g.position_to_pair(y)
    gk._select_phase(cg.eu, cg.ev, cg.elen, cg.stub_ptr, cg.stub_edge,
                     cg.stub_end, cg.deg, cg.vdist, cg.r0, si, sf, cnt)
    return _state_from_arrays(g, si, sf, cnt)


def step_hybrid(g: MetricGraph, state: GraphCouplingState, dt: float,
                rng) -> GraphCouplingState:
    """One step of the phase-appropriate hybrid dynamics.

    Consumes a fixed randomness block (two normals, four uniforms) so that
    trajectories agree exactly with the batched kernel given the same
    stream.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    _check_hybrid_graph(g)
    cg = g.compiled()
    si = state._si.copy()
    sf = state._sf.copy()
    cnt = state._cnt.copy()
    bx = np.zeros(len(cg.stub_edge), dtype=np.int64)
    by = np.zeros(len(cg.stub_edge), dtype=np.int64)
    g12 = rng.standard_normal(2)
    u14 = rng.random(4)
    gk.hybrid_step(cg.eu, cg.ev, cg.elen, cg.stub_ptr, cg.stub_edge,
                   cg.stub_end, cg.deg, cg.vdist, cg.r0, dt, si, sf, bx, by,
                   cnt, g12[0], g12[1], u14[0], u14[1], u14[2], u14[3])
    if cnt[gk.CNT_ERR]:
        raise CouplingError(f"kernel error code {cnt[gk.CNT_ERR]}; reduce dt")
    return _state_from_arrays(g, si, sf, cnt)


def init_isometry_state(g: MetricGraph, iso: GraphIsometry,
                        x: GraphPosition) -> GraphCouplingState:
    """Start the coupling (X, I(X)) from x."""
    from .metric_graph import apply_isometry

    iso.validate(g)
    y = g.canonical(apply_isometry(iso, x, g))
    return GraphCouplingState(g, g.canonical(x), y, "isometry")


def step_isometry(g: MetricGraph, iso: GraphIsometry,
                  state: GraphCouplingState, dt: float,
                  rng) -> GraphCouplingState:
    """Advance X by one Brownian step and set Y to its isometric image."""
    from .graph_diffusion import step_walsh_bm
    from .metric_graph import apply_isometry

    x2 = step_walsh_bm(g, state.x, dt, rng)
    y2 = g.canonical(apply_isometry(iso, x2, g))
    return replace(state, x=x2, y=y2)


# ---------------------------------------------------------------------------
# fig36 machine
# ---------------------------------------------------------------------------

_F36_CONFIGS = {
    # (x label, y label) -> (case, side, driver)
    ("x2", "x3"): (1, 0, 0), ("x3", "x2"): (1, 0, 1),
    ("x5", "x3"): (1, 1, 0), ("x3", "x5"): (1, 1, 1),
    ("x1", "x4"): (2, 0, 0), ("x4", "x1"): (2, 0, 1),
    ("x6", "x4"): (2, 1, 0), ("x4", "x6"): (2, 1, 1),
    ("x2", "x1"): (3, 0, 0), ("x1", "x2"): (3, 0, 1),
    ("x5", "x6"): (3, 1, 0), ("x6", "x5"): (3, 1, 1),
}


class Fig36Tables:
    """Kernel index tables derived from the fig36 fixture."""

    def __init__(self, fix: GraphFixture):
        if fix.name != "fig36":
            raise CouplingError("the case machine runs on the fig36 fixture only")
        g = fix.graph
        self.fixture = fix
        self.graph = g
        cg = g.compiled()
        m = fix.markers
        ei, vi = g.edge_index, g.vertex_index
        self.arcs = np.array(
            [[ei(m["left"]["arcs"][0]), ei(m["left"]["arcs"][1])],
             [ei(m["right"]["arcs"][0]), ei(m["right"]["arcs"][1])]],
            dtype=np.int64)
        self.bridges = np.array([ei(m["left"]["bridge"]),
                                 ei(m["right"]["bridge"])], dtype=np.int64)
        self.pend = ei(m["pendant"])
        self.centers = np.array([vi(m["left"]["center"]),
                                 vi(m["right"]["center"])], dtype=np.int64)
        self.tips = np.array([vi(m["left"]["tip"]), vi(m["right"]["tip"])],
                             dtype=np.int64)
        self.mid = vi(m["mid"])
        self.pend_tip = vi(m["pendant_tip"])
        nv = len(g.vertices)
        stub_of = np.full((nv, 3), -1, dtype=np.int64)
        for side in (0, 1):
            arms_c = [self.arcs[side, 0], self.arcs[side, 1], self.bridges[side]]
            for a, e in enumerate(arms_c):
                stub_of[self.centers[side], a] = self._stub(cg, self.centers[side], e)
            for a in (0, 1):
                stub_of[self.tips[side], a] = self._stub(cg, self.tips[side],
                                                         self.arcs[side, a])
        self.stub_of = stub_of

    @staticmethod
    def _stub(cg, v, e):
        for s in range(cg.stub_ptr[v], cg.stub_ptr[v + 1]):
            if cg.stub_edge[s] == e:
                return s
        raise CouplingError("fixture edge not incident to its anchor vertex")


@dataclass
class Fig36State:
    """Machine state of the two-bubble coupling."""

    tables: Fig36Tables
    case: int
    side: int
    driver: int          # 0: the driving particle is X, 1: it is Y
    arm: int
    mark: int
    depth: float

    @property
    def phase(self) -> str:
        side = "left" if self.side == 0 else "right"
        return f"fig36:case{self.case}:{side}"

    def positions(self) -> tuple[GraphPosition, GraphPosition]:
        t = self.tables
        g = t.graph
        si = np.array([self.case, self.side, self.driver, self.arm, self.mark],
                      dtype=np.int64)
        cg = g.compiled()
        de, do, fe, fo = gk._fig36_positions(cg.eu, cg.ev, cg.elen, t.arcs,
                                             t.bridges, t.pend, t.centers,
                                             t.tips, t.mid, t.pend_tip, si,
                                             self.depth)
        dp = g.pair_to_position(de, do)
        fp = g.pair_to_position(fe, fo)
        return (dp, fp) if self.driver == 0 else (fp, dp)

    @property
    def x(self) -> GraphPosition:
        return self.positions()[0]

    @property
    def y(self) -> GraphPosition:
        return self.positions()[1]


def init_fig36_state(fix: GraphFixture, x: GraphPosition,
                     y: GraphPosition) -> Fig36State:
    """Match a starting pair to one of the machine's anchor configurations."""
    tables = Fig36Tables(fix)
    if not (x.is_vertex and y.is_vertex):
        raise CouplingError("machine anchors are labeled vertex pairs")
    key = (x.vertex, y.vertex)
    if key not in _F36_CONFIGS:
        raise CouplingError(f"configuration {key} is not reachable by the machine")
    case, side, driver = _F36_CONFIGS[key]
    return Fig36State(tables, case, side, driver, 0, 0, 0.0)


def step_fig36(state: Fig36State, dt: float, rng) -> Fig36State:
    """One step of the case machine."""
    t = state.tables
    cg = t.graph.compiled()
    si = np.array([state.case, state.side, state.driver, state.arm,
                   state.mark], dtype=np.int64)
    gauss = rng.standard_normal((1, 2))
    unif = rng.random((1, 4))
    bx = np.zeros(len(cg.stub_edge), dtype=np.int64)
    by = np.zeros(len(cg.stub_edge), dtype=np.int64)
    dev = np.zeros(1)
    mc = np.zeros(1)
    occ = np.zeros(len(t.graph.edges), dtype=np.int64)
    mind, _, _, depth = gk.fig36_path(
        cg.eu, cg.ev, cg.elen, cg.vdist, t.stub_of, t.arcs, t.bridges,
        t.pend, t.centers, t.tips, t.mid, t.pend_tip, si, dt, gauss, unif,
        bx, by, 10 ** 9, dev, mc, *_no_rec(), occ)
    if mind < 0:
        raise CouplingError("kernel error; reduce dt")
    return Fig36State(t, int(si[gk.F_CASE]), int(si[gk.F_SIDE]),
                      int(si[gk.F_DRIVER]), int(si[gk.F_ARM]),
                      int(si[gk.F_MARK]), float(depth))


# ---------------------------------------------------------------------------
# Ensemble runners
# ---------------------------------------------------------------------------

def _no_rec():
    """Recording placeholders for kernels when no path series is kept."""
    return (np.int64(10 ** 18), np.empty(0, dtype=np.int64), np.empty(0),
            np.empty(0, dtype=np.int64), np.empty(0), np.empty(0))


def _rec_arrays(n_steps: int, rec_stride: int):
    if rec_stride <= 0:
        return _no_rec()
    n = n_steps // rec_stride
    return (np.int64(rec_stride), np.empty(n, dtype=np.int64), np.empty(n),
            np.empty(n, dtype=np.int64), np.empty(n), np.empty(n))


@dataclass
class GraphPairSeries:
    """Strided (t, positions, distance) series of one coupled graph path."""

    t: np.ndarray
    xe: np.ndarray
    xo: np.ndarray
    ye: np.ndarray
    yo: np.ndarray
    dist: np.ndarray

    def to_csv(self, path, g: MetricGraph):
        import csv

        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "x_edge", "x_offset", "y_edge", "y_offset", "dist"])
            for i in range(len(self.t)):
                wr.writerow([repr(float(self.t[i])),
                             g.edges[int(self.xe[i])].id, repr(float(self.xo[i])),
                             g.edges[int(self.ye[i])].id, repr(float(self.yo[i])),
                             repr(float(self.dist[i]))])


@dataclass
class GraphEnsembleResult:
    """Per-path summaries of a coupled-pair ensemble on a graph."""

    min_dist: np.ndarray            # (n_paths,)
    min_ckpt: np.ndarray            # (n_paths, n_ckpts) running minima
    ckpt_times: np.ndarray
    branch_counts_x: np.ndarray     # (n_stubs,) pooled over paths
    branch_counts_y: np.ndarray
    phase_min_dist: Optional[np.ndarray] = None   # hybrid: min during interp/skew
    phase_max_dist: Optional[np.ndarray] = None   # hybrid: max during interp/skew
    max_dev_from_one: Optional[np.ndarray] = None  # fig36: sup |d - 1| per path
    dev_ckpt: Optional[np.ndarray] = None
    tie_events: int = 0
    corridor_breaches: int = 0
    positions: Optional[list] = None  # independent pairs: strided (edge, off) arrays
    path0: Optional[GraphPairSeries] = None
    edge_occupation_x: Optional[np.ndarray] = None

    def stub_frequencies(self, g: MetricGraph, particle: str = "x") -> dict:
        """Per-vertex branch frequencies, keyed vertex -> array over stubs."""
        cg = g.compiled()
        counts = self.branch_counts_x if particle == "x" else self.branch_counts_y
        out = {}
        for w, v in enumerate(g.vertices):
            c = counts[cg.stub_ptr[w]:cg.stub_ptr[w + 1]].astype(float)
            if c.sum() > 0:
                out[v] = c / c.sum()
        return out


def _ckpt_times(n_steps: int, dt: float, n_ckpts: int):
    stride = max(1, n_steps // n_ckpts)
    n = n_steps // stride
    return stride, dt * stride * np.arange(1, n + 1)


def run_hybrid_ensemble(g: MetricGraph, x0: GraphPosition, y0: GraphPosition,
                        dt: float, t_max: float, n_paths: int, seed: int,
                        n_ckpts: int = 64, path_offset: int = 0,
                        rec_stride: int = 0) -> GraphEnsembleResult:
    """Simulate n_paths hybrid-coupling paths on disjoint streams.

    ``path_offset`` shifts the stream indices so chunked runs reproduce the
    single-run results. When rec_stride > 0, global path 0 keeps a strided
    series for reporting.
    """
    from .graph_diffusion import DiffusionParams

    DiffusionParams(dt, t_max).validate_for(g)
    state0 = init_hybrid_state(g, x0, y0)
    cg = g.compiled()
    n_steps = int(round(t_max / dt))
    stride, times = _ckpt_times(n_steps, dt, n_ckpts)
    nk = len(times)
    mins = np.empty(n_paths)
    phase_mins = np.empty(n_paths)
    phase_maxs = np.empty(n_paths)
    min_ckpt = np.empty((n_paths, nk))
    bx = np.zeros(len(cg.stub_edge), dtype=np.int64)
    by = np.zeros(len(cg.stub_edge), dtype=np.int64)
    occ_x = np.zeros(len(g.edges), dtype=np.int64)
    ties = breaches = 0
    path0 = None
    for i in range(n_paths):
        rng = path_rng(seed, path_offset + i)
        gauss, unif = pregenerate_step_draws(rng, n_steps)
        si = state0._si.copy()
        sf = state0._sf.copy()
        cnt = np.zeros(gk.CNT_LEN, dtype=np.int64)
        mc = np.empty(nk)
        rec = (_rec_arrays(n_steps, rec_stride)
               if path_offset + i == 0 else _no_rec())
        mind, minph, maxph = gk.hybrid_path(cg.eu, cg.ev, cg.elen,
                                            cg.stub_ptr, cg.stub_edge,
                                            cg.stub_end, cg.deg, cg.vdist,
                                            cg.r0, dt, si, sf, bx, by, cnt,
                                            gauss, unif, stride, mc, *rec,
                                            occ_x)
        if cnt[gk.CNT_ERR]:
            raise CouplingError(f"kernel error on path {i}; reduce dt")
        if rec[1].size:
            tgrid = dt * rec[0] * np.arange(1, rec[1].size + 1)
            path0 = GraphPairSeries(tgrid, rec[1], rec[2], rec[3], rec[4], rec[5])
        mins[i] = mind
        phase_mins[i] = minph
        phase_maxs[i] = maxph
        min_ckpt[i] = mc
        ties += int(cnt[gk.CNT_TIE])
        breaches += int(cnt[gk.CNT_BREACH])
    return GraphEnsembleResult(mins, min_ckpt, times, bx, by,
                               phase_min_dist=phase_mins,
                               phase_max_dist=phase_maxs,
                               tie_events=ties, corridor_breaches=breaches,
                               path0=path0, edge_occupation_x=occ_x)


def run_isometry_ensemble(fix: GraphFixture, x0: GraphPosition, dt: float,
                          t_max: float, n_paths: int, seed: int,
                          n_ckpts: int = 64, path_offset: int = 0,
                          rec_stride: int = 0) -> GraphEnsembleResult:
    """Isometry coupling Y = I(X) started from (x0, I(x0))."""
    g = fix.graph
    iso = fix.isometry
    if iso is None:
        raise CouplingError(f"fixture {fix.name} has no isometry")
    cg = g.compiled()
    ne = len(g.edges)
    iso_edge = np.empty(ne, dtype=np.int64)
    iso_flip = np.empty(ne, dtype=np.int64)
    for e in g.edges:
        tid, fl = iso.edge_map[e.id]
        iso_edge[g.edge_index(e.id)] = g.edge_index(tid)
        iso_flip[g.edge_index(e.id)] = 1 if fl else 0
    n_steps = int(round(t_max / dt))
    stride, times = _ckpt_times(n_steps, dt, n_ckpts)
    nk = len(times)
    mins = np.empty(n_paths)
    min_ckpt = np.empty((n_paths, nk))
    bx = np.zeros(len(cg.stub_edge), dtype=np.int64)
    xe0, xo0 = g.position_to_pair(x0)
    path0 = None
    for i in range(n_paths):
        rng = path_rng(seed, path_offset + i)
        gauss, unif = pregenerate_step_draws(rng, n_steps)
        mc = np.empty(nk)
        rec = (_rec_arrays(n_steps, rec_stride)
               if path_offset + i == 0 else _no_rec())
        _, _, mind = gk.isometry_path(cg.eu, cg.ev, cg.elen, cg.stub_ptr,
                                      cg.stub_edge, cg.stub_end, cg.deg,
                                      cg.vdist, dt, xe0, xo0, iso_edge,
                                      iso_flip, gauss, unif, bx, stride, mc,
                                      *rec)
        if mind < 0:
            raise CouplingError(f"kernel error on path {i}; reduce dt")
        if rec[1].size:
            tgrid = dt * rec[0] * np.arange(1, rec[1].size + 1)
            path0 = GraphPairSeries(tgrid, rec[1], rec[2], rec[3], rec[4], rec[5])
        mins[i] = mind
        min_ckpt[i] = mc
    return GraphEnsembleResult(mins, min_ckpt, times, bx, bx.copy(),
                               path0=path0)


def run_independent_ensemble(g: MetricGraph, x0: GraphPosition,
                             y0: GraphPosition, dt: float, t_max: float,
                             n_paths: int, seed: int, n_ckpts: int = 64,
                             rec_stride: int = 0,
                             path_offset: int = 0) -> GraphEnsembleResult:
    """Two independent graph Brownian motions, recording strided positions."""
    cg = g.compiled()
    n_steps = int(round(t_max / dt))
    stride, times = _ckpt_times(n_steps, dt, n_ckpts)
    nk = len(times)
    if rec_stride <= 0:
        rec_stride = max(1, n_steps // 2000)
    n_rec = n_steps // rec_stride
    mins = np.empty(n_paths)
    min_ckpt = np.empty((n_paths, nk))
    bx = np.zeros(len(cg.stub_edge), dtype=np.int64)
    by = np.zeros(len(cg.stub_edge), dtype=np.int64)
    positions = []
    xe0, xo0 = g.position_to_pair(x0)
    ye0, yo0 = g.position_to_pair(y0)
    for i in range(n_paths):
        rng = path_rng(seed, path_offset + i)
        gauss, unif = pregenerate_step_draws(rng, n_steps)
        mc = np.empty(nk)
        rxe = np.empty(n_rec, dtype=np.int64)
        rxo = np.empty(n_rec)
        rye = np.empty(n_rec, dtype=np.int64)
        ryo = np.empty(n_rec)
        out = gk.independent_pair_path(cg.eu, cg.ev, cg.elen, cg.stub_ptr,
                                       cg.stub_edge, cg.stub_end, cg.deg,
                                       cg.vdist, dt, xe0, xo0, ye0, yo0,
                                       gauss, unif, bx, by, rec_stride,
                                       rxe, rxo, rye, ryo, stride, mc)
        if out[4] < 0:
            raise CouplingError(f"kernel error on path {i}; reduce dt")
        mins[i] = out[4]
        min_ckpt[i] = mc
        positions.append((rxe, rxo, rye, ryo))
    return GraphEnsembleResult(mins, min_ckpt, times, bx, by,
                               positions=positions)


def run_fig36_ensemble(fix: GraphFixture, dt: float, t_max: float,
                       n_paths: int, seed: int, n_ckpts: int = 64,
                       path_offset: int = 0,
                       rec_stride: int = 0) -> GraphEnsembleResult:
    """The case machine from its (x2, x3) anchor, one stream per path."""
    tables = Fig36Tables(fix)
    g = fix.graph
    cg = g.compiled()
    n_steps = int(round(t_max / dt))
    stride, times = _ckpt_times(n_steps, dt, n_ckpts)
    nk = len(times)
    mins = np.empty(n_paths)
    maxdev = np.empty(n_paths)
    dev_ckpt = np.empty((n_paths, nk))
    min_ckpt = np.empty((n_paths, nk))
    bx = np.zeros(len(cg.stub_edge), dtype=np.int64)
    by = np.zeros(len(cg.stub_edge), dtype=np.int64)
    occ_x = np.zeros(len(g.edges), dtype=np.int64)
    path0 = None
    for i in range(n_paths):
        rng = path_rng(seed, path_offset + i)
        gauss, unif = pregenerate_step_draws(rng, n_steps)
        si = np.array([1, 0, 0, 0, 0], dtype=np.int64)
        dc = np.empty(nk)
        mc = np.empty(nk)
        rec = (_rec_arrays(n_steps, rec_stride)
               if path_offset + i == 0 else _no_rec())
        mind, maxd, dev, _ = gk.fig36_path(
            cg.eu, cg.ev, cg.elen, cg.vdist, tables.stub_of, tables.arcs,
            tables.bridges, tables.pend, tables.centers, tables.tips,
            tables.mid, tables.pend_tip, si, dt, gauss, unif, bx, by,
            stride, dc, mc, *rec, occ_x)
        if mind < 0:
            raise CouplingError(f"kernel error on path {i}; reduce dt")
        if rec[1].size:
            tgrid = dt * rec[0] * np.arange(1, rec[1].size + 1)
            path0 = GraphPairSeries(tgrid, rec[1], rec[2], rec[3], rec[4], rec[5])
        mins[i] = mind
        maxdev[i] = dev
        dev_ckpt[i] = dc
        min_ckpt[i] = mc
    return GraphEnsembleResult(mins, min_ckpt, times, bx, by,
                               max_dev_from_one=maxdev, dev_ckpt=dev_ckpt,
                               path0=path0, edge_occupation_x=occ_x)
