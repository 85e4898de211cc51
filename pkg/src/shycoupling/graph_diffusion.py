"""Single-particle simulation: graph Brownian motion, skew walks, first-passage MC.

Graph Brownian motion steps one-dimensionally along the current edge; when
a step crosses a vertex of degree k the overshoot continues into one of the
k incident edge stubs chosen uniformly (a self-loop contributes two stubs,
a degree-1 vertex reflects). Skew Brownian motion is simulated as the
lattice walk that steps up from the origin with probability (1+beta)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _graph_kernels as gk
from .metric_graph import GraphError, GraphPosition, MetricGraph


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DiffusionParams:
    """Step size and horizon for graph diffusion, in time units (seconds)."""

    dt: float
    t_max: float
    scheme: str = "euler-overshoot"

    def validate_for(self, g: MetricGraph):
        if not (self.dt > 0 and self.t_max > 0):
            raise ValueError("dt and t_max must be positive")
        if self.dt > (g.r0 / 10.0) ** 2:
            raise ValueError(
                f"dt={self.dt} too coarse: needs dt <= (r0/10)^2 = {(g.r0 / 10) ** 2}"
            )


@dataclass(frozen=True)
class SkewParams:
    """Skewness of the one-dimensional skew walk; |beta| <= 1."""

    beta: float

    def __post_init__(self):
        if abs(self.beta) > 1:
            raise ValueError("|beta| must be <= 1")


def beta_for_degree(k: int) -> float:
    """Skewness making all k branch directions at a vertex equiprobable.

    Solves (1 - beta) / (1 + beta) = k - 1, i.e. beta = -(k - 2)/k, so the
    positive side carries probability (1 + beta)/2 = 1/k.
    """
    if k < 3:
        raise ValueError("beta_for_degree needs vertex degree k >= 3")
    return -(k - 2.0) / k


def step_skew(u: float, beta: float, dt: float, rng) -> float:
    """One lattice step of skew Brownian motion on the sqrt(dt) grid.

    Away from 0 the walk is symmetric; from 0 it steps up with probability
    (1 + beta)/2. beta = 1 gives the walk reflected at 0. Positions within
    half a lattice step of 0 count as 0 and are snapped there, which keeps
    accumulated rounding from drifting the walk off the lattice.
    """
    if abs(beta) > 1:
        raise ValueError("|beta| must be <= 1")
    h = math.sqrt(dt)
    if abs(u) < 0.5 * h:
        u = 0.0
        p_up = 0.5 * (1.0 + beta)
    else:
        p_up = 0.5
    out = u + h if rng.random() < p_up else u - h
    return 0.0 if abs(out) < 0.5 * h else out


def step_walsh_bm(g: MetricGraph, p: GraphPosition, dt: float, rng) -> GraphPosition:
    """One Euler step of Brownian motion on the graph."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    cg = g.compiled()
    e, off = g.position_to_pair(p)
    xi = rng.standard_normal() * math.sqrt(dt)
    dummy = np.zeros(len(cg.stub_edge), dtype=np.int64)
    e2, off2, err = gk.walsh_move(cg.eu, cg.ev, cg.elen, cg.stub_ptr,
                                  cg.stub_edge, cg.stub_end, cg.deg,
                                  e, off, xi, rng.random(), rng.random(),
                                  dummy)
    if err:
        raise SimulationError("step crossed more than two vertices; reduce dt")
    return g.pair_to_position(e2, off2)


def graph_eccentricity(g: MetricGraph, start: GraphPosition) -> float:
    """Largest geodesic distance from ``start`` to any point of the graph."""
    cg = g.compiled()
    se, so = g.position_to_pair(start)
    ecc = 0.0
    for j in range(len(cg.elen)):
        du = gk.pos_dist(cg.eu, cg.ev, cg.elen, cg.vdist, se, so, j, 0.0)
        dv = gk.pos_dist(cg.eu, cg.ev, cg.elen, cg.vdist, se, so, j,
                         float(cg.elen[j]))
        # peak of the lower envelope min(du + x, dv + L - x) over the edge
        ecc = max(ecc, 0.5 * (du + dv + cg.elen[j]))
    return ecc


@dataclass
class FirstHitEstimate:
    probability: float
    half_width_95: float       # normal-approximation 95% half width
    n_paths: int
    n_hits: int
    t: float
    r: float
    regime_ok: bool            # r^2 > t, the regime of the analytic bounds


def first_hit_mc(g: MetricGraph, start: GraphPosition, r: float, t: float,
                 params: DiffusionParams, rng, n_paths: int) -> FirstHitEstimate:
    """Monte Carlo estimate of P(exit the ball B(start, r) before time t).

    Paths are stepped in a vectorized batch. A path counts as exited when
    its end-of-step position is at distance >= r, or when it touches a
    vertex at distance >= r while a crossing is resolved (without this, a
    reflecting extremity exactly at distance r would never register).
    Within-edge crossings are only observed at step ends, a documented
    O(sqrt(dt)) bias.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    params.validate_for(g)
    if t <= 0:
        raise ValueError("t must be positive")
    ecc = graph_eccentricity(g, start)
    if r > ecc:
        raise GraphError(
            f"ball of radius {r} covers the graph (eccentricity {ecc:.6g}): "
            "complement is empty")

    cg = g.compiled()
    se, so = g.position_to_pair(start)
    ne = len(cg.elen)
    dist_u = np.empty(ne)
    dist_v = np.empty(ne)
    for j in range(ne):
        dist_u[j] = gk.pos_dist(cg.eu, cg.ev, cg.elen, cg.vdist, se, so, j, 0.0)
        dist_v[j] = gk.pos_dist(cg.eu, cg.ev, cg.elen, cg.vdist, se, so, j,
                                float(cg.elen[j]))
    dist_vertex = np.empty(len(cg.deg))
    for w in range(len(cg.deg)):
        s = cg.stub_ptr[w]
        j = int(cg.stub_edge[s])
        dist_vertex[w] = dist_u[j] if cg.stub_end[s] == 0 else dist_v[j]

    n_steps = int(round(t / params.dt))
    h = math.sqrt(params.dt)
    e = np.full(n_paths, se, dtype=np.int64)
    off = np.full(n_paths, so, dtype=np.float64)
    hit = np.zeros(n_paths, dtype=bool)

    elen = cg.elen
    at_vertex = (off == 0.0) | (off == elen[e])
    for step in range(n_steps):
        xi = rng.standard_normal(n_paths) * h
        if step == 0 and at_vertex.any():
            # departures from a vertex branch immediately
            off = np.where(at_vertex, np.where(off == 0.0, -np.abs(xi),
                                               elen[e] + np.abs(xi)), off + xi)
        else:
            off = off + xi
        for _ in range(4):
            under = off < 0.0
            over = off > elen[e]
            crossing = under | over
            if not crossing.any():
                break
            idx = np.nonzero(crossing)[0]
            w = np.where(under[idx], cg.eu[e[idx]], cg.ev[e[idx]])
            overshoot = np.where(under[idx], -off[idx], off[idx] - elen[e[idx]])
            hit[idx] |= dist_vertex[w] >= r
            pick = cg.stub_ptr[w] + (rng.random(idx.size) * cg.deg[w]).astype(np.int64)
            pick = np.minimum(pick, cg.stub_ptr[w + 1] - 1)
            enew = cg.stub_edge[pick]
            e[idx] = enew
            off[idx] = np.where(cg.stub_end[pick] == 0, overshoot,
                                elen[enew] - overshoot)
        else:
            raise SimulationError("step crossed more than four vertices; reduce dt")
        d = np.minimum(dist_u[e] + off, dist_v[e] + (elen[e] - off))
        same = e == se
        if same.any():
            direct = np.abs(off - so)
            d = np.where(same, np.minimum(d, direct), d)
        hit |= d >= r
        if hit.all():
            break

    n_hits = int(hit.sum())
    p = n_hits / n_paths
    hw = 1.96 * math.sqrt(max(p * (1.0 - p), 1.0 / n_paths) / n_paths)
    return FirstHitEstimate(probability=p, half_width_95=hw, n_paths=n_paths,
                            n_hits=n_hits, t=t, r=r, regime_ok=r * r > t)


def skew_positive_fraction(beta: float, dt: float, t: float, n_paths: int,
                           rng) -> float:
    """Fraction of lattice skew walks started at 0 that are positive at time t."""
    if abs(beta) > 1:
        raise ValueError("|beta| must be <= 1")
    n_steps = int(round(t / dt))
    p_up0 = 0.5 * (1.0 + beta)
    u = np.zeros(n_paths, dtype=np.int64)
    for _ in range(n_steps):
        draws = rng.random(n_paths)
        thresh = np.where(u == 0, p_up0, 0.5)
        u += np.where(draws < thresh, 1, -1)
    return float(np.mean(u > 0))
