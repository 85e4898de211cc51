"""Analytic bound evaluators and ensemble diagnostics.

The exit-probability bounds pin their constants explicitly: c0 is the
Gaussian tail integral from 1 computed by quadrature, and t0 = r0^2/(2 ln 4)
is the largest horizon with 1 - 2 exp(-r0^2 / (2 t0)) >= 1/2. Shyness
verdicts are empirical survival-curve summaries, never proofs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, stats

from .metric_graph import GraphFixture, GraphPosition


@lru_cache(maxsize=1)
def gauss_tail_from_one() -> float:
    """c0 = integral_1^inf exp(-u^2/2) du, by adaptive quadrature."""
    val, _ = integrate.quad(lambda u: math.exp(-0.5 * u * u), 1.0, np.inf)
    return val


def horizon_t0(r0: float) -> float:
    """Largest t0 with 1 - 2 exp(-r0^2/(2 t0)) >= 1/2, i.e. r0^2/(2 ln 4)."""
    return r0 * r0 / (2.0 * math.log(4.0))


@dataclass(frozen=True)
class BoundPair:
    """Lower/upper exit-probability bounds with their regime flags."""

    lower: float
    upper: float
    log_upper: float
    r2_gt_t: bool
    t_lt_t0: Optional[bool] = None

    @property
    def upper_clipped(self) -> float:
        return min(1.0, self.upper)

    @property
    def in_regime(self) -> bool:
        return self.r2_gt_t and (self.t_lt_t0 is not False)

    def contains(self, p: float) -> bool:
        return self.lower <= p <= self.upper_clipped


def lemma34_bounds(t: float, r: float, r0: float, m0: int) -> BoundPair:
    """Sandwich for the probability that graph Brownian motion exits B(x, r)
    before time t, on graphs with edge lengths >= r0 and degrees <= m0.

    lower = (c0/m0 * sqrt(t/2pi) / (2r))^floor(r/r0) * exp(-r^2/2t)
    upper = (m0^floor(r/r0))! * sqrt(2t/pi) / r * exp(-r^2/2t)

    The upper factorial is evaluated in log space; regime flags record
    whether r^2 > t and t < t0(r0). Out-of-regime inputs are flagged, not
    fatal.
    """
    if min(t, r, r0) <= 0 or m0 < 1:
        raise ValueError("t, r, r0 must be positive and m0 >= 1")
    k = math.floor(r / r0)
    expo = -r * r / (2.0 * t)
    c0 = gauss_tail_from_one()
    lower = (c0 / m0 * math.sqrt(t / (2 * math.pi)) / (2 * r)) ** k * math.exp(expo)
    log_upper = (math.lgamma(m0 ** k + 1)
                 + 0.5 * math.log(2 * t / math.pi) - math.log(r) + expo)
    upper = math.exp(log_upper) if log_upper < 700 else math.inf
    return BoundPair(lower=lower, upper=upper, log_upper=log_upper,
                     r2_gt_t=r * r > t, t_lt_t0=t < horizon_t0(r0))


def gaussian_exit_bounds(t: float, r: float) -> BoundPair:
    """Sandwich for P(one-dimensional Brownian motion hits level r before t).

    Valid in the regime r >= sqrt(t); the exact value 2(1 - Phi(r/sqrt(t)))
    lies between sqrt(t/2pi)/r e^{-r^2/2t} and twice that.
    """
    if t <= 0 or r <= 0:
        raise ValueError("t and r must be positive")
    base = math.sqrt(t / (2 * math.pi)) / r * math.exp(-r * r / (2 * t))
    return BoundPair(lower=base, upper=2.0 * base,
                     log_upper=math.log(2 * base) if base > 0 else -math.inf,
                     r2_gt_t=r * r >= t)


def gaussian_exit_exact(t: float, r: float) -> float:
    """Reflection-principle value 2(1 - Phi(r/sqrt(t)))."""
    return 2.0 * (1.0 - stats.norm.cdf(r / math.sqrt(t)))


# ---------------------------------------------------------------------------
# Shyness statistics
# ---------------------------------------------------------------------------


@dataclass
class ShynessReport:
    """Empirical min-distance survival statistics for a coupled ensemble."""

    eps_grid: np.ndarray
    survival: np.ndarray            # P(min over [0, T] > eps) per eps
    survival_ci: np.ndarray         # (len(eps), 2) 95% Wilson bands
    min_dist: np.ndarray            # per-path minima at the horizon
    ckpt_times: np.ndarray
    median_min_by_ckpt: np.ndarray  # median running minimum per checkpoint
    verdict: str                    # shy-consistent | non-shy-consistent | inconclusive

    def survival_at(self, eps: float) -> float:
        i = int(np.argmin(np.abs(self.eps_grid - eps)))
        return float(self.survival[i])


def _wilson(p_hat: float, n: int) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    z = 1.96
    denom = 1 + z * z / n
    mid = (p_hat + z * z / (2 * n)) / denom
    half = z * math.sqrt(p_hat * (1 - p_hat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, mid - half), min(1.0, mid + half)


def shyness_statistics(min_ckpt: np.ndarray, ckpt_times: np.ndarray,
                       eps_grid: Sequence[float]) -> ShynessReport:
    """Summarize running pair-distance minima into survival curves.

    ``min_ckpt`` holds, per path, the running minimum distance at each
    checkpoint time (so rows are nonincreasing). The verdict is
    shy-consistent when the median running minimum stabilizes well above
    zero over the second half of the run, non-shy-consistent when it decays
    toward zero, and inconclusive otherwise.
    """
    min_ckpt = np.asarray(min_ckpt, dtype=float)
    if min_ckpt.ndim != 2 or min_ckpt.shape[0] == 0:
        raise ValueError("need a nonempty (paths, checkpoints) matrix")
    ckpt_times = np.asarray(ckpt_times, dtype=float)
    if min_ckpt.shape[1] != ckpt_times.shape[0]:
        raise ValueError("checkpoint times do not match the matrix")
    eps_grid = np.asarray(list(eps_grid), dtype=float)
    finals = min_ckpt[:, -1]
    n = len(finals)
    survival = np.array([(finals > e).mean() for e in eps_grid])
    ci = np.array([_wilson(p, n) for p in survival])
    med = np.median(min_ckpt, axis=0)
    half = med[len(med) // 2]
    last = med[-1]
    start = med[0]
    if last < 1e-9:
        verdict = "non-shy-consistent"
    elif last > 0.05 * start and last > 0.8 * half:
        verdict = "shy-consistent"
    elif last < 0.5 * half or last < 0.05 * start:
        verdict = "non-shy-consistent"
    else:
        verdict = "inconclusive"
    return ShynessReport(eps_grid=eps_grid, survival=survival,
                         survival_ci=ci, min_dist=finals,
                         ckpt_times=ckpt_times, median_min_by_ckpt=med,
                         verdict=verdict)


# ---------------------------------------------------------------------------
# Quadratic-variation diagnostics
# ---------------------------------------------------------------------------


@dataclass
class VariationDiagnostics:
    """Realized quadratic variations of a coupled pair and growth fits."""

    t: np.ndarray
    qv_diff: np.ndarray         # realized <X-Y, X-Y>, from driver increments
    qv_r2: np.ndarray           # realized <|X-Y|^2>, from the distance series
    diff_rate: float            # qv_diff at the horizon divided by T
    r2_rate: float
    growth_exponent_diff: float
    growth_exponent_r2: float
    phi_violation_fraction: Optional[float] = None


def _loglog_slope(t: np.ndarray, series: np.ndarray) -> float:
    mask = (t > 0) & (series > 0)
    if mask.sum() < 2:
        return float("nan")
    lt, ls = np.log(t[mask]), np.log(series[mask])
    return float(np.polyfit(lt, ls, 1)[0])


def variation_diagnostics(path, phi: Optional[Callable[[float], float]] = None
                          ) -> VariationDiagnostics:
    """Compute realized variations of a PairPath from its retained increments.

    When ``phi`` is supplied, reports the fraction of steps violating
    d<|X-Y|^2> >= phi(dist) dt.
    """
    t = path.t[1:]
    d_diff = path.dbx - path.dby
    inc_diff = np.sum(d_diff * d_diff, axis=-1)
    qv_diff = np.cumsum(inc_diff)
    r2 = path.dist ** 2
    inc_r2 = np.diff(r2) ** 2
    qv_r2 = np.cumsum(inc_r2)
    T = t[-1] if len(t) else float("nan")
    dt = path.t[1] - path.t[0] if len(path.t) > 1 else float("nan")
    viol = None
    if phi is not None:
        needed = np.array([phi(v) for v in path.dist[:-1]]) * dt
        viol = float(np.mean(inc_r2 < needed))
    return VariationDiagnostics(
        t=t, qv_diff=qv_diff, qv_r2=qv_r2,
        diff_rate=float(qv_diff[-1] / T),
        r2_rate=float(qv_r2[-1] / T),
        growth_exponent_diff=_loglog_slope(t, qv_diff),
        growth_exponent_r2=_loglog_slope(t, qv_r2),
        phi_violation_fraction=viol)


# ---------------------------------------------------------------------------
# Backbone and loop projections
# ---------------------------------------------------------------------------


def backbone_projection(fix: GraphFixture, positions: Sequence[GraphPosition]
                        ) -> np.ndarray:
    """Project a path of graph positions onto the marked backbone or loop.

    Positions on the backbone map to their arclength coordinate; positions
    inside a side tree map to the coordinate of the attachment point, so the
    series is constant over tree excursions. For the loop fixture the
    returned series is the continuous unwound coordinate (one turn equals
    the circumference).
    """
    proj = fix.markers.get("projection")
    if proj is None:
        raise ValueError(f"fixture {fix.name} has no projection markers")
    edge_coord = proj["edge_coord"]
    tree_attach = proj["tree_attach"]
    vertex_coord = proj["vertex_coord"]
    g = fix.graph

    def raw(p: GraphPosition) -> float:
        p = g.canonical(p)
        if p.is_vertex:
            if p.vertex in vertex_coord:
                return vertex_coord[p.vertex]
            # vertex strictly inside a side tree: walk to its attachment edge
            for eid, coord in tree_attach.items():
                e = g.edge(eid)
                if p.vertex in (e.u, e.v):
                    return coord
            raise ValueError(f"vertex {p.vertex} is not marked")
        if p.edge in edge_coord:
            base, direction = edge_coord[p.edge]
            return base + direction * p.offset
        if p.edge in tree_attach:
            return tree_attach[p.edge]
        raise ValueError(f"edge {p.edge} is not marked")

    values = np.array([raw(p) for p in positions], dtype=float)
    if proj.get("kind") != "loop":
        return values
    circ = float(proj["circumference"])
    out = np.empty_like(values)
    if len(values) == 0:
        return out
    out[0] = values[0]
    for i in range(1, len(values)):
        delta = values[i] - values[i - 1]
        delta -= circ * round(delta / circ)
        out[i] = out[i - 1] + delta
    return out
