"""Coupled reflected Brownian pairs in planar domains.

Paths follow the projected Euler scheme for the constrained problem: step
freely, and when the candidate leaves the closure, project back onto it and
book the push distance as boundary local time. Driver kinds: synchronous
(same increments), independent, mirror (increments reflected across the
hyperplane orthogonal to the connecting segment), a distance-growth driver
whose free separation obeys |W - B|^2 = |y0 - x0|^2 + 2t exactly, and rigid
rotation for the annulus.

All state arrays carry a leading path axis; a single path is the m=1 case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .convex_geometry import ConvexDomain, GeometryError, contains, project_with_normal
from .rng import path_rng


class DriverError(ValueError):
    pass


_KINDS = ("synchronous", "mirror", "independent", "growth_ex42", "rotation")


@dataclass(frozen=True)
class DriverKind:
    """Coupling driver selector; ``rotation`` carries its angle."""

    kind: str
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DriverError(f"unknown driver kind {self.kind!r}")

    @property
    def gauss_per_step(self) -> int:
        return {"independent": 4, "growth_ex42": 3}.get(self.kind, 2)


def synchronous() -> DriverKind:
    return DriverKind("synchronous")


def mirror() -> DriverKind:
    return DriverKind("mirror")


def independent() -> DriverKind:
    return DriverKind("independent")


def growth_ex42() -> DriverKind:
    return DriverKind("growth_ex42")


def rotation(theta: float) -> DriverKind:
    return DriverKind("rotation", theta=theta)


@dataclass
class PairState:
    """Positions, boundary local times, and accumulated free drivers."""

    x: np.ndarray
    y: np.ndarray
    lx: np.ndarray
    ly: np.ndarray
    b: np.ndarray          # accumulated driver of X
    w: np.ndarray          # accumulated driver of Y
    x0: np.ndarray
    y0: np.ndarray

    @staticmethod
    def initial(x0, y0, n_paths: int = 1) -> "PairState":
        x0 = np.asarray(x0, dtype=float)
        y0 = np.asarray(y0, dtype=float)
        x = np.tile(x0, (n_paths, 1))
        y = np.tile(y0, (n_paths, 1))
        z = np.zeros(n_paths)
        return PairState(x, y, z.copy(), z.copy(),
                         np.zeros((n_paths, 2)), np.zeros((n_paths, 2)),
                         x.copy(), y.copy())


def _rot(v: np.ndarray, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.stack([c * v[..., 0] - s * v[..., 1],
                     c * v[..., 1] + s * v[..., 0]], axis=-1)


def driver_increments(kind: DriverKind, state: PairState, dB: np.ndarray,
                      rng, dt: Optional[float] = None
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Split one 2-d Gaussian increment into the pair's driver increments.

    ``dt`` is required for the kinds that draw fresh noise (independent,
    growth_ex42); the others only transform ``dB``. The growth driver
    advances the free separation D = (y0 + w) - (x0 + b) by an exact radial
    update |D'|^2 = |D|^2 + 2 dt plus a Gaussian tangential angle, so the
    squared separation grows deterministically while both marginals stay
    Brownian to the scheme's weak order.
    """
    dB = np.atleast_2d(np.asarray(dB, dtype=float))
    m = dB.shape[0]
    if kind.kind in ("independent", "growth_ex42") and dt is None:
        raise DriverError(f"{kind.kind} driver needs the step size dt")
    if kind.kind == "independent":
        return dB, rng.standard_normal((m, 2)) * math.sqrt(dt)
    if kind.kind == "growth_ex42":
        return dB, _growth_dby(state, dB, rng.standard_normal(m), dt)
    return _driver_pair(kind, state, dB)


def _growth_dby(state: PairState, dB: np.ndarray, gperp: np.ndarray,
                dt: float) -> np.ndarray:
    sep = (state.y0 + state.w) - (state.x0 + state.b)
    r = np.linalg.norm(sep, axis=-1)
    if np.any(r <= 0):
        raise DriverError("growth driver undefined at coincident drivers")
    e = sep / r[:, None]
    eperp = np.stack([e[:, 1], -e[:, 0]], axis=-1)
    zeta = gperp * math.sqrt(dt) - np.sum(eperp * dB, axis=-1)
    r_new = np.sqrt(r * r + 2.0 * dt)
    # counterclockwise angle moving the separation by +zeta along eperp
    dtheta = -zeta / r
    c, s = np.cos(dtheta), np.sin(dtheta)
    e_new = np.stack([c * e[:, 0] - s * e[:, 1],
                      c * e[:, 1] + s * e[:, 0]], axis=-1)
    d_sep = r_new[:, None] * e_new - sep
    return dB + d_sep


def step_skorokhod(d: ConvexDomain, p, dB_p) -> tuple[np.ndarray, np.ndarray]:
    """One projected Euler step; returns (position, local-time increment).

    The local-time increment is the push distance, zero whenever the free
    candidate stays in the closure. A degenerate annulus-center candidate
    is retried with a halved increment.
    """
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    pos = np.atleast_2d(p).copy()
    inc = np.atleast_2d(np.asarray(dB_p, dtype=float)).copy()
    out = np.empty_like(pos)
    push = np.zeros(pos.shape[0])
    todo = np.arange(pos.shape[0])
    for _ in range(6):  # halving rounds for degenerate candidates
        cand = pos[todo] + inc[todo]
        if d.shape == "annulus":
            rho = np.linalg.norm(cand - np.asarray(d.center), axis=-1)
            bad = rho < 1e-12
            if bad.any():
                inc[todo[bad]] *= 0.5
                keep = todo[bad]
                ok = todo[~bad]
                _apply_projection(d, pos, inc, out, push, ok)
                todo = keep
                continue
        _apply_projection(d, pos, inc, out, push, todo)
        todo = todo[:0]
        break
    if todo.size:
        raise GeometryError("step kept hitting the projection degeneracy")
    if single:
        return out[0], float(push[0])
    return out, push


def _apply_projection(d, pos, inc, out, push, idx):
    if idx.size == 0:
        return
    cand = pos[idx] + inc[idx]
    inside = contains(d, cand)
    out[idx[inside]] = cand[inside]
    off = idx[~inside]
    if off.size:
        bad = cand[~inside]
        for _ in range(8):
            contact = project_with_normal(d, bad)
            newpos = contact.point
            done = contains(d, newpos)
            if done.all():
                break
            bad = newpos
        push[off] += np.linalg.norm(cand[~inside] - newpos, axis=-1)
        out[off] = newpos


@dataclass
class PairPath:
    """Full discretized pair trajectory with retained driver increments."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dist: np.ndarray
    lx: np.ndarray
    ly: np.ndarray
    dbx: np.ndarray
    dby: np.ndarray

    def to_csv(self, path, stride: int = 1):
        import csv

        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "x1", "x2", "y1", "y2", "dist", "lx", "ly"])
            for i in range(0, len(self.t), stride):
                wr.writerow([repr(float(v)) for v in
                             (self.t[i], self.x[i, 0], self.x[i, 1],
                              self.y[i, 0], self.y[i, 1], self.dist[i],
                              self.lx[i], self.ly[i])])


@dataclass
class PairSeries:
    """Strided (t, x, y, dist, lx, ly) series of one pair path."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dist: np.ndarray
    lx: np.ndarray
    ly: np.ndarray

    def to_csv(self, path):
        import csv

        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "x1", "x2", "y1", "y2", "dist", "lx", "ly"])
            for i in range(len(self.t)):
                wr.writerow([repr(float(v)) for v in
                             (self.t[i], self.x[i, 0], self.x[i, 1],
                              self.y[i, 0], self.y[i, 1], self.dist[i],
                              self.lx[i], self.ly[i])])


@dataclass
class PairEnsembleResult:
    """Streaming summaries of a reflected-pair ensemble."""

    min_dist: np.ndarray
    min_ckpt: np.ndarray
    ckpt_times: np.ndarray
    lx_final: np.ndarray
    ly_final: np.ndarray
    dist_final: np.ndarray
    sep2_final: np.ndarray       # |free driver separation|^2 at the horizon
    qv_diff: np.ndarray          # realized <X-Y, X-Y> from driver increments
    qv_r2: np.ndarray            # realized <|X-Y|^2> from the distance series
    quarter_frac: np.ndarray     # fraction of steps with X in the ++ quadrant
    path0: Optional[PairSeries] = None


def _validate_pair_setup(d: ConvexDomain, kind: DriverKind, x0, y0):
    if not bool(np.all(contains(d, np.asarray(x0, dtype=float)))):
        raise GeometryError("x0 outside the domain closure")
    if not bool(np.all(contains(d, np.asarray(y0, dtype=float)))):
        raise GeometryError("y0 outside the domain closure")
    if kind.kind == "rotation" and d.shape != "annulus":
        raise DriverError("rotation coupling is only exact on the annulus")
    if kind.kind == "growth_ex42" and np.allclose(x0, y0):
        raise DriverError("growth driver needs x0 != y0")


def simulate_pair(d: ConvexDomain, kind: DriverKind, x0, y0, dt: float,
                  t_max: float, rng) -> PairPath:
    """Simulate one coupled pair, recording the full trajectory."""
    _validate_pair_setup(d, kind, x0, y0)
    n = int(round(t_max / dt))
    st = PairState.initial(x0, y0, 1)
    h = math.sqrt(dt)
    t = dt * np.arange(n + 1)
    X = np.empty((n + 1, 2))
    Y = np.empty((n + 1, 2))
    LX = np.zeros(n + 1)
    LY = np.zeros(n + 1)
    DBX = np.empty((n, 2))
    DBY = np.empty((n, 2))
    X[0], Y[0] = st.x[0], st.y[0]
    for i in range(n):
        dB = rng.standard_normal((1, 2)) * h
        dbx, dby = driver_increments(kind, st, dB, rng, dt=dt)
        st.b += dbx
        st.w += dby
        st.x, dlx = step_skorokhod(d, st.x, dbx)
        if kind.kind == "rotation":
            st.y = np.asarray(d.center) + _rot(st.x - np.asarray(d.center),
                                               kind.theta)
            dly = dlx
        else:
            st.y, dly = step_skorokhod(d, st.y, dby)
        st.lx += dlx
        st.ly += dly
        X[i + 1], Y[i + 1] = st.x[0], st.y[0]
        LX[i + 1], LY[i + 1] = st.lx[0], st.ly[0]
        DBX[i], DBY[i] = dbx[0], dby[0]
    dist = np.linalg.norm(X - Y, axis=-1)
    return PairPath(t, X, Y, dist, LX, LY, DBX, DBY)


def simulate_pair_ensemble(d: ConvexDomain, kind: DriverKind, x0, y0,
                           dt: float, t_max: float, n_paths: int, seed: int,
                           n_ckpts: int = 64, path_offset: int = 0,
                           block: int = 20000,
                           rec_stride: int = 0) -> PairEnsembleResult:
    """Vectorized ensemble with per-path counter-based streams.

    Increments are pregenerated in blocks from each path's own stream, so
    results do not depend on batching or worker scheduling. Discs with the
    synchronous / mirror / independent kinds dispatch to a jitted per-path
    kernel. When rec_stride > 0, global path 0 keeps a strided series.
    """
    _validate_pair_setup(d, kind, x0, y0)
    if d.shape == "disc" and kind.kind in ("synchronous", "mirror",
                                           "independent"):
        return _disc_pair_ensemble(d, kind, x0, y0, dt, t_max, n_paths,
                                   seed, n_ckpts, path_offset, rec_stride)
    n = int(round(t_max / dt))
    h = math.sqrt(dt)
    stride = max(1, n // n_ckpts)
    nk = n // stride
    ckpt_times = dt * stride * np.arange(1, nk + 1)
    st = PairState.initial(x0, y0, n_paths)
    gens = [path_rng(seed, path_offset + i) for i in range(n_paths)]
    width = kind.gauss_per_step
    mind = np.full(n_paths, np.inf)
    min_ckpt = np.empty((n_paths, nk))
    qv_diff = np.zeros(n_paths)
    qv_r2 = np.zeros(n_paths)
    quarter = np.zeros(n_paths)
    center = np.asarray(d.center)
    dist_prev = np.linalg.norm(st.x - st.y, axis=-1)
    r2_prev = dist_prev ** 2
    recording = rec_stride > 0 and path_offset == 0
    rec = np.empty((n // rec_stride if recording else 0, 7))
    done = 0
    while done < n:
        nb = min(block, n - done)
        draws = np.stack([g.standard_normal((nb, width)) for g in gens], axis=1)
        for j in range(nb):
            dB = draws[j, :, 0:2] * h
            if kind.kind == "growth_ex42":
                dbx, dby = dB, _growth_dby(st, dB, draws[j, :, 2], dt)
            elif kind.kind == "independent":
                dbx, dby = dB, draws[j, :, 2:4] * h
            else:
                dbx, dby = _driver_pair(kind, st, dB)
            st.b += dbx
            st.w += dby
            st.x, dlx = step_skorokhod(d, st.x, dbx)
            if kind.kind == "rotation":
                st.y = center + _rot(st.x - center, kind.theta)
                dly = dlx
            else:
                st.y, dly = step_skorokhod(d, st.y, dby)
            st.lx += dlx
            st.ly += dly
            dist = np.linalg.norm(st.x - st.y, axis=-1)
            np.minimum(mind, dist, out=mind)
            qv_diff += np.sum((dbx - dby) ** 2, axis=-1)
            r2 = dist ** 2
            qv_r2 += (r2 - r2_prev) ** 2
            r2_prev = r2
            rel = st.x - center
            quarter += (rel[:, 0] > 0) & (rel[:, 1] > 0)
            i_glob = done + j + 1
            if i_glob % stride == 0 and i_glob // stride <= nk:
                min_ckpt[:, i_glob // stride - 1] = mind
            if recording and i_glob % rec_stride == 0:
                k = i_glob // rec_stride - 1
                if k < rec.shape[0]:
                    rec[k, 0:2] = st.x[0]
                    rec[k, 2:4] = st.y[0]
                    rec[k, 4] = dist[0]
                    rec[k, 5] = st.lx[0]
                    rec[k, 6] = st.ly[0]
        done += nb
    path0 = _series_from_rec(rec, dt, rec_stride) if recording else None
    sep = (st.y0 + st.w) - (st.x0 + st.b)
    return PairEnsembleResult(
        min_dist=mind, min_ckpt=min_ckpt, ckpt_times=ckpt_times,
        lx_final=st.lx.copy(), ly_final=st.ly.copy(),
        dist_final=np.linalg.norm(st.x - st.y, axis=-1),
        sep2_final=np.sum(sep * sep, axis=-1),
        qv_diff=qv_diff, qv_r2=qv_r2, quarter_frac=quarter / n,
        path0=path0)


def _series_from_rec(rec: np.ndarray, dt: float, rec_stride: int) -> PairSeries:
    t = dt * rec_stride * np.arange(1, rec.shape[0] + 1)
    return PairSeries(t, rec[:, 0:2].copy(), rec[:, 2:4].copy(),
                      rec[:, 4].copy(), rec[:, 5].copy(), rec[:, 6].copy())


def _disc_pair_ensemble(d: ConvexDomain, kind: DriverKind, x0, y0, dt, t_max,
                        n_paths, seed, n_ckpts, path_offset,
                        rec_stride: int = 0) -> PairEnsembleResult:
    from . import _plane_kernels as pk

    code = {"synchronous": pk.K_SYNC, "mirror": pk.K_MIRROR,
            "independent": pk.K_INDEP}[kind.kind]
    n = int(round(t_max / dt))
    stride = max(1, n // n_ckpts)
    nk = n // stride
    ckpt_times = dt * stride * np.arange(1, nk + 1)
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    cx, cy = d.center
    mind = np.empty(n_paths)
    min_ckpt = np.empty((n_paths, nk))
    lx = np.empty(n_paths)
    ly = np.empty(n_paths)
    dist_final = np.empty(n_paths)
    sep2 = np.empty(n_paths)
    qv_diff = np.empty(n_paths)
    qv_r2 = np.empty(n_paths)
    quarter = np.empty(n_paths)
    path0 = None
    for i in range(n_paths):
        rng = path_rng(seed, path_offset + i)
        gauss = rng.standard_normal((n, 4))
        mc = np.empty(nk)
        if rec_stride > 0 and path_offset + i == 0:
            rs, rec = rec_stride, np.empty((n // rec_stride, 7))
        else:
            rs, rec = 10 ** 18, np.empty((0, 7))
        out = pk.disc_pair_path(d.radius, cx, cy, code,
                                x0[0], x0[1], y0[0], y0[1], dt, gauss,
                                stride, mc, rs, rec)
        (fx1, fx2, fy1, fy2, lxi, lyi, mi, qd, qr, qc,
         bx1, bx2, bw1, bw2) = out
        if rec.shape[0]:
            path0 = _series_from_rec(rec, dt, rec_stride)
        mind[i] = mi
        min_ckpt[i] = mc
        lx[i] = lxi
        ly[i] = lyi
        dist_final[i] = math.hypot(fx1 - fy1, fx2 - fy2)
        s1 = (y0[0] + bw1) - (x0[0] + bx1)
        s2 = (y0[1] + bw2) - (x0[1] + bx2)
        sep2[i] = s1 * s1 + s2 * s2
        qv_diff[i] = qd
        qv_r2[i] = qr
        quarter[i] = qc / n
    return PairEnsembleResult(min_dist=mind, min_ckpt=min_ckpt,
                              ckpt_times=ckpt_times, lx_final=lx, ly_final=ly,
                              dist_final=dist_final, sep2_final=sep2,
                              qv_diff=qv_diff, qv_r2=qv_r2,
                              quarter_frac=quarter, path0=path0)


def _driver_pair(kind: DriverKind, st: PairState, dB: np.ndarray):
    if kind.kind == "synchronous":
        return dB, dB
    if kind.kind == "mirror":
        diff = st.x - st.y
        nrm = np.linalg.norm(diff, axis=-1, keepdims=True)
        safe = nrm > 1e-14
        e = np.where(safe, diff / np.where(safe, nrm, 1.0), 0.0)
        proj = np.sum(e * dB, axis=-1, keepdims=True)
        return dB, dB - 2.0 * proj * e
    if kind.kind == "rotation":
        return dB, _rot(dB, kind.theta)
    raise DriverError(f"driver {kind.kind} needs dedicated handling")
