"""Planar domains for reflected diffusion: discs, ellipses, and the annulus.

All queries are array-native: points may be a single (2,) pair or an (n, 2)
batch. The annulus is deliberately non-convex and is rejected by the
convexity-dependent queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryContact:
    """Nearest boundary point, inward unit normal there, and push distance."""

    point: np.ndarray
    normal: np.ndarray
    push: np.ndarray


@dataclass(frozen=True)
class ConvexDomain:
    """Disc, ellipse (semi-axes a >= b) or annulus around a common center."""

    shape: str                   # "disc" | "ellipse" | "annulus"
    center: tuple = (0.0, 0.0)
    radius: float = 1.0          # disc
    a: float = 1.0               # ellipse semi-axes
    b: float = 1.0
    r_in: float = 1.0            # annulus radii
    r_out: float = 2.0

    def __post_init__(self):
        if self.shape == "disc":
            if self.radius <= 0:
                raise GeometryError("disc radius must be positive")
        elif self.shape == "ellipse":
            if not (self.a >= self.b > 0):
                raise GeometryError("ellipse needs a >= b > 0")
        elif self.shape == "annulus":
            if not (0 < self.r_in < self.r_out):
                raise GeometryError("annulus needs 0 < r_in < r_out")
        else:
            raise GeometryError(f"unknown shape {self.shape!r}")

    @property
    def is_convex(self) -> bool:
        return self.shape != "annulus"

    @property
    def diameter(self) -> float:
        if self.shape == "disc":
            return 2 * self.radius
        if self.shape == "ellipse":
            return 2 * self.a
        return 2 * self.r_out

    @property
    def area(self) -> float:
        if self.shape == "disc":
            return math.pi * self.radius ** 2
        if self.shape == "ellipse":
            return math.pi * self.a * self.b
        return math.pi * (self.r_out ** 2 - self.r_in ** 2)

    @property
    def perimeter(self) -> float:
        if self.shape == "disc":
            return 2 * math.pi * self.radius
        if self.shape == "ellipse":
            # Gauss arc-length integral, good to machine precision via quadrature
            th = np.linspace(0, 2 * math.pi, 20001)
            dx = np.hypot(self.a * np.sin(th), self.b * np.cos(th))
            return float(np.trapz(dx, th))
        return 2 * math.pi * (self.r_in + self.r_out)

    def boundary_point(self, theta):
        """Boundary parameterization (outer boundary for the annulus)."""
        theta = np.asarray(theta, dtype=float)
        c = np.asarray(self.center)
        if self.shape == "ellipse":
            return c + np.stack([self.a * np.cos(theta),
                                 self.b * np.sin(theta)], axis=-1)
        r = self.radius if self.shape == "disc" else self.r_out
        return c + r * np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def disc(radius: float = 1.0, center=(0.0, 0.0)) -> ConvexDomain:
    return ConvexDomain("disc", center=tuple(center), radius=radius)


def ellipse(a: float, b: float, center=(0.0, 0.0)) -> ConvexDomain:
    return ConvexDomain("ellipse", center=tuple(center), a=a, b=b)


def annulus(r_in: float, r_out: float, center=(0.0, 0.0)) -> ConvexDomain:
    return ConvexDomain("annulus", center=tuple(center), r_in=r_in, r_out=r_out)


def contains(d: ConvexDomain, p, tol: float = 1e-12):
    """Closure membership, vectorized over the leading axis of ``p``."""
    q = np.asarray(p, dtype=float) - np.asarray(d.center)
    rho = np.hypot(q[..., 0], q[..., 1])
    if d.shape == "disc":
        return rho <= d.radius + tol
    if d.shape == "ellipse":
        g = (q[..., 0] / d.a) ** 2 + (q[..., 1] / d.b) ** 2
        return g <= 1.0 + tol
    return (rho >= d.r_in - tol) & (rho <= d.r_out + tol)


def _ellipse_project_quadrant(a: float, b: float, x: float, y: float):
    """Nearest boundary point for x, y >= 0, via the Lagrange parameter.

    Solves f(t) = (a x / (t + a^2))^2 + (b y / (t + b^2))^2 - 1 = 0 with a
    bisection-safeguarded Newton iteration; f is monotone on (-b^2, inf).
    """
    if y == 0.0:
        # below the evolute cusp the nearest point leaves the major axis
        if a * x < a * a - b * b:
            px = a * a * x / (a * a - b * b)
            py = b * math.sqrt(max(0.0, 1.0 - (px / a) ** 2))
            return px, py
        return a, 0.0

    def f(t):
        return (a * x / (t + a * a)) ** 2 + (b * y / (t + b * b)) ** 2 - 1.0

    lo = -b * b + b * y          # f(lo) >= 0 since the y-term alone is >= 1
    hi = max(lo, 0.0) + math.hypot(a * x, b * y)
    while f(hi) > 0.0:
        hi = lo + 2.0 * (hi - lo)
    t = 0.5 * (lo + hi)
    for _ in range(100):
        ft = f(t)
        if abs(ft) < 1e-15:
            break
        if ft > 0.0:
            lo = t
        else:
            hi = t
        dft = (-2.0 * (a * x) ** 2 / (t + a * a) ** 3
               - 2.0 * (b * y) ** 2 / (t + b * b) ** 3)
        t_new = t - ft / dft
        if not (lo < t_new < hi):
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) < 1e-15 * max(1.0, abs(t)):
            t = t_new
            break
        t = t_new
    return a * a * x / (t + a * a), b * b * y / (t + b * b)


def _ellipse_nearest(d: ConvexDomain, q: np.ndarray) -> np.ndarray:
    out = np.empty_like(q)
    for i in range(q.shape[0]):
        x, y = q[i]
        px, py = _ellipse_project_quadrant(d.a, d.b, abs(x), abs(y))
        out[i, 0] = math.copysign(px, x)
        out[i, 1] = math.copysign(py, y)
    return out


def _inward_normal(d: ConvexDomain, bpt: np.ndarray, rho=None) -> np.ndarray:
    q = bpt - np.asarray(d.center)
    if d.shape == "disc":
        return -q / d.radius
    if d.shape == "ellipse":
        grad = np.stack([2 * q[..., 0] / d.a ** 2, 2 * q[..., 1] / d.b ** 2],
                        axis=-1)
        return -grad / np.linalg.norm(grad, axis=-1, keepdims=True)
    rr = np.hypot(q[..., 0], q[..., 1])[..., None]
    unit = q / rr
    # inner boundary pushes outward, outer boundary pushes inward
    inner = np.isclose(rr[..., 0], d.r_in)
    return np.where(inner[..., None], unit, -unit)


def project_with_normal(d: ConvexDomain, p) -> BoundaryContact:
    """Nearest boundary point, inward normal there, and |p - projection|.

    Points inside the closure get push distance 0 together with their
    nearest boundary data. Querying the annulus at its center is an error
    (the projection is not defined there).
    """
    p = np.asarray(p, dtype=float)
    single = p.ndim == 1
    q = np.atleast_2d(p) - np.asarray(d.center)
    rho = np.hypot(q[:, 0], q[:, 1])
    if d.shape == "disc":
        unit = np.where(rho[:, None] > 0, q / np.where(rho[:, None] == 0, 1, rho[:, None]),
                        np.array([1.0, 0.0]))
        bpt = np.asarray(d.center) + d.radius * unit
    elif d.shape == "ellipse":
        bpt = np.asarray(d.center) + _ellipse_nearest(d, q)
    else:
        if np.any(rho < 1e-12):
            raise GeometryError("annulus projection undefined at the center")
        unit = q / rho[:, None]
        nearest_r = np.where(np.abs(rho - d.r_in) <= np.abs(rho - d.r_out),
                             d.r_in, d.r_out)
        bpt = np.asarray(d.center) + nearest_r[:, None] * unit
    push = np.linalg.norm(np.atleast_2d(p) - bpt, axis=-1)
    push = np.where(contains(d, np.atleast_2d(p)), 0.0, push)
    normal = _inward_normal(d, bpt)
    if single:
        return BoundaryContact(bpt[0], normal[0], float(push[0]))
    return BoundaryContact(bpt, normal, push)


def strict_convexity_margin(d: ConvexDomain, eps: float, n_samples: int = 400,
                            seed: int = 0) -> float:
    """Sampled margin a_eps: min of (y - x).n(x)/|x - y| over |x - y| >= eps.

    x runs over boundary samples and y over closure samples. Positive for
    the strictly convex shapes; the annulus is rejected.
    """
    if not d.is_convex:
        raise GeometryError("margin query requires a convex domain")
    if eps <= 0:
        raise GeometryError("eps must be positive")
    th = 2 * math.pi * np.arange(n_samples) / n_samples
    bx = d.boundary_point(th)
    contact = project_with_normal(d, bx)
    normals = contact.normal
    rng = np.random.default_rng(seed)
    interior = []
    while len(interior) < n_samples:
        cand = np.asarray(d.center) + (2 * rng.random((4 * n_samples, 2)) - 1) * d.diameter / 2
        cand = cand[contains(d, cand)]
        interior.extend(cand.tolist())
    ys = np.vstack([bx, np.asarray(interior[:n_samples])])
    diff = ys[None, :, :] - bx[:, None, :]
    dist = np.linalg.norm(diff, axis=-1)
    dots = np.einsum("ijk,ik->ij", diff, normals)
    mask = dist >= eps
    if not mask.any():
        raise GeometryError("eps exceeds the domain diameter")
    return float(np.min(dots[mask] / dist[mask]))
