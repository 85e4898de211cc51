"""Jitted fast path for reflected pairs in a disc.

The disc projection is a radial clamp, so the heavy scenarios (long
synchronous / mirror / independent runs) avoid per-step Python overhead.
Pregenerated draws use a fixed (n, 4) layout: columns 0-1 drive X, columns
2-3 drive the partner when the kind needs fresh noise.
"""

import numpy as np
from numba import njit

K_SYNC = 0
K_MIRROR = 1
K_INDEP = 2


@njit(cache=True)
def disc_pair_path(radius, cx, cy, kind, x1, x2, y1, y2, dt, gauss,
                   ckpt_stride, min_ckpt, rec_stride, rec):
    """Run one reflected pair in the disc; returns summary scalars.

    Output: (x1, x2, y1, y2, lx, ly, min_dist, qv_diff, qv_r2, quarter,
    sum_dbx1, sum_dbx2, sum_dby1, sum_dby2). ``rec`` rows receive
    (x1, x2, y1, y2, dist, lx, ly) every rec_stride steps when they fit.
    """
    n = gauss.shape[0]
    h = np.sqrt(dt)
    lx = 0.0
    ly = 0.0
    mind = np.inf
    qv_diff = 0.0
    qv_r2 = 0.0
    quarter = 0
    bx1 = bx2 = bw1 = bw2 = 0.0
    dx1 = x1 - y1
    dx2 = x2 - y2
    r2_prev = dx1 * dx1 + dx2 * dx2
    for i in range(n):
        a1 = gauss[i, 0] * h
        a2 = gauss[i, 1] * h
        if kind == K_SYNC:
            b1, b2 = a1, a2
        elif kind == K_INDEP:
            b1 = gauss[i, 2] * h
            b2 = gauss[i, 3] * h
        else:  # mirror: reflect across the hyperplane orthogonal to x - y
            d1 = x1 - y1
            d2 = x2 - y2
            nrm = np.sqrt(d1 * d1 + d2 * d2)
            if nrm > 1e-14:
                e1 = d1 / nrm
                e2 = d2 / nrm
                pr = e1 * a1 + e2 * a2
                b1 = a1 - 2.0 * pr * e1
                b2 = a2 - 2.0 * pr * e2
            else:
                b1, b2 = a1, a2
        bx1 += a1
        bx2 += a2
        bw1 += b1
        bw2 += b2
        x1 += a1
        x2 += a2
        rho = np.sqrt((x1 - cx) ** 2 + (x2 - cy) ** 2)
        if rho > radius:
            push = rho - radius
            lx += push
            s = radius / rho
            x1 = cx + (x1 - cx) * s
            x2 = cy + (x2 - cy) * s
        y1 += b1
        y2 += b2
        rho = np.sqrt((y1 - cx) ** 2 + (y2 - cy) ** 2)
        if rho > radius:
            push = rho - radius
            ly += push
            s = radius / rho
            y1 = cx + (y1 - cx) * s
            y2 = cy + (y2 - cy) * s
        dd1 = a1 - b1
        dd2 = a2 - b2
        qv_diff += dd1 * dd1 + dd2 * dd2
        dx1 = x1 - y1
        dx2 = x2 - y2
        r2 = dx1 * dx1 + dx2 * dx2
        d = np.sqrt(r2)
        if d < mind:
            mind = d
        qv_r2 += (r2 - r2_prev) ** 2
        r2_prev = r2
        if x1 > cx and x2 > cy:
            quarter += 1
        if (i + 1) % ckpt_stride == 0:
            j = (i + 1) // ckpt_stride - 1
            if j < min_ckpt.shape[0]:
                min_ckpt[j] = mind
        if (i + 1) % rec_stride == 0:
            j = (i + 1) // rec_stride - 1
            if j < rec.shape[0]:
                rec[j, 0] = x1
                rec[j, 1] = x2
                rec[j, 2] = y1
                rec[j, 3] = y2
                rec[j, 4] = d
                rec[j, 5] = lx
                rec[j, 6] = ly
    return (x1, x2, y1, y2, lx, ly, mind, qv_diff, qv_r2, quarter,
            bx1, bx2, bw1, bw2)
