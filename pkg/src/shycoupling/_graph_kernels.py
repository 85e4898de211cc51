"""Jitted per-path kernels for diffusion and coupled-pair stepping on graphs.

All kernels consume pregenerated randomness with a fixed per-step layout
(two normals, four uniforms), so a path's trajectory is a pure function of
its stream regardless of which phase the dynamics are in. Positions are
encoded as (edge index, offset in [0, length]); offsets exactly 0 or the
edge length mean "at the vertex".
"""

import numpy as np
from numba import njit

# phase codes for the hybrid coupling state
PH_SELECT = -1
PH_INDEP = 0
PH_INTERP = 1
PH_SKEW = 2

# si layout: phase, xe, ye, who, w, estar_stub, label_stub, ulat
SI_PHASE, SI_XE, SI_YE, SI_WHO, SI_W, SI_ESTAR, SI_LABEL, SI_ULAT = range(8)
SI_LEN = 8
# sf layout: xo, yo, U, V, v0, sgnx, sgny, ax, ay
SF_XO, SF_YO, SF_U, SF_V, SF_V0, SF_SGNX, SF_SGNY, SF_AX, SF_AY = range(9)
SF_LEN = 9
# diagnostics counters
CNT_TIE, CNT_BREACH, CNT_ERR, CNT_TRANSITIONS = range(4)
CNT_LEN = 4

ERR_MULTICROSS = 1
ERR_GEOMETRY = 2


@njit(cache=True)
def pos_dist(eu, ev, elen, vdist, e1, o1, e2, o2):
    """Geodesic distance between two encoded positions."""
    best = np.inf
    if e1 == e2:
        best = abs(o1 - o2)
        if eu[e1] == ev[e1]:  # self-loop wraps around
            wrap = elen[e1] - abs(o1 - o2)
            if wrap < best:
                best = wrap
    for a in range(2):
        da = o1 if a == 0 else elen[e1] - o1
        va = eu[e1] if a == 0 else ev[e1]
        for b in range(2):
            db = o2 if b == 0 else elen[e2] - o2
            vb = eu[e2] if b == 0 else ev[e2]
            c = da + vdist[va, vb] + db
            if c < best:
                best = c
    return best


@njit(cache=True)
def dist_vertex_to_pos(eu, ev, elen, vdist, w, e, o):
    a = vdist[w, eu[e]] + o
    b = vdist[w, ev[e]] + (elen[e] - o)
    return a if a < b else b


@njit(cache=True)
def walsh_move(eu, ev, elen, sptr, sedge, send, deg, e, off, xi, ua, ub,
               bcounts):
    """One Euler step of graph Brownian motion with overshoot branching.

    Returns (edge, offset, error). At a vertex crossing the overshoot
    continues into a uniformly chosen incident stub; the step errors only
    if it needs more than the two budgeted branch draws, which for valid
    step sizes is a >100-sigma event.
    """
    draws_used = 0
    if off == 0.0 or off == elen[e]:
        # starting exactly at a vertex: branch immediately with |xi|
        w = eu[e] if off == 0.0 else ev[e]
        overshoot = abs(xi)
        k = deg[w]
        s = sptr[w] + np.int64(ua * k)
        if s >= sptr[w + 1]:
            s = sptr[w + 1] - 1
        bcounts[s] += 1
        draws_used = 1
        e = sedge[s]
        off2 = overshoot if send[s] == 0 else elen[e] - overshoot
    else:
        off2 = off + xi
    while off2 < 0.0 or off2 > elen[e]:
        if off2 < 0.0:
            w = eu[e]
            overshoot = -off2
        else:
            w = ev[e]
            overshoot = off2 - elen[e]
        if draws_used >= 2:
            return e, off, ERR_MULTICROSS
        u = ua if draws_used == 0 else ub
        draws_used += 1
        k = deg[w]
        s = sptr[w] + np.int64(u * k)
        if s >= sptr[w + 1]:
            s = sptr[w + 1] - 1
        bcounts[s] += 1
        e = sedge[s]
        off2 = overshoot if send[s] == 0 else elen[e] - overshoot
    return e, off2, 0


@njit(cache=True)
def sigma_interp(r, r0):
    s = (4.0 * abs(r) - r0) / r0
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    return s


@njit(cache=True)
def _toward_sign(eu, ev, elen, vdist, e, off, te, toff):
    """+1 if the geodesic from (e,off) to (te,toff) leaves via increasing
    offset, else -1. Ties resolve to the same-edge direct route, then +1."""
    tu = vdist[eu[e], eu[te]] + toff
    tv = vdist[eu[e], ev[te]] + (elen[te] - toff)
    du = off + (tu if tu < tv else tv)
    su = vdist[ev[e], eu[te]] + toff
    sv = vdist[ev[e], ev[te]] + (elen[te] - toff)
    dv = (elen[e] - off) + (su if su < sv else sv)
    if e == te:
        direct = abs(toff - off)
        if direct <= du and direct <= dv:
            return 1.0 if toff >= off else -1.0
    return -1.0 if du < dv else 1.0


@njit(cache=True)
def _at_vertex_code(eu, ev, elen, e, off):
    """0 not at vertex, else 1 + vertex index."""
    if off == 0.0:
        return 1 + eu[e]
    if off == elen[e]:
        return 1 + ev[e]
    return 0


@njit(cache=True)
def _select_phase(eu, ev, elen, sptr, sedge, send, deg, vdist, r0,
                  si, sf, cnt):
    """Re-anchor after a phase ends, using current positions."""
    xe, ye = si[SI_XE], si[SI_YE]
    xo, yo = sf[SF_XO], sf[SF_YO]
    d = pos_dist(eu, ev, elen, vdist, xe, xo, ye, yo)
    xat = _at_vertex_code(eu, ev, elen, xe, xo)
    yat = _at_vertex_code(eu, ev, elen, ye, yo)
    cnt[CNT_TRANSITIONS] += 1
    if d >= 0.75 * r0:
        si[SI_PHASE] = PH_INDEP
        return d
    if d <= 0.25 * r0:
        # unreachable for the exact dynamics; recorded, then treated like
        # the interpolated phase whose mixing freezes the gap
        cnt[CNT_BREACH] += 1
    if xat > 0 and yat > 0:
        cnt[CNT_TIE] += 1
        yat = 0  # process X's vertex first
    if xat > 0 or yat > 0:
        who = 0 if xat > 0 else 1
        w = (xat if who == 0 else yat) - 1
        fe = ye if who == 0 else xe
        fo = yo if who == 0 else xo
        # stub at w pointing along the geodesic to the follower
        best = np.inf
        bests = -1
        for s in range(sptr[w], sptr[w + 1]):
            if sedge[s] == fe:
                c = fo if send[s] == 0 else elen[fe] - fo
                if c < best:
                    best = c
                    bests = s
        if bests < 0:
            cnt[CNT_ERR] = ERR_GEOMETRY
            return d
        si[SI_PHASE] = PH_SKEW
        si[SI_WHO] = who
        si[SI_W] = w
        si[SI_ESTAR] = bests
        si[SI_LABEL] = -1
        si[SI_ULAT] = 0
        sf[SF_V] = best
        sf[SF_V0] = best
        return d
    si[SI_PHASE] = PH_INTERP
    sf[SF_U] = 0.0
    sf[SF_V] = d
    sf[SF_V0] = d
    sf[SF_AX] = xo
    sf[SF_AY] = yo
    sf[SF_SGNX] = _toward_sign(eu, ev, elen, vdist, xe, xo, ye, yo)
    sf[SF_SGNY] = -_toward_sign(eu, ev, elen, vdist, ye, yo, xe, xo)
    return d


@njit(cache=True)
def _step_indep(eu, ev, elen, sptr, sedge, send, deg, vdist, r0, h,
                si, sf, bx, by, cnt, g1, g2, u1, u2, u3, u4):
    e, o, err = walsh_move(eu, ev, elen, sptr, sedge, send, deg,
                           si[SI_XE], sf[SF_XO], g1 * h, u1, u2, bx)
    if err != 0:
        cnt[CNT_ERR] = err
        return 0.0
    si[SI_XE] = e
    sf[SF_XO] = o
    e, o, err = walsh_move(eu, ev, elen, sptr, sedge, send, deg,
                           si[SI_YE], sf[SF_YO], g2 * h, u3, u4, by)
    if err != 0:
        cnt[CNT_ERR] = err
        return 0.0
    si[SI_YE] = e
    sf[SF_YO] = o
    d = pos_dist(eu, ev, elen, vdist, si[SI_XE], sf[SF_XO],
                 si[SI_YE], sf[SF_YO])
    if d <= 0.5 * r0:
        return _select_phase(eu, ev, elen, sptr, sedge, send, deg, vdist,
                             r0, si, sf, cnt)
    return d


@njit(cache=True)
def _step_interp(eu, ev, elen, sptr, sedge, send, deg, vdist, r0, h,
                 si, sf, cnt, g1, g2):
    dB = g1 * h
    dBp = g2 * h
    z = sf[SF_V] - sf[SF_U]
    s = sigma_interp(z, r0)
    U2 = sf[SF_U] + dB
    V2 = sf[SF_V] + np.sqrt(1.0 - s * s) * dB + s * dBp
    xe, ye = si[SI_XE], si[SI_YE]
    xo = sf[SF_AX] + sf[SF_SGNX] * U2
    yo = sf[SF_AY] + sf[SF_SGNY] * (V2 - sf[SF_V0])
    ended = False
    if xo <= 0.0:
        xo = 0.0
        ended = True
    elif xo >= elen[xe]:
        xo = elen[xe]
        ended = True
    if yo <= 0.0:
        yo = 0.0
        ended = True
    elif yo >= elen[ye]:
        yo = elen[ye]
        ended = True
    sf[SF_XO] = xo
    sf[SF_YO] = yo
    sf[SF_U] = U2
    sf[SF_V] = V2
    if V2 - U2 >= 0.75 * r0:
        ended = True
    if ended:
        return _select_phase(eu, ev, elen, sptr, sedge, send, deg, vdist,
                             r0, si, sf, cnt)
    return pos_dist(eu, ev, elen, vdist, xe, xo, ye, yo)


@njit(cache=True)
def _step_skew(eu, ev, elen, sptr, sedge, send, deg, vdist, r0, h,
               si, sf, bx, by, cnt, g2, u1, u2):
    who = si[SI_WHO]
    w = si[SI_W]
    estar = si[SI_ESTAR]
    fedge = sedge[estar]
    k = deg[w]
    beta = -(k - 2.0) / k
    ulat = si[SI_ULAT]
    zpre = sf[SF_V] - ulat * h
    vcounts = bx if who == 0 else by
    if ulat == 0:
        if u1 < 0.5 * (1.0 + beta):
            dstep = 1
        else:
            dstep = -1
        dB = (dstep - beta) * h
        if dstep < 0:
            # label this negative excursion among the k-1 other stubs
            idx = np.int64(u2 * (k - 1))
            if idx >= k - 1:
                idx = k - 2
            c = 0
            lab = -1
            for s in range(sptr[w], sptr[w + 1]):
                if s == estar:
                    continue
                if c == idx:
                    lab = s
                    break
                c += 1
            si[SI_LABEL] = lab
            vcounts[lab] += 1
        else:
            si[SI_LABEL] = -1
            vcounts[estar] += 1
    else:
        dstep = 1 if u1 < 0.5 else -1
        dB = dstep * h
    ulat += dstep
    si[SI_ULAT] = ulat
    s_mix = sigma_interp(zpre, r0)
    V2 = sf[SF_V] + np.sqrt(1.0 - s_mix * s_mix) * dB + s_mix * (g2 * h)
    ended = False
    if V2 <= 0.0:
        V2 = 0.0
        ended = True
    elif V2 >= elen[fedge]:
        V2 = elen[fedge]
        ended = True
    sf[SF_V] = V2
    # follower position on the geodesic edge, coordinate measured from w
    fo = V2 if send[estar] == 0 else elen[fedge] - V2
    # vertex particle position from the lattice coordinate
    if ulat > 0:
        r = ulat * h
        if r >= elen[fedge]:
            cnt[CNT_ERR] = ERR_GEOMETRY
            return 0.0
        ve = fedge
        vo = r if send[estar] == 0 else elen[fedge] - r
    elif ulat < 0:
        lab = si[SI_LABEL]
        le = sedge[lab]
        r = -ulat * h
        if r >= elen[le]:
            cnt[CNT_ERR] = ERR_GEOMETRY
            return 0.0
        ve = le
        vo = r if send[lab] == 0 else elen[le] - r
    else:
        ve = fedge
        vo = 0.0 if send[estar] == 0 else elen[fedge]
    if who == 0:
        si[SI_XE] = ve
        sf[SF_XO] = vo
        si[SI_YE] = fedge
        sf[SF_YO] = fo
    else:
        si[SI_YE] = ve
        sf[SF_YO] = vo
        si[SI_XE] = fedge
        sf[SF_XO] = fo
    if V2 - ulat * h >= 0.75 * r0:
        ended = True
    if ended:
        return _select_phase(eu, ev, elen, sptr, sedge, send, deg, vdist,
                             r0, si, sf, cnt)
    return pos_dist(eu, ev, elen, vdist, si[SI_XE], sf[SF_XO],
                    si[SI_YE], sf[SF_YO])


@njit(cache=True)
def hybrid_step(eu, ev, elen, sptr, sedge, send, deg, vdist, r0, dt,
                si, sf, bx, by, cnt, g1, g2, u1, u2, u3, u4):
    """Advance the hybrid coupling by one step; returns the pair distance."""
    h = np.sqrt(dt)
    if si[SI_PHASE] == PH_SELECT:
        _select_phase(eu, ev, elen, sptr, sedge, send, deg, vdist, r0,
                      si, sf, cnt)
    ph = si[SI_PHASE]
    if ph == PH_INDEP:
        return _step_indep(eu, ev, elen, sptr, sedge, send, deg, vdist, r0,
                           h, si, sf, bx, by, cnt, g1, g2, u1, u2, u3, u4)
    if ph == PH_INTERP:
        return _step_interp(eu, ev, elen, sptr, sedge, send, deg, vdist, r0,
                            h, si, sf, cnt, g1, g2)
    return _step_skew(eu, ev, elen, sptr, sedge, send, deg, vdist, r0,
                      h, si, sf, bx, by, cnt, g2, u1, u2)


@njit(cache=True)
def hybrid_path(eu, ev, elen, sptr, sedge, send, deg, vdist, r0, dt,
                si, sf, bx, by, cnt, gauss, unif, ckpt_stride, min_ckpt,
                rec_stride, rxe, rxo, rye, ryo, rdist, occ_x):
    """Run the hybrid coupling for len(gauss) steps.

    Returns (overall min distance, min distance during interp/skew phases).
    Running minima are written to min_ckpt at every checkpoint stride, and
    strided positions/distances to the rec arrays when they fit. occ_x
    tallies X's per-edge step counts for marginal-law checks.
    """
    n = gauss.shape[0]
    mind = np.inf
    minphase = np.inf
    maxphase = -np.inf
    for i in range(n):
        ph_before = si[SI_PHASE]
        d = hybrid_step(eu, ev, elen, sptr, sedge, send, deg, vdist, r0, dt,
                        si, sf, bx, by, cnt,
                        gauss[i, 0], gauss[i, 1],
                        unif[i, 0], unif[i, 1], unif[i, 2], unif[i, 3])
        if cnt[CNT_ERR] != 0:
            return mind, minphase, maxphase
        occ_x[si[SI_XE]] += 1
        if d < mind:
            mind = d
        if ph_before != PH_INDEP and si[SI_PHASE] == ph_before:
            # the phase survived this step: the corridor statement applies
            if d < minphase:
                minphase = d
            if d > maxphase:
                maxphase = d
        if (i + 1) % ckpt_stride == 0:
            min_ckpt[(i + 1) // ckpt_stride - 1] = mind
        if (i + 1) % rec_stride == 0:
            j = (i + 1) // rec_stride - 1
            if j < rdist.shape[0]:
                rxe[j] = si[SI_XE]
                rxo[j] = sf[SF_XO]
                rye[j] = si[SI_YE]
                ryo[j] = sf[SF_YO]
                rdist[j] = d
    return mind, minphase, maxphase


@njit(cache=True)
def isometry_path(eu, ev, elen, sptr, sedge, send, deg, vdist, dt,
                  xe, xo, iso_edge, iso_flip, gauss, unif, bx,
                  ckpt_stride, min_ckpt,
                  rec_stride, rxe, rxo, rye, ryo, rdist):
    """Mirror coupling Y = I(X): X does graph Brownian motion, Y its image.

    Returns (xe, xo, min distance). The image position is exact at every
    step, so the pair distance never drops below the isometry displacement.
    """
    n = gauss.shape[0]
    h = np.sqrt(dt)
    mind = np.inf
    for i in range(n):
        xe, xo, err = walsh_move(eu, ev, elen, sptr, sedge, send, deg,
                                 xe, xo, gauss[i, 0] * h,
                                 unif[i, 0], unif[i, 1], bx)
        if err != 0:
            return xe, xo, -1.0
        ye = iso_edge[xe]
        yo = xo if iso_flip[xe] == 0 else elen[xe] - xo
        d = pos_dist(eu, ev, elen, vdist, xe, xo, ye, yo)
        if d < mind:
            mind = d
        if (i + 1) % ckpt_stride == 0:
            min_ckpt[(i + 1) // ckpt_stride - 1] = mind
        if (i + 1) % rec_stride == 0:
            j = (i + 1) // rec_stride - 1
            if j < rdist.shape[0]:
                rxe[j] = xe
                rxo[j] = xo
                rye[j] = ye
                ryo[j] = yo
                rdist[j] = d
    return xe, xo, mind


@njit(cache=True)
def independent_pair_path(eu, ev, elen, sptr, sedge, send, deg, vdist, dt,
                          xe, xo, ye, yo, gauss, unif, bx, by,
                          rec_stride, rec_xe, rec_xo, rec_ye, rec_yo,
                          ckpt_stride, min_ckpt):
    """Two independent graph Brownian motions; records strided positions."""
    n = gauss.shape[0]
    h = np.sqrt(dt)
    mind = np.inf
    for i in range(n):
        xe, xo, err = walsh_move(eu, ev, elen, sptr, sedge, send, deg,
                                 xe, xo, gauss[i, 0] * h,
                                 unif[i, 0], unif[i, 1], bx)
        if err != 0:
            return xe, xo, ye, yo, -1.0
        ye, yo, err = walsh_move(eu, ev, elen, sptr, sedge, send, deg,
                                 ye, yo, gauss[i, 1] * h,
                                 unif[i, 2], unif[i, 3], by)
        if err != 0:
            return xe, xo, ye, yo, -1.0
        d = pos_dist(eu, ev, elen, vdist, xe, xo, ye, yo)
        if d < mind:
            mind = d
        if (i + 1) % rec_stride == 0:
            j = (i + 1) // rec_stride - 1
            rec_xe[j] = xe
            rec_xo[j] = xo
            rec_ye[j] = ye
            rec_yo[j] = yo
        if (i + 1) % ckpt_stride == 0:
            min_ckpt[(i + 1) // ckpt_stride - 1] = mind
    return xe, xo, ye, yo, mind


# ---------------------------------------------------------------------------
# The hand-built constant-separation machine on the two-bubble fixture
# ---------------------------------------------------------------------------

# si36 layout: case (1,2,3), side (0,1), driver (0=X,1=Y), arm, mark
F_CASE, F_SIDE, F_DRIVER, F_ARM, F_MARK = range(5)
F_LEN = 5


@njit(cache=True)
def _off_from(eu, elen, e, vanchor, t):
    """Offset of the point at arc distance t from vertex vanchor on edge e."""
    return t if eu[e] == vanchor else elen[e] - t


@njit(cache=True)
def _fig36_positions(eu, ev, elen, arcs, bridges, pend,
                     centers, tips, mid, pend_tip, si, depth):
    """Decode (driver edge/offset, follower edge/offset) from machine state."""
    case = si[F_CASE]
    side = si[F_SIDE]
    arm = si[F_ARM]
    if case == 1:
        if arm < 2:
            de = arcs[side, arm]
            do = _off_from(eu, elen, de, centers[side], depth)
            fe = bridges[side] if arm == 0 else pend
            fanchor = mid
        else:
            de = bridges[side]
            do = _off_from(eu, elen, de, centers[side], depth)
            fe = bridges[1 - side]
            fanchor = mid
        fo = _off_from(eu, elen, fe, fanchor, depth)
    elif case == 2:
        de = arcs[side, arm]
        do = _off_from(eu, elen, de, tips[side], depth)
        fe = pend
        fo = _off_from(eu, elen, fe, pend_tip, depth)
    else:
        if arm < 2:
            de = arcs[side, arm]
            fe = arcs[side, 1 - arm]
        else:
            de = bridges[side]
            fe = arcs[side, si[F_MARK]]
        do = _off_from(eu, elen, de, centers[side], depth)
        fo = _off_from(eu, elen, fe, tips[side], depth)
    return de, do, fe, fo


@njit(cache=True)
def fig36_path(eu, ev, elen, vdist, stub_of, arcs, bridges, pend,
               centers, tips, mid, pend_tip, si, dt, gauss, unif,
               bx, by, ckpt_stride, dev_ckpt, min_ckpt,
               rec_stride, rxe, rxo, rye, ryo, rdist, occ_x):
    """Run the case machine; returns (min d, max d, max |d-1|, depth).

    stub_of[v, a] maps an anchor vertex and local arm index to the global
    stub index used by the branch counters; occ_x tallies per-edge step
    counts of particle X for marginal-law checks.
    """
    n = gauss.shape[0]
    h = np.sqrt(dt)
    depth = 0.0
    mind = np.inf
    maxd = -np.inf
    maxdev = 0.0
    for i in range(n):
        case = si[F_CASE]
        side = si[F_SIDE]
        n_arms = 2 if case == 2 else 3
        anchor = tips[side] if case == 2 else centers[side]
        xi = gauss[i, 0] * h
        if depth == 0.0:
            depth2 = -abs(xi)  # at the anchor: every departure branches
        else:
            depth2 = depth + xi
        du = 0
        err = False
        while depth2 < 0.0:
            if du >= 3:
                err = True
                break
            u = unif[i, du]
            du += 1
            arm = np.int64(u * n_arms)
            if arm >= n_arms:
                arm = n_arms - 1
            si[F_ARM] = arm
            cc = bx if si[F_DRIVER] == 0 else by
            cc[stub_of[anchor, arm]] += 1
            if case == 3 and arm == 2:
                if du >= 4:
                    err = True
                    break
                si[F_MARK] = 0 if unif[i, du] < 0.5 else 1
                du += 1
            depth2 = -depth2
        if err:
            return -1.0, maxd, maxdev, depth
        transition = depth2 >= 1.0
        if transition:
            depth2 = 1.0
        depth = depth2
        de, do, fe, fo = _fig36_positions(eu, ev, elen, arcs, bridges, pend,
                                          centers, tips, mid, pend_tip,
                                          si, depth)
        if si[F_DRIVER] == 0:
            d = pos_dist(eu, ev, elen, vdist, de, do, fe, fo)
            occ_x[de] += 1
        else:
            d = pos_dist(eu, ev, elen, vdist, fe, fo, de, do)
            occ_x[fe] += 1
        if d < mind:
            mind = d
        if d > maxd:
            maxd = d
        dev = abs(d - 1.0)
        if dev > maxdev:
            maxdev = dev
        if (i + 1) % ckpt_stride == 0:
            j = (i + 1) // ckpt_stride - 1
            dev_ckpt[j] = maxdev
            min_ckpt[j] = mind
        if (i + 1) % rec_stride == 0:
            j = (i + 1) // rec_stride - 1
            if j < rdist.shape[0]:
                if si[F_DRIVER] == 0:
                    rxe[j] = de
                    rxo[j] = do
                    rye[j] = fe
                    ryo[j] = fo
                else:
                    rxe[j] = fe
                    rxo[j] = fo
                    rye[j] = de
                    ryo[j] = do
                rdist[j] = d
        if transition:
            arm = si[F_ARM]
            if case == 1:
                if arm == 0:
                    si[F_CASE] = 3
                    si[F_DRIVER] = 1 - si[F_DRIVER]
                elif arm == 1:
                    si[F_CASE] = 2
                else:
                    si[F_CASE] = 1
                    si[F_SIDE] = 1 - side
                    si[F_DRIVER] = 1 - si[F_DRIVER]
            elif case == 2:
                si[F_CASE] = 1
            else:
                if arm < 2:
                    si[F_DRIVER] = 1 - si[F_DRIVER]
                else:
                    si[F_CASE] = 1
                    si[F_DRIVER] = 1 - si[F_DRIVER]
            si[F_ARM] = 0
            si[F_MARK] = 0
            depth = 0.0
    return mind, maxd, maxdev, depth
