import math

import numpy as np
import pytest

from shycoupling.convex_geometry import GeometryError, annulus, disc
from shycoupling.reflected_coupling import (DriverError, DriverKind,
                                            PairState, driver_increments,
                                            growth_ex42, independent, mirror,
                                            rotation, simulate_pair,
                                            simulate_pair_ensemble,
                                            step_skorokhod, synchronous)
from shycoupling.rng import path_rng


def test_driver_kind_validation():
    with pytest.raises(DriverError):
        DriverKind("telepathic")


def test_synchronous_increments_identical():
    st = PairState.initial((0.0, 0.0), (0.5, 0.0))
    dB = np.array([[0.3, -0.2]])
    dbx, dby = driver_increments(synchronous(), st, dB, path_rng(0, 0))
    assert np.array_equal(dbx, dby)


def test_mirror_reflects_across_orthogonal_hyperplane():
    st = PairState.initial((0.0, 0.0), (1.0, 0.0))
    rng = path_rng(0, 0)
    # component along x - y flips
    _, dby = driver_increments(mirror(), st, np.array([[0.2, 0.0]]), rng)
    assert np.allclose(dby, [[-0.2, 0.0]])
    # component orthogonal to x - y is kept
    _, dby = driver_increments(mirror(), st, np.array([[0.0, 0.2]]), rng)
    assert np.allclose(dby, [[0.0, 0.2]])


def test_independent_needs_dt_and_draws_fresh():
    st = PairState.initial((0.0, 0.0), (1.0, 0.0))
    dB = np.array([[0.01, 0.02]])
    with pytest.raises(DriverError):
        driver_increments(independent(), st, dB, path_rng(0, 0))
    _, dby = driver_increments(independent(), st, dB, path_rng(0, 0), dt=1e-4)
    assert dby.shape == (1, 2)
    assert not np.allclose(dby, dB)


def test_growth_driver_exact_radial_law_per_step():
    dt = 1e-4
    st = PairState.initial((0.0, 0.0), (1.0, 0.0), n_paths=64)
    rng = path_rng(3, 0)
    dB = rng.standard_normal((64, 2)) * math.sqrt(dt)
    dbx, dby = driver_increments(growth_ex42(), st, dB, rng, dt=dt)
    sep = (st.y0 + dby) - (st.x0 + dbx)
    r2 = np.sum(sep * sep, axis=-1)
    assert np.abs(r2 - (1.0 + 2 * dt)).max() < 1e-12
    # the parallel driver components agree up to O(dt) radial/curvature terms
    e = np.array([1.0, 0.0])
    par_gap = np.abs((dby - dbx) @ e)
    assert par_gap.max() < 30 * dt


def test_growth_driver_partner_is_brownian_in_law():
    dt = 1e-3
    n = 40000
    st = PairState.initial((0.0, 0.0), (1.0, 0.0), n_paths=n)
    rng = path_rng(5, 0)
    dB = rng.standard_normal((n, 2)) * math.sqrt(dt)
    _, dby = driver_increments(growth_ex42(), st, dB, rng, dt=dt)
    z = dby / math.sqrt(dt)
    assert np.abs(z.mean(axis=0)).max() < 0.05
    cov = np.cov(z.T)
    assert np.abs(cov - np.eye(2)).max() < 0.05


def test_growth_driver_rejects_coincident_start():
    st = PairState.initial((0.2, 0.2), (0.2, 0.2))
    with pytest.raises(DriverError):
        driver_increments(growth_ex42(), st, np.array([[0.01, 0.0]]),
                          path_rng(0, 0), dt=1e-4)


def test_step_skorokhod_interior_and_boundary():
    D = disc(1.0)
    pos, push = step_skorokhod(D, [0.0, 0.0], [0.1, 0.05])
    assert np.allclose(pos, [0.1, 0.05])
    assert push == 0.0
    pos, push = step_skorokhod(D, [1.0, 0.0], [0.1, 0.0])
    assert np.allclose(pos, [1.0, 0.0])
    assert push == pytest.approx(0.1, abs=1e-12)


def test_step_skorokhod_keeps_positions_in_closure():
    D = annulus(1.0, 2.0)
    rng = path_rng(9, 0)
    p = np.tile([1.5, 0.0], (200, 1))
    from shycoupling.convex_geometry import contains

    for _ in range(200):
        p, _ = step_skorokhod(D, p, rng.standard_normal((200, 2)) * 0.05)
        assert contains(D, p).all()


def test_simulate_pair_local_time_accounting():
    D = disc(1.0)
    path = simulate_pair(D, synchronous(), (0.9, 0.0), (0.9, 0.0), 1e-3, 2.0,
                         path_rng(2, 0))
    assert np.all(np.diff(path.lx) >= 0)
    # local time increases only at steps that end on the boundary
    inc = np.diff(path.lx)
    on_boundary = np.abs(np.linalg.norm(path.x[1:], axis=-1) - 1.0) < 1e-9
    assert np.all(on_boundary[inc > 0])


def test_simulate_pair_growth_free_space_law():
    D = disc(1e9)
    dt = 1e-4
    path = simulate_pair(D, growth_ex42(), (-0.5, 0.0), (0.5, 0.0), dt, 0.5,
                         path_rng(7, 0))
    b = np.vstack([[0.0, 0.0], np.cumsum(path.dbx, axis=0)])
    w = np.vstack([[0.0, 0.0], np.cumsum(path.dby, axis=0)])
    sep = (np.array([0.5, 0.0]) + w) - (np.array([-0.5, 0.0]) + b)
    sep2 = np.sum(sep * sep, axis=-1)
    assert np.abs(sep2 - (1.0 + 2 * path.t)).max() < 1e-9
    # away from the boundary positions track the drivers exactly
    assert np.abs(path.dist ** 2 - sep2).max() < 1e-9


def test_rotation_coupling_is_exact_isometry():
    D = annulus(1.0, 2.0)
    theta = math.pi / 2
    y0 = (1.5 * math.cos(theta), 1.5 * math.sin(theta))
    path = simulate_pair(D, rotation(theta), (1.5, 0.0), y0, 1e-3, 1.0,
                         path_rng(4, 0))
    rot = np.array([[math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)]])
    assert np.abs(path.y - path.x @ rot.T).max() < 1e-9
    radii = np.linalg.norm(path.x, axis=-1)
    assert np.abs(path.dist - 2 * radii * math.sin(theta / 2)).max() < 1e-9
    assert path.dist.min() >= 2 * math.sin(theta / 2) - 1e-9


def test_rotation_requires_annulus():
    with pytest.raises(DriverError):
        simulate_pair(disc(1.0), rotation(0.5), (0.5, 0.0), (0.0, 0.5), 1e-3,
                      0.1, path_rng(0, 0))


def test_start_positions_validated():
    with pytest.raises(GeometryError):
        simulate_pair(disc(1.0), synchronous(), (2.0, 0.0), (0.0, 0.0), 1e-3,
                      0.1, path_rng(0, 0))


def test_quarter_occupancy_matches_area_fraction():
    # uniform stationary law of reflected Brownian motion in the disc
    res = simulate_pair_ensemble(disc(1.0), synchronous(), (0.3, 0.2),
                                 (0.3, 0.2), 1e-4, 100.0, 10, seed=13)
    pooled = float(np.mean(res.quarter_frac))
    assert pooled == pytest.approx(0.25, abs=0.02)


def test_ensemble_chunking_reproduces_single_run():
    D = disc(1.0)
    kind = mirror()
    full = simulate_pair_ensemble(D, kind, (-0.5, 0.0), (0.5, 0.0), 1e-3,
                                  2.0, 6, seed=21)
    a = simulate_pair_ensemble(D, kind, (-0.5, 0.0), (0.5, 0.0), 1e-3, 2.0,
                               3, seed=21, path_offset=0)
    b = simulate_pair_ensemble(D, kind, (-0.5, 0.0), (0.5, 0.0), 1e-3, 2.0,
                               3, seed=21, path_offset=3)
    assert np.array_equal(full.min_dist, np.concatenate([a.min_dist, b.min_dist]))
    assert np.array_equal(full.lx_final, np.concatenate([a.lx_final, b.lx_final]))
    assert np.array_equal(full.min_ckpt, np.vstack([a.min_ckpt, b.min_ckpt]))


def test_generic_ensemble_chunking_reproduces_single_run():
    # the non-disc route (annulus rotation) must chunk identically too
    D = annulus(1.0, 2.0)
    kind = rotation(1.0)
    y0 = (1.5 * math.cos(1.0), 1.5 * math.sin(1.0))
    full = simulate_pair_ensemble(D, kind, (1.5, 0.0), y0, 1e-3, 1.0, 4,
                                  seed=33)
    a = simulate_pair_ensemble(D, kind, (1.5, 0.0), y0, 1e-3, 1.0, 2, seed=33)
    b = simulate_pair_ensemble(D, kind, (1.5, 0.0), y0, 1e-3, 1.0, 2, seed=33,
                               path_offset=2)
    assert np.array_equal(full.min_dist, np.concatenate([a.min_dist, b.min_dist]))


def test_pair_series_recording():
    res = simulate_pair_ensemble(disc(1.0), synchronous(), (-0.5, 0.0),
                                 (0.5, 0.0), 1e-3, 1.0, 2, seed=3,
                                 rec_stride=10)
    assert res.path0 is not None
    assert len(res.path0.t) == 100
    assert np.all(np.diff(res.path0.lx) >= -1e-15)
