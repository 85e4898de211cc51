"""Deterministic random number streams for parallel ensembles."""

import numpy as np


def path_rng(seed: int, path_index: int = 0) -> np.random.Generator:
    """Return the counter-based generator for one simulation path.

    Splitting rule: path ``i`` of a run seeded with ``seed`` draws from a
    Philox generator keyed ``seed ^ i``. Philox is counter-based, so the
    stream depends only on (seed, path index, draw counter) and ensembles
    reproduce bit-for-bit under any worker scheduling.
    """
    if seed < 0 or path_index < 0:
        raise ValueError("seed and path_index must be nonnegative")
    return np.random.Generator(np.random.Philox(key=seed ^ path_index))


def pregenerate_step_draws(rng: np.random.Generator, n_steps: int):
    """Draw the fixed per-step randomness block consumed by path kernels.

    Every kernel step consumes from the same layout: two standard normals
    and four uniforms. Fixing the layout keeps consumption independent of
    which coupling phase a path is in.
    """
    gauss = rng.standard_normal((n_steps, 2))
    unif = rng.random((n_steps, 4))
    return gauss, unif
