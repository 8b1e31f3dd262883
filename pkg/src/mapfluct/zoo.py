"""Reference models: birth-death chains, a seeded random-model generator and
the fixed Monte Carlo benchmark set."""

import numpy as np

from .model import (C1_ZERO, LatticeModel, MmbmModel, birth_death, drift_and_pi,
                    validate)

RANDOM_SEED = 20240917
MIN_ABS_DRIFT = 0.05
MIN_G_MODULUS = 0.1
DOWN_MIXING = 0.3


def bd(up, down, kill=0.0):
    return validate(birth_death(up, down, kill), strict=False)


def random_lattice(rng, n_phases, max_jump, defective, rank_one_down=False):
    """Uniform rates on every block; killing on a random non-empty set of phases.

    Downward steps keep the phase at rate U(0.5, 1.5) and switch it at rate
    ``DOWN_MIXING * U(0, 1)``.
    """
    n = n_phases
    blocks = []
    if rank_one_down:
        u, v = rng.uniform(0.2, 1.0, n), rng.uniform(0.2, 1.0, n)
        blocks.append(np.outer(u, v))
    else:
        mix = DOWN_MIXING * rng.uniform(0.0, 1.0, (n, n))
        np.fill_diagonal(mix, 0.0)
        blocks.append(np.diag(rng.uniform(0.5, 1.5, n)) + mix)
    off = rng.uniform(0.1, 1.0, (n, n))
    np.fill_diagonal(off, 0.0)
    blocks.append(off)
    up_scale = rng.uniform(0.2, 1.0) / (n * max_jump)
    for _ in range(max_jump):
        blocks.append(up_scale * rng.uniform(0.0, 2.0, (n, n)))
    total = sum(blocks).sum(axis=1)
    kill = np.zeros(n)
    if defective:
        mask = rng.random(n) < 0.5
        mask[rng.integers(n)] = True
        kill[mask] = rng.uniform(0.1, 1.0, mask.sum())
    blocks[1] = blocks[1] - np.diag(total + kill)
    return LatticeModel(tuple(blocks))


def random_models(count=50, seed=RANDOM_SEED):
    """``count`` models: N in {2,3,4}, M in {1,2,3}, every other one defective.

    Every fifth model has a rank-one ``A_{-1}``.  Non-defective draws whose
    drift is within ``MIN_ABS_DRIFT`` of zero are redrawn, so no model sits at
    the null-recurrent boundary.  Full-rank draws whose G has an eigenvalue of
    modulus below ``MIN_G_MODULUS`` are redrawn too: the scale matrices grow
    like ``|eig|^-k`` along that direction and ratios of them lose about
    ``log10 cond W(k)`` digits.
    """
    from .solvers import solve_G_lattice
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        i = len(out)
        n = int(rng.integers(2, 5))
        M = int(rng.integers(1, 4))
        model = random_lattice(rng, n, M, defective=(i % 2 == 1), rank_one_down=(i % 5 == 4))
        model = validate(model)
        reg = drift_and_pi(model)
        if not model.is_defective and abs(reg.mu) < MIN_ABS_DRIFT:
            continue
        if i % 5 != 4:
            eig = np.linalg.eigvals(solve_G_lattice(model))
            if np.min(np.abs(eig)) < MIN_G_MODULUS:
                continue
        out.append(model)
    return out


def _lat(*blocks, strict=True):
    return validate(LatticeModel(tuple(np.array(b, float) for b in blocks)), strict=strict)


def mc_models():
    """Five lattice benchmarks for simulation agreement, keyed by name."""
    return {
        "bd12_killed": bd(1.0, 2.0, 0.5),
        "two_phase_down": _lat([[1.5, 0.2], [0.3, 2.0]],
                               [[-3.0, 0.4], [0.5, -3.5]],
                               [[0.4, 0.2], [0.1, 0.3]],
                               [[0.2, 0.1], [0.1, 0.2]]),
        "three_phase_killed": _lat([[1.0, 0.3, 0.2], [0.2, 1.2, 0.3], [0.4, 0.1, 0.9]],
                                   [[-3.6, 0.5, 0.3], [0.4, -3.6, 0.5], [0.3, 0.6, -3.3]],
                                   [[0.4, 0.2, 0.1], [0.2, 0.3, 0.1], [0.1, 0.2, 0.3]],
                                   [[0.1, 0.0, 0.1], [0.0, 0.1, 0.1], [0.1, 0.1, 0.0]]),
        "rank_one_down": _lat([[0.8, 0.4], [1.2, 0.6]],
                              [[-2.9, 0.6], [0.5, -3.1]],
                              [[0.4, 0.3], [0.2, 0.3]]),
        "two_phase_up": _lat([[0.5, 0.1], [0.2, 0.4]],
                             [[-2.4, 0.6], [0.7, -2.6]],
                             [[0.8, 0.4], [0.5, 0.8]]),
    }


def mmbm_scalar(drift=-1.0, variance=2.0, kill=1.0):
    return validate(MmbmModel([drift], [variance], [[-kill]]))


def mmbm_two_phase():
    """Slowly mixing two-phase Brownian model used for the creeping identity."""
    return validate(MmbmModel([-1.0, -0.5], [1.0, 2.0], [[-0.2, 0.2], [0.3, -0.3]]))


def mmbm_two_phase_fast():
    """A faster-mixing two-phase Brownian model with one upward phase."""
    return validate(MmbmModel([-1.0, 0.5], [1.0, 2.0], [[-1.0, 1.0], [2.0, -2.0]]))


def is_null_recurrent(model):
    return drift_and_pi(model).tag == C1_ZERO
