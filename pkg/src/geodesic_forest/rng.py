"""Deterministic, parallel-safe random stream derivation.

Every random draw in the package flows from a user-visible 64-bit seed
through a counter-based generator (Philox). Independent subsystems get
independent streams by extending the seed with a small integer path, so
the same (seed, path) pair yields the same stream no matter which
worker, thread, or call order touches it first.

Stream paths in use:

    (TAG_MIXTURE_PROBS,)        class probabilities of a mixture spec
    (TAG_CLASS_MEAN, k)         tangent draw for class k's mean
    (TAG_CLASS_COV, k)          covariance factor for class k
    (TAG_SAMPLE, i)             mixture sample i (class pick + noise)
    (TAG_TREE, i)               forest member i (bootstrap resample)
    (TAG_CV_SPLIT,)             cross-validation fold permutation
    (TAG_FOLD_MODEL, fold)      per-fold model seed derivation
    (TAG_SWEEP, value, trial)   scaling-sweep dataset generation
"""

from __future__ import annotations

import numpy as np

TAG_MIXTURE_PROBS = 0
TAG_CLASS_MEAN = 1
TAG_CLASS_COV = 2
TAG_SAMPLE = 3
TAG_TREE = 4
TAG_CV_SPLIT = 5
TAG_FOLD_MODEL = 6
TAG_SWEEP = 7


def stream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the sub-stream identified by (seed, *path)."""
    ss = np.random.SeedSequence(
        entropy=int(seed), spawn_key=tuple(int(p) for p in path)
    )
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """Stable 63-bit child seed for handing to a nested component."""
    return int(stream(seed, *path).integers(0, 2**63 - 1))
