"""Permutations, configuration sampling, and small serialization helpers."""

from __future__ import annotations

import itertools
import json
import math
from pathlib import Path

import numpy as np

from .errors import OrbitCheckInfeasible

_SEED_MASK = (1 << 64) - 1

# Exhaustive permutation checks stay affordable up to 6! = 720.
EXHAUSTIVE_ORBIT_LIMIT = 6


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Generator for one trial, independent of how trials are scheduled."""
    return np.random.default_rng((int(seed) & _SEED_MASK, int(trial)))


def perm_sign(perm) -> int:
    """Signature of a permutation given as a tuple of images of 0..n-1."""
    n = len(perm)
    seen = [False] * n
    sign = 1
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def all_permutations(n: int) -> list[tuple[int, ...]]:
    return [tuple(p) for p in itertools.permutations(range(n))]


def even_permutations(n: int) -> list[tuple[int, ...]]:
    return [p for p in all_permutations(n) if perm_sign(p) == 1]


def random_permutation(rng: np.random.Generator, n: int) -> tuple[int, ...]:
    return tuple(int(i) for i in rng.permutation(n))


def random_even_permutation(rng: np.random.Generator, n: int) -> tuple[int, ...]:
    perm = list(rng.permutation(n))
    if perm_sign(tuple(perm)) < 0:
        perm[0], perm[1] = perm[1], perm[0]
    return tuple(int(i) for i in perm)


def apply_perm(coords: np.ndarray, perm) -> np.ndarray:
    """Reorder particle rows: row i of the result is row perm[i] of the input."""
    return coords[list(perm), :]


def same_orbit(a: np.ndarray, b: np.ndarray, *, tol: float = 1e-9,
               method: str = "exhaustive", canon=None) -> bool:
    """Whether b is a particle reordering of a (within tol, max-norm).

    method="exhaustive" compares against every permutation and is limited to
    n <= 6; method="canonical" compares caller-supplied canonical orderings.
    """
    n = a.shape[0]
    if method == "exhaustive":
        if n > EXHAUSTIVE_ORBIT_LIMIT:
            raise OrbitCheckInfeasible(
                f"exhaustive orbit check is limited to n <= {EXHAUSTIVE_ORBIT_LIMIT}, got n={n}"
            )
        for perm in itertools.permutations(range(n)):
            if np.max(np.abs(a[list(perm), :] - b)) <= tol:
                return True
        return False
    if method == "canonical":
        if canon is None:
            raise ValueError("method='canonical' requires a canon ordering function")
        return bool(np.max(np.abs(canon(a) - canon(b))) <= tol)
    raise ValueError(f"unknown orbit-check method {method!r}")


def sample_box(rng: np.random.Generator, n: int, d: int, box) -> np.ndarray:
    """Uniform configuration from a per-coordinate box (lo, hi arrays of length d)."""
    lo, hi = box
    return rng.uniform(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float), size=(n, d))


def min_pairwise_distance(coords: np.ndarray) -> float:
    n = coords.shape[0]
    if n < 2:
        return math.inf
    diffs = coords[:, None, :] - coords[None, :, :]
    dist = np.sqrt((diffs ** 2).sum(axis=2))
    iu = np.triu_indices(n, 1)
    return float(dist[iu].min())


def sample_distinct(rng: np.random.Generator, n: int, d: int, box,
                    gap: float, max_tries: int = 1000) -> np.ndarray:
    """Rejection-sample a configuration with pairwise particle distance >= gap."""
    for _ in range(max_tries):
        coords = sample_box(rng, n, d, box)
        if min_pairwise_distance(coords) >= gap:
            return coords
    raise RuntimeError(f"could not sample a gap-{gap} configuration in {max_tries} tries")


def sample_with_collision(rng: np.random.Generator, n: int, d: int, box) -> np.ndarray:
    """Uniform configuration with one particle pair forced to coincide exactly."""
    coords = sample_box(rng, n, d, box)
    if n >= 2:
        i, j = rng.choice(n, size=2, replace=False)
        coords[int(j)] = coords[int(i)]
    return coords


def format17(x: float) -> str:
    """Decimal with 17 significant digits; round-trips any double."""
    return format(float(x), ".17g")


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_json(path):
    return json.loads(Path(path).read_text())
