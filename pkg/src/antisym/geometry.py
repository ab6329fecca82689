"""Projection vector sets in generic position.

A set of p vectors in R^d is in generic position when any d of them form a
basis. Points on the moment curve (1, t, t^2, ..., t^{d-1}) with distinct
nodes have exactly this property: every d x d submatrix is a Vandermonde
matrix with distinct nodes, hence nonsingular. The construction below is
deterministic, so identical inputs always give bit-identical vector sets.

Two set sizes are supported: ``pairwise`` uses p = n(n-1)/2 * (d-1) + 1,
which guarantees that for any configuration of n distinct particles some
projection separates all pairs (each coinciding pair can ruin at most d-1
projections); ``linear`` uses the smaller p = d*n + 1.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CollidingInput, DimensionMismatch
from .util import min_pairwise_distance

UNIT_NORM_TOL = 1e-12
SUBSET_DET_TOL = 1e-10


class ProjectionMode(str, enum.Enum):
    PAIRWISE = "pairwise"
    LINEAR = "linear"


def projection_count(n: int, d: int, mode: ProjectionMode) -> int:
    if mode is ProjectionMode.PAIRWISE:
        return n * (n - 1) // 2 * (d - 1) + 1
    if mode is ProjectionMode.LINEAR:
        return d * n + 1
    raise ValueError(f"unknown projection mode {mode!r}")


@dataclass(frozen=True)
class ProjectionSet:
    """p unit vectors in R^d, any d of which are linearly independent."""

    vectors: np.ndarray  # (p, d), unit rows
    n: int
    d: int
    mode: ProjectionMode

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=float)
        object.__setattr__(self, "vectors", vectors)
        if vectors.ndim != 2 or vectors.shape[1] != self.d:
            raise DimensionMismatch(
                f"expected vectors of shape (p, {self.d}), got {vectors.shape}"
            )

    @property
    def p(self) -> int:
        return self.vectors.shape[0]

    def unit_norm_errors(self) -> np.ndarray:
        return np.abs(np.linalg.norm(self.vectors, axis=1) - 1.0)

    def min_subset_determinant(self, max_subsets: int = 20000,
                               rng: np.random.Generator | None = None) -> float:
        """Smallest |det| over d x d submatrices of the stacked vectors.

        Exhaustive when C(p, d) <= max_subsets, randomized subset sampling
        otherwise (rng required in that case).
        """
        from math import comb

        p, d = self.vectors.shape
        if comb(p, d) <= max_subsets:
            subsets = itertools.combinations(range(p), d)
            dets = [abs(np.linalg.det(self.vectors[list(s)])) for s in subsets]
            return float(min(dets))
        if rng is None:
            rng = np.random.default_rng(0)
        best = np.inf
        for _ in range(max_subsets):
            idx = rng.choice(p, size=d, replace=False)
            best = min(best, abs(np.linalg.det(self.vectors[idx])))
        return float(best)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "mode": self.mode.value,
            "vectors": self.vectors.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ProjectionSet":
        return cls(
            vectors=np.asarray(data["vectors"], dtype=float),
            n=int(data["n"]),
            d=int(data["d"]),
            mode=ProjectionMode(data["mode"]),
        )


def build_projection_set(n: int, d: int,
                         mode: ProjectionMode = ProjectionMode.PAIRWISE) -> ProjectionSet:
    """Deterministic generic-position set from the moment curve.

    Nodes t_k = k/(p+1), k = 1..p, are distinct, so any d of the rows
    (1, t_k, ..., t_k^{d-1}) form a nonsingular Vandermonde matrix; unit
    normalization (a positive row scaling) preserves that.
    """
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    mode = ProjectionMode(mode)
    p = projection_count(n, d, mode)
    nodes = np.arange(1, p + 1, dtype=float) / (p + 1)
    raw = nodes[:, None] ** np.arange(d)[None, :]
    vectors = raw / np.linalg.norm(raw, axis=1, keepdims=True)
    return ProjectionSet(vectors=vectors, n=n, d=d, mode=mode)


def find_separating_projection(projections: ProjectionSet, x, *,
                               collision_tol: float | None = None,
                               separation_tol: float | None = None) -> int | None:
    """Smallest index k whose projection separates every particle pair.

    Returns the 0-based index of the first vector w_k for which all pairwise
    projected values w_k.x_i differ by more than the separation tolerance, or
    None if no vector clears it (tolerance too tight, not a logic error for
    the supported set sizes). Tolerances default to 1e-12*(1+max|x|) for the
    collision check and 1e-9*(1+max|x|) for separation, scaling with the
    input so large domains are not misclassified.
    """
    coords = np.asarray(x, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    if coords.ndim != 2 or coords.shape[1] != projections.d:
        raise DimensionMismatch(
            f"expected (n, {projections.d}) coordinates, got shape {coords.shape}"
        )
    scale = 1.0 + float(np.max(np.abs(coords))) if coords.size else 1.0
    if collision_tol is None:
        collision_tol = 1e-12 * scale
    if separation_tol is None:
        separation_tol = 1e-9 * scale
    if min_pairwise_distance(coords) <= collision_tol:
        raise CollidingInput("two particles coincide within the collision tolerance")

    n = coords.shape[0]
    if n < 2:
        return 0
    projected = coords @ projections.vectors.T  # (n, p)
    iu, ju = np.triu_indices(n, 1)
    gaps = np.abs(projected[iu, :] - projected[ju, :])  # (pairs, p)
    ok = np.min(gaps, axis=0) > separation_tol
    hits = np.flatnonzero(ok)
    return int(hits[0]) if hits.size else None
