"""Anti-symmetric feature maps built from projected pairwise differences.

For a configuration x = (x_1, ..., x_n) of n particles in R^d, each
projection vector w_k yields the scalar list s_i = w_k . x_i and the
anti-symmetrizer

    phi_k(x) = prod_{i<j} (s_i - s_j),

the product of pairwise differences of the projected values (equal, up to a
fixed sign, to the determinant of the matrix with rows (1, s_i, ..., s_i^{n-1})).
Every phi_k flips sign under odd particle swaps and vanishes exactly when two
particles coincide. Multiplying the vector phi = (phi_1, ..., phi_p) by the
power-sum invariants

    psi_alpha(x) = sum_i prod_j x_{i,j}^{alpha_j},   1 <= |alpha| <= n,

gives the full feature map

    eta(x) = (phi, psi_1 * phi, ..., psi_q * phi)   in R^{p(q+1)},

whose components are anti-symmetric, vanish iff two particles coincide, and
jointly separate particle multisets: equal nonzero feature vectors force the
configurations to be reorderings of each other.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .geometry import ProjectionMode, ProjectionSet, build_projection_set
from .util import dump_json, format17, load_json

#: Default domain: the unit box, on which no rescaling is applied.
UNIT_BOX_ATOL = 0.0


def multi_indices_up_to(n: int, d: int) -> tuple[tuple[int, ...], ...]:
    """All exponent tuples alpha in N^d with 1 <= |alpha| <= n, lexicographic."""
    out = [
        alpha
        for alpha in itertools.product(range(n + 1), repeat=d)
        if 1 <= sum(alpha) <= n
    ]
    out.sort()
    return tuple(out)


def _is_unit_box(box) -> bool:
    lo, hi = box
    return bool(np.all(np.asarray(lo) == -1.0) and np.all(np.asarray(hi) == 1.0))


@dataclass(frozen=True)
class FeatureMapSpec:
    """Static shape of the feature map: counts, exponents, projections, domain.

    The domain box (per-coordinate lo/hi) declares the compact region the map
    is used on. Configurations are affinely rescaled into [-1, 1]^d before
    evaluation unless the box already is [-1, 1]^d; the box is part of the
    spec so evaluations stay reproducible.
    """

    n: int
    d: int
    projections: ProjectionSet
    multi_indices: tuple[tuple[int, ...], ...]
    domain_box: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        if self.projections.d != self.d:
            raise DimensionMismatch(
                f"projection dimension {self.projections.d} != particle dimension {self.d}"
            )
        expected_q = math.comb(self.n + self.d, self.d) - 1
        if len(self.multi_indices) != expected_q:
            raise ValueError(
                f"expected {expected_q} multi-indices for (n={self.n}, d={self.d}), "
                f"got {len(self.multi_indices)}"
            )
        if list(self.multi_indices) != sorted(set(self.multi_indices)):
            raise ValueError("multi_indices must be strictly increasing (lexicographic)")
        for alpha in self.multi_indices:
            if len(alpha) != self.d or not 1 <= sum(alpha) <= self.n:
                raise ValueError(f"multi-index {alpha} out of range for (n, d)")
        if self.domain_box is not None:
            lo, hi = (np.asarray(side, dtype=float) for side in self.domain_box)
            if lo.shape != (self.d,) or hi.shape != (self.d,):
                raise DimensionMismatch("domain_box sides must have length d")
            if not np.all(lo < hi):
                raise ValueError("domain_box must have lo < hi per coordinate")
            object.__setattr__(
                self, "domain_box", (tuple(lo.tolist()), tuple(hi.tolist()))
            )

    @property
    def p(self) -> int:
        return self.projections.p

    @property
    def q(self) -> int:
        return len(self.multi_indices)

    @property
    def m(self) -> int:
        return self.p * (self.q + 1)

    def sampling_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Box used for drawing random configurations (unit box by default)."""
        if self.domain_box is None:
            return -np.ones(self.d), np.ones(self.d)
        lo, hi = self.domain_box
        return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)

    def rescale_slope(self) -> np.ndarray:
        """Per-coordinate derivative of the affine map into [-1, 1]^d."""
        if self.domain_box is None or _is_unit_box(self.domain_box):
            return np.ones(self.d)
        lo, hi = (np.asarray(s, dtype=float) for s in self.domain_box)
        return 2.0 / (hi - lo)

    def rescale(self, coords: np.ndarray) -> np.ndarray:
        if self.domain_box is None or _is_unit_box(self.domain_box):
            return coords
        lo, hi = (np.asarray(s, dtype=float) for s in self.domain_box)
        mid = (lo + hi) / 2.0
        half = (hi - lo) / 2.0
        return (coords - mid) / half

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "p": self.p,
            "q": self.q,
            "m": self.m,
            "projections": self.projections.to_json_dict(),
            "multi_indices": [list(a) for a in self.multi_indices],
            "domain_box": None
            if self.domain_box is None
            else [list(self.domain_box[0]), list(self.domain_box[1])],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "FeatureMapSpec":
        spec = cls(
            n=int(data["n"]),
            d=int(data["d"]),
            projections=ProjectionSet.from_json_dict(data["projections"]),
            multi_indices=tuple(tuple(int(e) for e in a) for a in data["multi_indices"]),
            domain_box=None
            if data.get("domain_box") is None
            else (tuple(data["domain_box"][0]), tuple(data["domain_box"][1])),
        )
        for key in ("p", "q", "m"):
            if key in data and int(data[key]) != getattr(spec, key):
                raise ValueError(f"inconsistent stored count {key}={data[key]}")
        return spec

    def save(self, path) -> None:
        dump_json(self.to_json_dict(), path)

    @classmethod
    def load(cls, path) -> "FeatureMapSpec":
        return cls.from_json_dict(load_json(path))


def build_feature_map(n: int, d: int,
                      mode: ProjectionMode = ProjectionMode.PAIRWISE,
                      domain_box=None) -> FeatureMapSpec:
    return FeatureMapSpec(
        n=n,
        d=d,
        projections=build_projection_set(n, d, mode),
        multi_indices=multi_indices_up_to(n, d),
        domain_box=domain_box,
    )


@dataclass(frozen=True)
class ParticleConfiguration:
    """A point x = (x_1, ..., x_n) with rows as particles."""

    coords: np.ndarray  # (n, d)
    domain_box: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2 or coords.shape[0] < 1 or coords.shape[1] < 1:
            raise DimensionMismatch(f"coords must be (n, d) with n, d >= 1, got {coords.shape}")
        object.__setattr__(self, "coords", coords)
        if self.domain_box is not None:
            lo, hi = (np.asarray(s, dtype=float) for s in self.domain_box)
            if lo.shape != (coords.shape[1],) or hi.shape != (coords.shape[1],):
                raise DimensionMismatch("domain_box sides must have length d")
            if np.any(coords < lo) or np.any(coords > hi):
                raise ValueError("coordinates lie outside the declared domain box")

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class FeatureVector:
    """eta(x) together with the spec that produced it."""

    values: np.ndarray  # (m,)
    spec: FeatureMapSpec = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.spec.m,):
            raise DimensionMismatch(
                f"feature vector length {values.shape} != spec m={self.spec.m}"
            )


def coerce_coords(x, n: int, d: int) -> np.ndarray:
    """Accept a ParticleConfiguration or array-like and check it against (n, d)."""
    if isinstance(x, ParticleConfiguration):
        coords = x.coords
    else:
        coords = np.asarray(x, dtype=float)
        if coords.ndim == 1 and d == 1:
            coords = coords[:, None]
    if coords.shape != (n, d):
        raise DimensionMismatch(f"expected coordinates of shape ({n}, {d}), got {coords.shape}")
    return coords


def _projected(spec: FeatureMapSpec, coords: np.ndarray) -> np.ndarray:
    return spec.rescale(coords) @ spec.projections.vectors.T  # (n, p)


def eval_phi(spec: FeatureMapSpec, x) -> np.ndarray:
    """Pairwise-difference products, one per projection.

    Component k is prod_{i<j} (w_k.x_i - w_k.x_j); the product form (never a
    determinant expansion) keeps the evaluation exact on collisions and
    matches the sign convention phi(x_1, x_2) = x_1 - x_2 for n = 2, d = 1.
    """
    coords = coerce_coords(x, spec.n, spec.d)
    projected = _projected(spec, coords)
    n = spec.n
    if n < 2:
        return np.ones(spec.p)
    iu, ju = np.triu_indices(n, 1)
    return np.prod(projected[iu, :] - projected[ju, :], axis=0)


def eval_psi(spec: FeatureMapSpec, x) -> np.ndarray:
    """Power sums: component alpha is sum_i prod_j x_{i,j}^{alpha_j}.

    Invariant under any particle reordering; together the components
    determine the particle multiset.
    """
    coords = coerce_coords(x, spec.n, spec.d)
    u = spec.rescale(coords)
    alphas = np.asarray(spec.multi_indices, dtype=np.int64)  # (q, d)
    monomials = np.prod(u[:, None, :] ** alphas[None, :, :], axis=2)  # (n, q)
    return monomials.sum(axis=0)


def eval_eta_array(spec: FeatureMapSpec, x) -> np.ndarray:
    """eta(x) as a plain array: (phi, psi_1*phi, ..., psi_q*phi)."""
    coords = coerce_coords(x, spec.n, spec.d)
    phi = eval_phi(spec, coords)
    psi = eval_psi(spec, coords)
    scale = np.concatenate(([1.0], psi))
    return (scale[:, None] * phi[None, :]).ravel()


def eval_eta(spec: FeatureMapSpec, x) -> FeatureVector:
    return FeatureVector(values=eval_eta_array(spec, x), spec=spec)


def eval_eta_batch(spec: FeatureMapSpec, xs) -> list[FeatureVector]:
    """Map eval_eta over configurations, preserving order.

    Evaluates sequentially so results are bitwise identical to single calls;
    a shape error is reported with the index of the offending element.
    """
    out = []
    for idx, x in enumerate(xs):
        try:
            out.append(eval_eta(spec, x))
        except DimensionMismatch as exc:
            raise DimensionMismatch(f"configuration {idx}: {exc}") from exc
    return out


def export_features_csv(path, spec: FeatureMapSpec, xs) -> None:
    """One row per configuration: n*d input coordinates then m feature values."""
    header = [f"x_{i}_{j}" for i in range(spec.n) for j in range(spec.d)]
    header += [f"eta_{r}" for r in range(spec.m)]
    lines = [",".join(header)]
    for x in xs:
        coords = coerce_coords(x, spec.n, spec.d)
        values = eval_eta_array(spec, coords)
        row = [format17(v) for v in coords.ravel()] + [format17(v) for v in values]
        lines.append(",".join(row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def export_features_json(path, spec: FeatureMapSpec, xs) -> None:
    inputs, feats = [], []
    for x in xs:
        coords = coerce_coords(x, spec.n, spec.d)
        inputs.append(coords.tolist())
        feats.append(eval_eta_array(spec, coords).tolist())
    dump_json({"spec": spec.to_json_dict(), "inputs": inputs, "features": feats}, path)


def read_configs_csv(path, n: int, d: int) -> list[np.ndarray]:
    """Configurations from CSV rows of n*d coordinates; a header row is skipped."""
    configs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                values = [float(c) for c in cells[: n * d]]
            except ValueError:
                continue  # header row
            if len(values) != n * d:
                raise DimensionMismatch(
                    f"CSV row has {len(values)} coordinates, expected {n * d}"
                )
            configs.append(np.asarray(values).reshape(n, d))
    return configs
