"""Randomized certifiers for the feature map's defining properties.

Each certifier samples seeded trials and produces a CertificationReport with
the trial count, failure count, worst observed violation, and up to ten
failing witnesses. Reports are deterministic functions of (spec, trials,
seed): every trial derives its own RNG stream from (seed, trial index), so
results do not depend on scheduling.

The certifiers accept a pluggable evaluation function so deliberately
corrupted maps can be checked too; `mutant_eta` / `mutant_psi` build the
stock corruptions used by the mutation-sensitivity tests that guard against
vacuous certifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch
from .features import FeatureMapSpec, eval_eta_array, eval_phi, eval_psi
from .geometry import find_separating_projection
from .util import (
    EXHAUSTIVE_ORBIT_LIMIT,
    all_permutations,
    apply_perm,
    dump_json,
    load_json,
    perm_sign,
    random_permutation,
    same_orbit,
    sample_box,
    sample_distinct,
    sample_with_collision,
    trial_rng,
)

PROPERTY_NAMES = (
    "anti_symmetry",
    "symmetry_psi",
    "zero_iff_collision",
    "orbit_separation",
    "odd_well_defined",
    "full_rank_off_singular",
)

WITNESS_CAP = 10

DEFAULT_TOLERANCES = {
    # Relative sign-law violation, normalized by 1 + ||eta(x)||_inf.
    "anti_symmetry_rtol": 1e-10,
    "symmetry_rtol": 1e-10,
    # ||eta||_inf at a collision, normalized by (1 + ||x||_inf)^{n(n-1)/2}.
    "zero_tol": 1e-12,
    # Max-norm gap required between feature vectors of distinct orbits.
    "separation_tol": 1e-10,
    # Pairwise particle distance enforced when sampling "distinct" inputs.
    "distinct_gap": 1e-3,
}

MUTATION_KINDS = ("sign-flip", "drop-block", "zero-phi", "duplicate-psi")


@dataclass
class CertificationReport:
    """Machine-readable outcome of one certification run."""

    property: str
    trials: int
    failures: int
    worst_violation: float
    witnesses: list
    seed: int
    tolerances: dict
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.property not in PROPERTY_NAMES:
            raise ValueError(f"unknown property {self.property!r}")
        if (self.failures == 0) != (len(self.witnesses) == 0):
            raise ValueError("failures and witnesses disagree")

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_json_dict(self) -> dict:
        return {
            "property": self.property,
            "trials": self.trials,
            "failures": self.failures,
            "worst_violation": self.worst_violation,
            "witnesses": self.witnesses,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "stats": self.stats,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "CertificationReport":
        return cls(**{k: data[k] for k in (
            "property", "trials", "failures", "worst_violation",
            "witnesses", "seed", "tolerances", "stats",
        )})

    def save(self, path) -> None:
        dump_json(self.to_json_dict(), path)

    @classmethod
    def load(cls, path) -> "CertificationReport":
        return cls.from_json_dict(load_json(path))


class _Collector:
    """Accumulates violations and capped witnesses for a report."""

    def __init__(self):
        self.failures = 0
        self.worst = 0.0
        self.witnesses = []

    def record(self, violation: float, failed: bool, witness: dict):
        self.worst = max(self.worst, float(violation))
        if failed:
            self.failures += 1
            if len(self.witnesses) < WITNESS_CAP:
                self.witnesses.append(witness)

    def report(self, property: str, trials: int, seed: int,
               tolerances: dict, stats: dict | None = None) -> CertificationReport:
        return CertificationReport(
            property=property,
            trials=trials,
            failures=self.failures,
            worst_violation=self.worst,
            witnesses=self.witnesses,
            seed=seed,
            tolerances=tolerances,
            stats=stats or {},
        )


def _perms_for_trial(spec: FeatureMapSpec, rng) -> list[tuple[int, ...]]:
    if spec.n <= 4:
        return all_permutations(spec.n)
    return [random_permutation(rng, spec.n)]


def certify_antisymmetry(spec: FeatureMapSpec, trials: int, seed: int, *,
                         eta_fn=None, rtol: float | None = None) -> CertificationReport:
    """Check eta(sigma.x) = sgn(sigma) * eta(x) on random configurations.

    All n! permutations are checked per sample for n <= 4, one random
    permutation per sample beyond that. The violation measure is
    ||eta(sigma.x) - sgn(sigma)*eta(x)||_inf / (1 + ||eta(x)||_inf).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if eta_fn is None:
        eta_fn = lambda coords: eval_eta_array(spec, coords)
    if rtol is None:
        rtol = DEFAULT_TOLERANCES["anti_symmetry_rtol"]
    box = spec.sampling_box()
    col = _Collector()
    for t in range(trials):
        rng = trial_rng(seed, t)
        coords = sample_box(rng, spec.n, spec.d, box)
        base = eta_fn(coords)
        denom = 1.0 + float(np.max(np.abs(base))) if base.size else 1.0
        for perm in _perms_for_trial(spec, rng):
            permuted = eta_fn(apply_perm(coords, perm))
            viol = float(np.max(np.abs(permuted - perm_sign(perm) * base))) / denom
            col.record(viol, viol > rtol, {
                "trial": t, "coords": coords.tolist(), "perm": list(perm),
                "violation": viol,
            })
    return col.report("anti_symmetry", trials, seed, {"anti_symmetry_rtol": rtol})


def certify_zero_iff_collision(spec: FeatureMapSpec, trials: int, seed: int, *,
                               eta_fn=None, zero_tol: float | None = None,
                               distinct_gap: float | None = None) -> CertificationReport:
    """Forward: collisions give eta = 0; reverse: well-separated inputs do not.

    The zero tolerance scales as zero_tol * (1 + ||x||_inf)^{n(n-1)/2}, the
    worst-case growth of the pairwise-difference products. The reverse
    direction samples configurations with pairwise gap >= distinct_gap, since
    the map is continuous and legitimately tiny near collisions, and demands
    ||eta||_inf > 0 strictly.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if eta_fn is None:
        eta_fn = lambda coords: eval_eta_array(spec, coords)
    if zero_tol is None:
        zero_tol = DEFAULT_TOLERANCES["zero_tol"]
    if distinct_gap is None:
        distinct_gap = DEFAULT_TOLERANCES["distinct_gap"]
    box = spec.sampling_box()
    pairs = spec.n * (spec.n - 1) // 2
    col = _Collector()
    for t in range(trials):
        rng = trial_rng(seed, t)
        if spec.n >= 2:
            coords = sample_with_collision(rng, spec.n, spec.d, box)
            scale = (1.0 + float(np.max(np.abs(coords)))) ** pairs
            norm = float(np.max(np.abs(eta_fn(coords))))
            viol = norm / scale
            col.record(viol, viol > zero_tol, {
                "trial": t, "direction": "collision", "coords": coords.tolist(),
                "violation": viol,
            })
        distinct = sample_distinct(rng, spec.n, spec.d, box, distinct_gap)
        norm = float(np.max(np.abs(eta_fn(distinct))))
        col.record(0.0, norm <= 0.0, {
            "trial": t, "direction": "distinct", "coords": distinct.tolist(),
            "violation": 0.0 if norm > 0 else float("inf"),
        })
    return col.report(
        "zero_iff_collision", trials, seed,
        {"zero_tol": zero_tol, "distinct_gap": distinct_gap},
    )


def _canonical_order(spec: FeatureMapSpec):
    """Row ordering by a separating projection, for orbit checks beyond n=6."""
    from .errors import CollidingInput

    def canon(coords: np.ndarray) -> np.ndarray:
        try:
            k = find_separating_projection(spec.projections, coords)
        except CollidingInput:
            k = None
        if k is None:
            # Colliding or unseparated input: lexicographic row order instead.
            order = np.lexsort(coords.T[::-1])
        else:
            order = np.argsort(coords @ spec.projections.vectors[k], kind="stable")
        return coords[order]

    return canon


def _off_orbit(spec: FeatureMapSpec, a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    if spec.n <= EXHAUSTIVE_ORBIT_LIMIT:
        return not same_orbit(a, b, tol=tol)
    return not same_orbit(a, b, tol=tol, method="canonical", canon=_canonical_order(spec))


def certify_orbit_separation(spec: FeatureMapSpec, trials: int, seed: int, *,
                             eta_fn=None, rtol: float | None = None,
                             separation_tol: float | None = None,
                             distinct_gap: float | None = None) -> CertificationReport:
    """Even reorderings preserve eta; distinct orbits get distinct features.

    Positive direction: x' = sigma.x with even sigma must give equal feature
    vectors (normalized max-norm error <= rtol). Negative direction: two
    independent distinct-particle samples, verified off each other's orbit
    (exhaustively for n <= 6, by sorted-projection canonical form beyond),
    must differ by more than separation_tol in max-norm.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if eta_fn is None:
        eta_fn = lambda coords: eval_eta_array(spec, coords)
    if rtol is None:
        rtol = DEFAULT_TOLERANCES["anti_symmetry_rtol"]
    if separation_tol is None:
        separation_tol = DEFAULT_TOLERANCES["separation_tol"]
    if distinct_gap is None:
        distinct_gap = DEFAULT_TOLERANCES["distinct_gap"]
    box = spec.sampling_box()
    col = _Collector()
    for t in range(trials):
        rng = trial_rng(seed, t)
        coords = sample_distinct(rng, spec.n, spec.d, box, distinct_gap)
        base = eta_fn(coords)
        denom = 1.0 + float(np.max(np.abs(base)))

        perm = random_permutation(rng, spec.n)
        if perm_sign(perm) < 0 and spec.n >= 2:
            perm = (perm[1], perm[0]) + perm[2:]
        even = eta_fn(apply_perm(coords, perm))
        viol = float(np.max(np.abs(even - base))) / denom
        col.record(viol, viol > rtol, {
            "trial": t, "direction": "even-permutation", "coords": coords.tolist(),
            "perm": list(perm), "violation": viol,
        })

        other = sample_distinct(rng, spec.n, spec.d, box, distinct_gap)
        if _off_orbit(spec, coords, other, 1e-9):
            gap = float(np.max(np.abs(eta_fn(other) - base)))
            viol = max(0.0, separation_tol - gap)
            col.record(viol, gap <= separation_tol, {
                "trial": t, "direction": "distinct-orbits", "coords": coords.tolist(),
                "other": other.tolist(), "gap": gap,
            })
    return col.report(
        "orbit_separation", trials, seed,
        {"rtol": rtol, "separation_tol": separation_tol, "distinct_gap": distinct_gap},
    )


def _moment_matched_pair(rng, coords: np.ndarray, box) -> np.ndarray:
    """Perturbed copy with identical per-coordinate particle sums.

    Detects maps that discard degree >= 2 multiset information: all degree-1
    power sums agree between the pair by construction. The caller must keep
    `coords` in the middle half of the box so no clipping is ever needed.
    """
    n, d = coords.shape
    lo, hi = box
    span = float((np.asarray(hi) - np.asarray(lo)).min())
    delta = rng.uniform(-0.1 * span, 0.1 * span, size=(n, d))
    delta -= delta.mean(axis=0, keepdims=True)
    return coords + delta


def certify_psi_separation(spec: FeatureMapSpec, trials: int, seed: int, *,
                           psi_fn=None, rtol: float | None = None,
                           separation_tol: float | None = None) -> CertificationReport:
    """Power sums are permutation-invariant and separate particle multisets.

    Positive direction checks every permutation (all of them for n <= 4),
    which certifies symmetry; the negative direction requires distinct
    multisets (collisions allowed) to produce distinct values. Half of the
    negative trials use pairs with matched per-coordinate sums, which probe
    the higher-degree components specifically.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if psi_fn is None:
        psi_fn = lambda coords: eval_psi(spec, coords)
    if rtol is None:
        rtol = DEFAULT_TOLERANCES["symmetry_rtol"]
    if separation_tol is None:
        separation_tol = DEFAULT_TOLERANCES["separation_tol"]
    box = spec.sampling_box()
    col = _Collector()
    for t in range(trials):
        rng = trial_rng(seed, t)
        coords = sample_box(rng, spec.n, spec.d, box)
        base = psi_fn(coords)
        denom = 1.0 + float(np.max(np.abs(base)))
        for perm in _perms_for_trial(spec, rng):
            permuted = psi_fn(apply_perm(coords, perm))
            viol = float(np.max(np.abs(permuted - base))) / denom
            col.record(viol, viol > rtol, {
                "trial": t, "direction": "permutation", "coords": coords.tolist(),
                "perm": list(perm), "violation": viol,
            })

        if t % 2 == 0:
            lo, hi = (np.asarray(s, dtype=float) for s in box)
            quarter = (hi - lo) / 4.0
            inner = rng.uniform(lo + quarter, hi - quarter, size=(spec.n, spec.d))
            other = _moment_matched_pair(rng, inner, box)
            probe, kind = inner, "moment-matched"
        else:
            probe, kind = coords, "independent"
            other = sample_box(rng, spec.n, spec.d, box)
        if _off_orbit(spec, probe, other, 1e-9):
            gap = float(np.max(np.abs(psi_fn(other) - psi_fn(probe))))
            viol = max(0.0, separation_tol - gap)
            col.record(viol, gap <= separation_tol, {
                "trial": t, "direction": kind, "coords": probe.tolist(),
                "other": other.tolist(), "gap": gap,
            })
    return col.report(
        "symmetry_psi", trials, seed,
        {"rtol": rtol, "separation_tol": separation_tol},
    )


def separating_phi_lower_bound(spec: FeatureMapSpec, coords: np.ndarray) -> tuple[float, float]:
    """(|phi_k|, bound) at the separating projection k.

    The product of pairwise projected gaps is at least gap^{n(n-1)/2} where
    gap is the smallest projected pairwise difference at k.
    """
    k = find_separating_projection(spec.projections, coords)
    if k is None:
        raise ValueError("no separating projection found")
    s = spec.rescale(coords) @ spec.projections.vectors[k]
    iu, ju = np.triu_indices(spec.n, 1)
    gap = float(np.min(np.abs(s[iu] - s[ju])))
    phi_k = float(eval_phi(spec, coords)[k])
    return abs(phi_k), gap ** (spec.n * (spec.n - 1) // 2)


def mutant_eta(spec: FeatureMapSpec, kind: str):
    """Deliberately corrupted feature evaluations for certifier sensitivity tests.

    sign-flip      first component forced positive (no longer anti-symmetric)
    drop-block     block 1 loses its phi factor, exposing the bare symmetric
                   psi_1 (nonzero on collisions)
    zero-phi       the phi vector is dropped entirely, collapsing eta to 0
                   (distinct orbits become inseparable)
    duplicate-psi  every psi component replaced by a copy of psi_1 (degree >= 2
                   multiset information discarded)
    """
    if kind not in MUTATION_KINDS:
        raise ValueError(f"unknown mutation {kind!r}; choose from {MUTATION_KINDS}")

    def eta(coords: np.ndarray) -> np.ndarray:
        if kind == "zero-phi":
            return np.zeros(spec.m)
        values = eval_eta_array(spec, coords)
        p = spec.p
        if kind == "sign-flip":
            values = values.copy()
            values[0] = abs(values[0])
        elif kind == "drop-block" and spec.q >= 1:
            values = values.copy()
            values[p:2 * p] = eval_psi(spec, coords)[0]
        elif kind == "duplicate-psi" and spec.q >= 1:
            phi = eval_phi(spec, coords)
            psi = mutant_psi(spec, kind)(coords)
            scale = np.concatenate(([1.0], psi))
            values = (scale[:, None] * phi[None, :]).ravel()
        return values

    return eta


def mutant_psi(spec: FeatureMapSpec, kind: str):
    """Corrupted power-sum evaluation; only duplicate-psi alters psi itself."""
    if kind not in MUTATION_KINDS:
        raise ValueError(f"unknown mutation {kind!r}; choose from {MUTATION_KINDS}")

    def psi(coords: np.ndarray) -> np.ndarray:
        values = eval_psi(spec, coords)
        if kind == "duplicate-psi" and values.size:
            values = np.full_like(values, values[0])
        return values

    return psi
