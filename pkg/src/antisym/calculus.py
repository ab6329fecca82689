"""Jacobians of the feature map and its singular-locus diagnostics.

The map is polynomial, so two derivative routes are provided: second-order
central differences and exact derivatives assembled by the product rule from
the pairwise-difference products and the power sums. Rank decisions use the
SVD with the conventional tolerance max(m, nd) * eps * sigma_max.

At any configuration with a duplicated particle pair the columns belonging to
the two particles cancel exactly (perturbing either particle of a coinciding
pair moves the zero feature vector in opposite directions), so the Jacobian
loses at least d column ranks there. Away from all collisions the Jacobian
has full column rank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoCollision, SpecTooSmall
from .features import FeatureMapSpec, coerce_coords, eval_eta_array
from .util import sample_distinct, trial_rng
from .verify import CertificationReport, _Collector

#: Optimal-order step for second-order central differences.
FD_STEP_BASE = float(np.cbrt(np.finfo(float).eps))

#: Pairwise projected gap below which the leave-one-factor-out form is used.
LOG_DIFF_FACTOR_TOL = 1e-8

#: Particles closer than this are treated as the same point.
COLLISION_DISTANCE = 1e-12

METHODS = ("central", "exact")


@dataclass
class JacobianResult:
    """Jacobian with its singular spectrum and numerical rank."""

    matrix: np.ndarray  # (m, n*d)
    method: str
    step: float | None
    singular_values: np.ndarray  # descending, length min(m, n*d)
    numerical_rank: int
    rank_tolerance: float

    def to_json_dict(self) -> dict:
        return {
            "matrix": self.matrix.tolist(),
            "method": self.method,
            "step": self.step,
            "singular_values": self.singular_values.tolist(),
            "numerical_rank": self.numerical_rank,
            "rank_tolerance": self.rank_tolerance,
        }


def _finite_difference_jacobian(spec: FeatureMapSpec, coords: np.ndarray) -> np.ndarray:
    n, d = coords.shape
    m = spec.m
    jac = np.empty((m, n * d))
    for i in range(n):
        for j in range(d):
            h = FD_STEP_BASE * (1.0 + abs(coords[i, j]))
            # Representable step: avoids extra truncation error in (x+h)-(x-h).
            up = coords[i, j] + h
            down = coords[i, j] - h
            h2 = up - down
            plus = coords.copy()
            plus[i, j] = up
            minus = coords.copy()
            minus[i, j] = down
            jac[:, i * d + j] = (eval_eta_array(spec, plus) - eval_eta_array(spec, minus)) / h2
    return jac


def _phi_and_jacobian(spec: FeatureMapSpec, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """phi (p,) and its exact Jacobian (p, n*d)."""
    n, d = spec.n, spec.d
    u = spec.rescale(coords)
    slope = spec.rescale_slope()
    projected = u @ spec.projections.vectors.T  # (n, p)
    iu, ju = np.triu_indices(n, 1)
    pair_list = list(zip(iu.tolist(), ju.tolist()))
    jac = np.zeros((spec.p, n * d))
    phi = np.ones(spec.p)
    for k in range(spec.p):
        s = projected[:, k]
        if n >= 2:
            factors = s[iu] - s[ju]
            phi[k] = float(np.prod(factors))
        else:
            factors = np.ones(0)
        scale = 1.0 + float(np.max(np.abs(s))) if s.size else 1.0
        dphi_ds = np.zeros(n)
        if n >= 2 and np.min(np.abs(factors)) > LOG_DIFF_FACTOR_TOL * scale:
            # All factors comfortably nonzero: logarithmic differentiation.
            for i in range(n):
                dphi_ds[i] = phi[k] * float(np.sum(1.0 / (s[i] - np.delete(s, i))))
        elif n >= 2:
            # Some factor may vanish: leave-one-factor-out products.
            npairs = len(pair_list)
            prefix = np.ones(npairs + 1)
            for t in range(npairs):
                prefix[t + 1] = prefix[t] * factors[t]
            suffix = np.ones(npairs + 1)
            for t in range(npairs - 1, -1, -1):
                suffix[t] = suffix[t + 1] * factors[t]
            for t, (a, b) in enumerate(pair_list):
                rest = prefix[t] * suffix[t + 1]
                dphi_ds[a] += rest
                dphi_ds[b] -= rest
        # Chain rule: ds_i/dx_{i,j} = w_k[j] * rescale slope.
        w = spec.projections.vectors[k]
        jac[k] = (dphi_ds[:, None] * (w * slope)[None, :]).ravel()
    return phi, jac


def _psi_and_gradients(spec: FeatureMapSpec, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """psi (q,) and the stacked gradients (q, n*d)."""
    n, d = spec.n, spec.d
    u = spec.rescale(coords)
    slope = spec.rescale_slope()
    psi = np.zeros(spec.q)
    grads = np.zeros((spec.q, n * d))
    for idx, alpha in enumerate(spec.multi_indices):
        alpha = np.asarray(alpha, dtype=np.int64)
        monomials = np.prod(u ** alpha[None, :], axis=1)  # (n,)
        psi[idx] = float(monomials.sum())
        grad = np.zeros((n, d))
        for j in range(d):
            if alpha[j] == 0:
                continue
            others = [jj for jj in range(d) if jj != j]
            partial = np.prod(u[:, others] ** alpha[others][None, :], axis=1) if others else 1.0
            grad[:, j] = alpha[j] * u[:, j] ** (alpha[j] - 1) * partial * slope[j]
        grads[idx] = grad.ravel()
    return psi, grads


def _exact_jacobian(spec: FeatureMapSpec, coords: np.ndarray) -> np.ndarray:
    phi, jphi = _phi_and_jacobian(spec, coords)
    psi, gpsi = _psi_and_gradients(spec, coords)
    blocks = [jphi]
    for l in range(spec.q):
        blocks.append(psi[l] * jphi + np.outer(phi, gpsi[l]))
    return np.vstack(blocks)


def default_rank_tolerance(matrix_shape, singular_values: np.ndarray) -> float:
    sigma_max = float(singular_values[0]) if singular_values.size else 0.0
    return max(matrix_shape) * np.finfo(float).eps * sigma_max


def jacobian(spec: FeatureMapSpec, x, method: str = "central", *,
             rank_tolerance: float | None = None) -> JacobianResult:
    """Jacobian of the feature map at x, with SVD-based numerical rank."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    coords = coerce_coords(x, spec.n, spec.d)
    if method == "central":
        matrix = _finite_difference_jacobian(spec, coords)
        step = FD_STEP_BASE
    else:
        matrix = _exact_jacobian(spec, coords)
        step = None
    singular_values = np.linalg.svd(matrix, compute_uv=False)
    tol = rank_tolerance
    if tol is None:
        tol = default_rank_tolerance(matrix.shape, singular_values)
    rank = int(np.count_nonzero(singular_values > tol))
    return JacobianResult(
        matrix=matrix,
        method=method,
        step=step,
        singular_values=singular_values,
        numerical_rank=rank,
        rank_tolerance=tol,
    )


def duplicate_pairs(coords: np.ndarray, tol: float = COLLISION_DISTANCE) -> list[tuple[int, int]]:
    n = coords.shape[0]
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            if np.array_equal(coords[i], coords[j]) or \
                    float(np.linalg.norm(coords[i] - coords[j])) <= tol:
                pairs.append((i, j))
    return pairs


def check_singular_column_pairs(spec: FeatureMapSpec, x) -> float:
    """Max residual of column(i1,j) + column(i2,j) over duplicated pairs.

    At a duplicated pair the two particles' derivative columns are exact
    negatives of each other; the residual is measured on the exact Jacobian
    and should be at machine-noise level.
    """
    coords = coerce_coords(x, spec.n, spec.d)
    pairs = duplicate_pairs(coords)
    if not pairs:
        raise NoCollision("configuration has no duplicated particle pair")
    jac = _exact_jacobian(spec, coords)
    d = spec.d
    worst = 0.0
    for i1, i2 in pairs:
        for j in range(d):
            residual = float(np.max(np.abs(jac[:, i1 * d + j] + jac[:, i2 * d + j])))
            worst = max(worst, residual)
    return worst


def check_full_rank_off_singular(spec: FeatureMapSpec, trials: int, seed: int, *,
                                 min_ratio: float = 1e-8,
                                 distinct_gap: float = 1e-3) -> CertificationReport:
    """Sample well-separated configurations and demand full column rank.

    Asserts sigma_min / sigma_max > min_ratio for the exact Jacobian at each
    sample; reports the minimum observed ratio in stats.
    """
    if spec.m < spec.n * spec.d:
        raise SpecTooSmall(
            f"m={spec.m} < n*d={spec.n * spec.d}: full column rank is impossible"
        )
    if trials < 1:
        raise ValueError("trials must be >= 1")
    box = spec.sampling_box()
    col = _Collector()
    min_observed = np.inf
    for t in range(trials):
        rng = trial_rng(seed, t)
        coords = sample_distinct(rng, spec.n, spec.d, box, distinct_gap)
        sv = np.linalg.svd(_exact_jacobian(spec, coords), compute_uv=False)
        ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
        min_observed = min(min_observed, ratio)
        viol = max(0.0, min_ratio - ratio)
        col.record(viol, ratio <= min_ratio, {
            "trial": t, "coords": coords.tolist(), "ratio": ratio,
        })
    return col.report(
        "full_rank_off_singular", trials, seed,
        {"min_ratio": min_ratio, "distinct_gap": distinct_gap},
        stats={"min_singular_ratio": float(min_observed)},
    )


def check_product_rule_blocks(spec: FeatureMapSpec, x) -> float:
    """Verify J(psi_l * phi) = psi_l * Jphi + phi * grad(psi_l)^T per block.

    The left side is measured by central differences, the right side by exact
    derivatives of each factor; the identity is exact, so only the
    finite-difference truncation error remains.
    """
    coords = coerce_coords(x, spec.n, spec.d)
    fd = _finite_difference_jacobian(spec, coords)
    phi, jphi = _phi_and_jacobian(spec, coords)
    psi, gpsi = _psi_and_gradients(spec, coords)
    p = spec.p
    worst = 0.0
    for l in range(spec.q):
        left = fd[(l + 1) * p:(l + 2) * p, :]
        right = psi[l] * jphi + np.outer(phi, gpsi[l])
        worst = max(worst, float(np.max(np.abs(left - right))))
    return worst
