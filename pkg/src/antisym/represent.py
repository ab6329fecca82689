"""Odd models over the feature image and the regularity demonstrations.

Any anti-symmetric continuous target f factors through the feature map as
f = g(eta(x)) with g continuous and odd. The constructive route here models
g with pure-sine random Fourier features: every basis function sin(w.y) is
odd in y, so the fitted model is odd by construction (no penalty needed),
predicts exactly 0 at y = 0, and its composite with the feature map is
automatically anti-symmetric. Ridge regression in closed form keeps the fit
deterministic.

The two curve functions quantify how much regularity g can lose relative to
f near the collision set, using the fixed 2-particle, 1-dimensional map
eta(x1, x2) = ((x1-x2), (x1-x2)(x1+x2), (x1-x2)(x1^2+x2^2)) and the probe
points x = (2e, 0), x' = (e, -e): a Lipschitz target yields difference
quotients growing like 1/(2e sqrt(1+e^2)), and a continuously differentiable
target forces directional derivatives growing like 2^{4/3}/(4 e^{2/3}).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DomainViolation, IllConditioned, NonpositiveEps
from .features import (
    FeatureMapSpec,
    build_feature_map,
    coerce_coords,
    eval_eta_array,
)
from .util import (
    dump_json,
    load_json,
    perm_sign,
    random_even_permutation,
    sample_box,
    sample_with_collision,
    trial_rng,
)
from .verify import CertificationReport, _Collector


class TargetKind(str, enum.Enum):
    SLATER = "slater"
    ABS_DIFF = "abs-diff"
    POW43_DIFF = "pow43-diff"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TargetFunction:
    """An anti-symmetric scalar target f on n-particle configurations."""

    kind: TargetKind
    n: int
    d: int
    wavenumbers: tuple[int, ...] | None = None  # slater orbitals sin(k pi t)
    direction: tuple[float, ...] | None = None  # slater projection direction
    fn: object = field(default=None, repr=False)  # custom callable

    def __post_init__(self):
        if self.kind in (TargetKind.ABS_DIFF, TargetKind.POW43_DIFF):
            if (self.n, self.d) != (2, 1):
                raise ValueError(f"{self.kind.value} target is defined for n=2, d=1 only")
        if self.kind is TargetKind.SLATER:
            if self.wavenumbers is None:
                object.__setattr__(self, "wavenumbers", tuple(range(1, self.n + 1)))
            if len(self.wavenumbers) != self.n:
                raise ValueError("need one orbital wavenumber per particle")
            if self.direction is None:
                object.__setattr__(self, "direction", (1.0,) + (0.0,) * (self.d - 1))
            if len(self.direction) != self.d:
                raise DimensionMismatch("direction must have length d")
        if self.kind is TargetKind.CUSTOM and self.fn is None:
            raise ValueError("custom target requires a callable")


def slater_target(n: int, d: int = 1, wavenumbers=None, direction=None) -> TargetFunction:
    """det[sin(k_a pi t_b)] with t_b the particles projected on a direction."""
    return TargetFunction(
        kind=TargetKind.SLATER, n=n, d=d,
        wavenumbers=None if wavenumbers is None else tuple(int(k) for k in wavenumbers),
        direction=None if direction is None else tuple(float(c) for c in direction),
    )


def abs_diff_target() -> TargetFunction:
    """f(x1, x2) = |x1| - |x2|: anti-symmetric and Lipschitz, but not smoother."""
    return TargetFunction(kind=TargetKind.ABS_DIFF, n=2, d=1)


def pow43_diff_target() -> TargetFunction:
    """f(x1, x2) = x1^{4/3} - x2^{4/3} on non-negative coordinates."""
    return TargetFunction(kind=TargetKind.POW43_DIFF, n=2, d=1)


def custom_target(fn, n: int, d: int) -> TargetFunction:
    return TargetFunction(kind=TargetKind.CUSTOM, n=n, d=d, fn=fn)


def eval_target(target: TargetFunction, x) -> float:
    coords = coerce_coords(x, target.n, target.d)
    if target.kind is TargetKind.ABS_DIFF:
        return float(abs(coords[0, 0]) - abs(coords[1, 0]))
    if target.kind is TargetKind.POW43_DIFF:
        if np.any(coords < 0):
            raise DomainViolation("4/3-power target is defined for coordinates >= 0")
        return float(coords[0, 0] ** (4.0 / 3.0) - coords[1, 0] ** (4.0 / 3.0))
    if target.kind is TargetKind.SLATER:
        t = coords @ np.asarray(target.direction)  # (n,)
        k = np.asarray(target.wavenumbers, dtype=float)
        matrix = np.sin(np.pi * k[:, None] * t[None, :])  # orbital a at particle b
        return float(np.linalg.det(matrix))
    return float(target.fn(coords))


@dataclass(frozen=True)
class OddModel:
    """g(y) = sum_r weights_r * sin(frequencies_r . y + phases_r), phases = 0.

    Pure sines make g odd by construction: g(-y) = -g(y) and g(0) = 0 hold
    exactly, not just to a penalty's accuracy.
    """

    input_dim: int
    feature_count: int
    frequencies: np.ndarray  # (D, m)
    phases: np.ndarray  # (D,), all zero
    weights: np.ndarray  # (D,)
    ridge: float
    seed: int
    bandwidth_scale: float
    feature_map: FeatureMapSpec | None = field(default=None, repr=False)

    def predict(self, y) -> float:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.input_dim,):
            raise DimensionMismatch(f"expected y of shape ({self.input_dim},), got {y.shape}")
        return float(np.sin(self.frequencies @ y + self.phases) @ self.weights)

    def predict_batch(self, ys: np.ndarray) -> np.ndarray:
        ys = np.asarray(ys, dtype=float)
        if ys.ndim != 2 or ys.shape[1] != self.input_dim:
            raise DimensionMismatch(f"expected (batch, {self.input_dim}) inputs, got {ys.shape}")
        return np.sin(ys @ self.frequencies.T + self.phases[None, :]) @ self.weights

    def to_json_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "feature_count": self.feature_count,
            "frequencies": self.frequencies.tolist(),
            "phases": self.phases.tolist(),
            "weights": self.weights.tolist(),
            "ridge": self.ridge,
            "seed": self.seed,
            "bandwidth_scale": self.bandwidth_scale,
            "feature_map": None if self.feature_map is None else self.feature_map.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "OddModel":
        return cls(
            input_dim=int(data["input_dim"]),
            feature_count=int(data["feature_count"]),
            frequencies=np.asarray(data["frequencies"], dtype=float),
            phases=np.asarray(data["phases"], dtype=float),
            weights=np.asarray(data["weights"], dtype=float),
            ridge=float(data["ridge"]),
            seed=int(data["seed"]),
            bandwidth_scale=float(data["bandwidth_scale"]),
            feature_map=None if data.get("feature_map") is None
            else FeatureMapSpec.from_json_dict(data["feature_map"]),
        )

    def save(self, path) -> None:
        dump_json(self.to_json_dict(), path)

    @classmethod
    def load(cls, path) -> "OddModel":
        return cls.from_json_dict(load_json(path))


@dataclass(frozen=True)
class FitDiagnostics:
    train_rmse: float
    heldout_rmse: float
    condition: float
    n_train: int
    n_heldout: int
    bandwidth_scale: float

    def to_json_dict(self) -> dict:
        return {
            "train_rmse": self.train_rmse,
            "heldout_rmse": self.heldout_rmse,
            "condition": self.condition,
            "n_train": self.n_train,
            "n_heldout": self.n_heldout,
            "bandwidth_scale": self.bandwidth_scale,
        }


CONDITION_LIMIT = 1e14


def fit_odd_model(spec: FeatureMapSpec, target: TargetFunction, samples: int,
                  feature_count: int, ridge: float, seed: int, *,
                  bandwidth_scale: float | None = None,
                  heldout: int | None = None) -> tuple[OddModel, FitDiagnostics]:
    """Closed-form ridge fit of an odd sine model to an anti-symmetric target.

    Training configurations are drawn uniformly from the domain box and
    featurized; frequencies are standard Gaussian scaled by 1/median(||y||)
    unless bandwidth_scale overrides the heuristic. Raises IllConditioned
    when the normal equations' condition estimate exceeds 1e14 (ridge too
    small for the sampled features).
    """
    if (target.n, target.d) != (spec.n, spec.d):
        raise DimensionMismatch("target and feature map disagree on (n, d)")
    if samples < feature_count:
        raise ValueError(f"need samples >= feature_count, got {samples} < {feature_count}")
    if ridge <= 0:
        raise ValueError("ridge must be > 0")
    rng = trial_rng(seed, 0)
    box = spec.sampling_box()

    train = [sample_box(rng, spec.n, spec.d, box) for _ in range(samples)]
    y_train = np.stack([eval_eta_array(spec, c) for c in train])
    f_train = np.array([eval_target(target, c) for c in train])

    if bandwidth_scale is None:
        med = float(np.median(np.linalg.norm(y_train, axis=1)))
        bandwidth_scale = 1.0 / med if med > 0 else 1.0
    frequencies = rng.standard_normal((feature_count, spec.m)) * bandwidth_scale
    phases = np.zeros(feature_count)

    design = np.sin(y_train @ frequencies.T)  # (samples, D)
    gram = design.T @ design + ridge * np.eye(feature_count)
    eigs = np.linalg.eigvalsh(gram)
    smallest = max(float(eigs[0]), np.finfo(float).tiny)
    condition = float(eigs[-1]) / smallest
    if condition > CONDITION_LIMIT:
        raise IllConditioned(
            f"normal equations condition {condition:.3e} exceeds {CONDITION_LIMIT:.0e}"
        )
    weights = np.linalg.solve(gram, design.T @ f_train)

    model = OddModel(
        input_dim=spec.m,
        feature_count=feature_count,
        frequencies=frequencies,
        phases=phases,
        weights=weights,
        ridge=ridge,
        seed=seed,
        bandwidth_scale=bandwidth_scale,
        feature_map=spec,
    )

    train_pred = model.predict_batch(y_train)
    train_rmse = float(np.sqrt(np.mean((train_pred - f_train) ** 2)))

    n_heldout = heldout if heldout is not None else max(200, samples // 5)
    held = [sample_box(rng, spec.n, spec.d, box) for _ in range(n_heldout)]
    y_held = np.stack([eval_eta_array(spec, c) for c in held])
    f_held = np.array([eval_target(target, c) for c in held])
    held_rmse = float(np.sqrt(np.mean((model.predict_batch(y_held) - f_held) ** 2)))

    return model, FitDiagnostics(
        train_rmse=train_rmse,
        heldout_rmse=held_rmse,
        condition=condition,
        n_train=samples,
        n_heldout=n_heldout,
        bandwidth_scale=bandwidth_scale,
    )


def check_well_defined(spec: FeatureMapSpec, target: TargetFunction, trials: int,
                       seed: int, *, tolerance: float = 1e-10) -> CertificationReport:
    """Certify that the target is constant on the fibers of the feature map.

    Even reorderings leave the features unchanged, so they must leave the
    target unchanged; configurations with a duplicated pair map to the zero
    feature vector, so the target must vanish there. Both are necessary for
    an odd g with f = g(eta(x)) to exist.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if (target.n, target.d) != (spec.n, spec.d):
        raise DimensionMismatch("target and feature map disagree on (n, d)")
    box = spec.sampling_box()
    col = _Collector()
    for t in range(trials):
        rng = trial_rng(seed, t)
        coords = sample_box(rng, spec.n, spec.d, box)
        perm = random_even_permutation(rng, spec.n)
        assert perm_sign(perm) == 1
        f0 = eval_target(target, coords)
        f1 = eval_target(target, coords[list(perm), :])
        viol = abs(f1 - f0)
        col.record(viol, viol > tolerance, {
            "trial": t, "direction": "even-permutation", "coords": coords.tolist(),
            "perm": list(perm), "violation": viol,
        })
        if spec.n >= 2:
            collide = sample_with_collision(rng, spec.n, spec.d, box)
            viol = abs(eval_target(target, collide))
            col.record(viol, viol > tolerance, {
                "trial": t, "direction": "collision", "coords": collide.tolist(),
                "violation": viol,
            })
    return col.report("odd_well_defined", trials, seed, {"tolerance": tolerance})


def _fixed_pair_map() -> FeatureMapSpec:
    return build_feature_map(2, 1)


def _probe_feature_gap(spec: FeatureMapSpec, eps: float) -> float:
    x = np.array([[2.0 * eps], [0.0]])
    x_prime = np.array([[eps], [-eps]])
    return float(np.linalg.norm(eval_eta_array(spec, x) - eval_eta_array(spec, x_prime)))


def closed_form_lipschitz_ratio(eps: float) -> float:
    return 1.0 / (2.0 * eps * np.sqrt(1.0 + eps * eps))


def closed_form_c1_quotient(eps: float) -> float:
    return 2.0 ** (4.0 / 3.0) / (4.0 * eps ** (2.0 / 3.0) * np.sqrt(1.0 + eps * eps))


def _check_eps(eps_list) -> list[float]:
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise NonpositiveEps("epsilon values must be > 0")
    return eps_list


def lipschitz_ratio_curve(eps_list) -> list[tuple[float, float]]:
    """Difference quotients of |x1| - |x2| through the feature map.

    For x = (2e, 0) and x' = (e, -e) the feature vectors differ by
    (0, 4e^2, 4e^3) while the target values differ by 2e, so the ratio
    |f(x) - f(x')| / ||eta(x) - eta(x')|| = 1/(2e sqrt(1+e^2)) diverges as
    e -> 0: no Lipschitz g can represent this Lipschitz f.
    """
    eps_list = _check_eps(eps_list)
    spec = _fixed_pair_map()
    target = abs_diff_target()
    out = []
    for eps in eps_list:
        x = np.array([[2.0 * eps], [0.0]])
        x_prime = np.array([[eps], [-eps]])
        numer = abs(eval_target(target, x) - eval_target(target, x_prime))
        out.append((eps, numer / _probe_feature_gap(spec, eps)))
    return out


def c1_obstruction_curve(eps_list) -> list[tuple[float, float]]:
    """Directional difference quotients of x1^{4/3} - x2^{4/3}.

    With the same probe points, the quotient
    (f(x) - f(x')) / ||eta(x) - eta(x')|| = 2^{4/3}/(4 e^{2/3} sqrt(1+e^2))
    diverges as e -> 0, so no continuously differentiable extension of g
    exists: its gradient at 0 would need an infinite directional component.
    The value at x' is 0 exactly because the coordinates of x' = (e, -e)
    have equal magnitude; x' itself lies outside the target's non-negative
    domain, so that value is used directly rather than evaluated.
    """
    eps_list = _check_eps(eps_list)
    spec = _fixed_pair_map()
    target = pow43_diff_target()
    out = []
    for eps in eps_list:
        x = np.array([[2.0 * eps], [0.0]])
        numer = eval_target(target, x) - 0.0
        out.append((eps, numer / _probe_feature_gap(spec, eps)))
    return out
