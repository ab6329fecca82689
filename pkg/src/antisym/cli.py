"""Configuration-driven command line for reproducible experiments.

Subcommands: basis, verify, jacobian, fit, predict, demo. Options come from
an optional JSON config file plus flag overrides (flags win). Exit codes:
0 all checks passed, 1 at least one certifier failed, 2 usage or config
error. Identical (config, seed) pairs produce byte-identical output files:
nothing time- or host-dependent is ever written.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import calculus, represent, verify
from .errors import AntisymError, ConfigError
from .features import (
    FeatureMapSpec,
    build_feature_map,
    eval_eta_array,
    export_features_csv,
    read_configs_csv,
)
from .geometry import ProjectionMode, projection_count
from .represent import OddModel, slater_target, custom_target
from .util import dump_json, format17, load_json


@dataclass
class RunConfig:
    n: int = 2
    d: int = 1
    domain_box: list | None = None  # [[lo, hi], ...] per coordinate
    projection_mode: str = "pairwise"
    seed: int = 0
    output_dir: str = "out"
    trials: int = 1000
    eps_list: list = field(default_factory=lambda: [1e-1, 1e-2, 1e-3, 1e-4])
    fit_samples: int = 2000
    fit_feature_count: int = 500
    fit_ridge: float = 1e-8
    tolerances: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.n < 1 or self.d < 1:
            raise ConfigError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        if self.projection_mode not in ("pairwise", "linear"):
            raise ConfigError(f"unknown projection_mode {self.projection_mode!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if any(e <= 0 for e in self.eps_list):
            raise ConfigError("eps_list entries must be > 0")
        if self.fit_samples < self.fit_feature_count:
            raise ConfigError("fit_samples must be >= fit_feature_count")
        if self.fit_ridge <= 0:
            raise ConfigError("fit_ridge must be > 0")
        for name, value in self.tolerances.items():
            if value <= 0:
                raise ConfigError(f"tolerance override {name} must be > 0")
        if self.domain_box is not None:
            if len(self.domain_box) != self.d:
                raise ConfigError("domain_box needs one [lo, hi] per coordinate")
            for lo, hi in self.domain_box:
                if not lo < hi:
                    raise ConfigError("domain_box must have lo < hi per coordinate")

    def box_tuple(self):
        if self.domain_box is None:
            return None
        lo = tuple(float(pair[0]) for pair in self.domain_box)
        hi = tuple(float(pair[1]) for pair in self.domain_box)
        return (lo, hi)

    def feature_map(self) -> FeatureMapSpec:
        return build_feature_map(
            self.n, self.d, ProjectionMode(self.projection_mode), self.box_tuple()
        )


_CONFIG_KEYS = {
    "n", "d", "domain_box", "projection_mode", "seed", "output_dir",
    "trials", "eps_list", "fit_samples", "fit_feature_count", "fit_ridge",
    "tolerances",
}


def load_config(path: str | None) -> RunConfig:
    config = RunConfig()
    if path is None:
        return config
    try:
        data = load_json(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except ValueError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    fit = data.pop("fit", {})
    if fit:
        data.setdefault("fit_samples", fit.get("samples", config.fit_samples))
        data.setdefault("fit_feature_count", fit.get("feature_count", config.fit_feature_count))
        data.setdefault("fit_ridge", fit.get("ridge", config.fit_ridge))
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return replace(config, **data)


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    updates = {}
    for flag, key in (
        ("n", "n"), ("d", "d"), ("seed", "seed"), ("out", "output_dir"),
        ("trials", "trials"), ("mode", "projection_mode"),
        ("samples", "fit_samples"), ("features", "fit_feature_count"),
        ("ridge", "fit_ridge"), ("eps", "eps_list"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            updates[key] = value
    return replace(config, **updates)


def _outdir(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_basis(config: RunConfig, args) -> int:
    spec = config.feature_map()
    mode = ProjectionMode(config.projection_mode)
    if mode is ProjectionMode.PAIRWISE:
        trace = f"p = n(n-1)/2*(d-1)+1 = {spec.p}"
    else:
        trace = f"p = d*n+1 = {spec.p}"
    print(f"p={spec.p} q={spec.q} m={spec.m}")
    print(f"  {trace}")
    print(f"  q = C(n+d, d)-1 = {spec.q}")
    print(f"  m = p*(q+1) = {spec.m}")
    out = _outdir(config)
    spec_path = out / "feature_map.json"
    spec.save(spec_path)
    print(f"wrote {spec_path}")
    if args.eval is not None:
        configs = read_configs_csv(args.eval, spec.n, spec.d)
        csv_path = out / "features.csv"
        export_features_csv(csv_path, spec, configs)
        print(f"wrote {csv_path} ({len(configs)} configurations)")
    return 0


def _run_certifiers(config: RunConfig, mutate: str | None):
    spec = config.feature_map()
    eta_fn = None
    psi_fn = None
    if mutate is not None:
        eta_fn = verify.mutant_eta(spec, mutate)
        psi_fn = verify.mutant_psi(spec, mutate)
    trials = config.trials
    seed = config.seed
    tol = config.tolerances
    reports = [
        verify.certify_antisymmetry(
            spec, trials, seed, eta_fn=eta_fn,
            rtol=tol.get("anti_symmetry_rtol")),
        verify.certify_zero_iff_collision(
            spec, trials, seed, eta_fn=eta_fn,
            zero_tol=tol.get("zero_tol"), distinct_gap=tol.get("distinct_gap")),
        verify.certify_orbit_separation(
            spec, trials, seed, eta_fn=eta_fn,
            separation_tol=tol.get("separation_tol"),
            distinct_gap=tol.get("distinct_gap")),
        verify.certify_psi_separation(
            spec, trials, seed, psi_fn=psi_fn,
            rtol=tol.get("symmetry_rtol"),
            separation_tol=tol.get("separation_tol")),
        represent.check_well_defined(
            spec, slater_target(spec.n, spec.d), trials, seed,
            tolerance=tol.get("well_defined_tol", 1e-10)),
    ]
    return reports


def cmd_verify(config: RunConfig, args) -> int:
    reports = _run_certifiers(config, args.mutate)
    out = _outdir(config)
    summary = []
    print(f"{'property':<24}{'trials':>8}{'failures':>10}  worst_violation")
    for report in reports:
        report.save(out / f"verify_{report.property}.json")
        summary.append(report.to_json_dict())
        print(f"{report.property:<24}{report.trials:>8}{report.failures:>10}  "
              f"{format17(report.worst_violation)}")
    dump_json(summary, out / "verify_summary.json")
    failed = [r for r in reports if not r.passed]
    for report in failed:
        print(f"FAIL {report.property}: {report.failures} failures, "
              f"first witness: {report.witnesses[0]}")
    return 1 if failed else 0


def _parse_point(text: str, n: int, d: int) -> np.ndarray:
    values = [float(c) for c in text.split(",")]
    if len(values) != n * d:
        raise ConfigError(f"--point needs {n * d} comma-separated values, got {len(values)}")
    return np.asarray(values).reshape(n, d)


def _jacobian_verdict(spec: FeatureMapSpec, coords: np.ndarray) -> dict:
    result = calculus.jacobian(spec, coords, method="exact")
    nd = spec.n * spec.d
    colliding = bool(calculus.duplicate_pairs(coords))
    if result.numerical_rank < nd:
        verdict = (f"rank {result.numerical_rank} of {nd} — column-rank-deficient"
                   + (" at duplicated particles (expected)" if colliding else ""))
    else:
        verdict = f"rank {result.numerical_rank} of {nd} — full column rank"
    return {
        "coords": coords.tolist(),
        "numerical_rank": result.numerical_rank,
        "singular_values": result.singular_values.tolist(),
        "colliding": colliding,
        "verdict": verdict,
    }


def cmd_demo(config: RunConfig, args) -> int:
    out = _outdir(config)
    if args.which in ("lipschitz", "c1"):
        if args.which == "lipschitz":
            curve = represent.lipschitz_ratio_curve(config.eps_list)
            closed = represent.closed_form_lipschitz_ratio
            path = out / "lipschitz_curve.csv"
        else:
            curve = represent.c1_obstruction_curve(config.eps_list)
            closed = represent.closed_form_c1_quotient
            path = out / "c1_curve.csv"
        lines = ["eps,value,closed_form,rel_err"]
        for eps, value in curve:
            reference = closed(eps)
            rel = abs(value - reference) / abs(reference)
            lines.append(",".join(format17(v) for v in (eps, value, reference, rel)))
            print(f"eps={format17(eps)} value={format17(value)} rel_err={format17(rel)}")
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote {path}")
        return 0

    spec = config.feature_map()
    points = []
    if args.point is not None:
        points.append(_parse_point(args.point, spec.n, spec.d))
    else:
        # Default probes: one forced collision, one well-separated spread.
        spread = np.arange(1, spec.n * spec.d + 1, dtype=float).reshape(spec.n, spec.d)
        spread = spread / spread.max()
        collide = spread.copy()
        if spec.n >= 2:
            collide[1] = collide[0]
        points.extend([collide, spread])
    records = [_jacobian_verdict(spec, coords) for coords in points]
    for record in records:
        print(record["verdict"])
    dump_json(records, out / "jacobian_report.json")
    print(f"wrote {out / 'jacobian_report.json'}")
    return 0


def cmd_jacobian(config: RunConfig, args) -> int:
    args.which = "jacobian"
    return cmd_demo(config, args)


def cmd_fit(config: RunConfig, args) -> int:
    spec = config.feature_map()
    if args.target == "slater":
        target = slater_target(spec.n, spec.d)
    elif args.target == "zero":
        target = custom_target(lambda coords: 0.0, spec.n, spec.d)
    else:
        raise ConfigError(f"unknown fit target {args.target!r}")
    model, diag = represent.fit_odd_model(
        spec, target, config.fit_samples, config.fit_feature_count,
        config.fit_ridge, config.seed,
    )
    out = _outdir(config)
    model.save(out / "odd_model.json")
    dump_json(diag.to_json_dict(), out / "fit_diagnostics.json")
    print(f"train_rmse={format17(diag.train_rmse)} "
          f"heldout_rmse={format17(diag.heldout_rmse)}")
    print(f"wrote {out / 'odd_model.json'}")
    return 0


def cmd_predict(config: RunConfig, args) -> int:
    model = OddModel.load(args.model)
    if model.feature_map is None:
        raise ConfigError("model file does not embed a feature map")
    spec = model.feature_map
    configs = read_configs_csv(args.inputs, spec.n, spec.d)
    out = _outdir(config)
    path = out / "predictions.csv"
    header = [f"x_{i}_{j}" for i in range(spec.n) for j in range(spec.d)] + ["prediction"]
    lines = [",".join(header)]
    for coords in configs:
        value = model.predict(eval_eta_array(spec, coords))
        lines.append(",".join(
            [format17(v) for v in coords.ravel()] + [format17(value)]
        ))
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path} ({len(configs)} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="antisym",
        description="Anti-symmetric feature maps: construction, certification, "
                    "rank analysis, and odd-model fitting.",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--json", action="store_true", help="machine-readable stdout")
    parser.add_argument("--n", type=int)
    parser.add_argument("--d", type=int)
    parser.add_argument("--mode", choices=["pairwise", "linear"])
    parser.add_argument("--trials", type=int)

    sub = parser.add_subparsers(dest="command", required=True)

    p_basis = sub.add_parser("basis", help="build the feature map, print (p, q, m)")
    p_basis.add_argument("--eval", help="CSV of configurations to featurize")
    p_basis.set_defaults(func=cmd_basis)

    p_verify = sub.add_parser("verify", help="run all five certifiers")
    p_verify.add_argument("--mutate", choices=list(verify.MUTATION_KINDS),
                          help="certify a deliberately corrupted map")
    p_verify.set_defaults(func=cmd_verify)

    p_jac = sub.add_parser("jacobian", help="rank report at probe points")
    p_jac.add_argument("--point", help="comma-separated n*d coordinates")
    p_jac.set_defaults(func=cmd_jacobian)

    p_fit = sub.add_parser("fit", help="fit an odd model to a target")
    p_fit.add_argument("--target", default="slater", choices=["slater", "zero"])
    p_fit.add_argument("--samples", type=int)
    p_fit.add_argument("--features", type=int)
    p_fit.add_argument("--ridge", type=float)
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="evaluate a saved model on configurations")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--inputs", required=True)
    p_pred.set_defaults(func=cmd_predict)

    p_demo = sub.add_parser("demo", help="regularity curves and rank demos")
    p_demo.add_argument("which", choices=["lipschitz", "c1", "jacobian"])
    p_demo.add_argument("--point", help="comma-separated n*d coordinates (jacobian)")
    p_demo.add_argument("--eps", type=float, nargs="+", dest="eps")
    p_demo.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        config = apply_overrides(config, args)
        config.validate()
        return args.func(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AntisymError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
