import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antisym import (
    DimensionMismatch,
    FeatureMapSpec,
    ParticleConfiguration,
    ProjectionMode,
    build_feature_map,
    eval_eta,
    eval_eta_array,
    eval_eta_batch,
    eval_phi,
    eval_psi,
    export_features_csv,
    export_features_json,
    multi_indices_up_to,
    read_configs_csv,
)
from antisym.util import all_permutations, apply_perm, perm_sign


def phi_det_oracle(spec, coords):
    """Vandermonde determinant per projection; equals phi up to a fixed sign."""
    s = spec.rescale(np.asarray(coords, float)) @ spec.projections.vectors.T
    out = []
    for k in range(spec.p):
        v = np.vander(s[:, k], N=spec.n, increasing=True)
        out.append(np.linalg.det(v))
    return np.array(out)


def psi_brute_force(spec, coords):
    coords = np.asarray(coords, float).reshape(spec.n, spec.d)
    u = spec.rescale(coords)
    out = []
    for alpha in spec.multi_indices:
        total = 0.0
        for i in range(spec.n):
            term = 1.0
            for j in range(spec.d):
                term *= u[i, j] ** alpha[j]
            total += term
        out.append(total)
    return np.array(out)


class TestMultiIndices:
    def test_counts(self):
        assert len(multi_indices_up_to(2, 1)) == 2
        assert len(multi_indices_up_to(3, 2)) == 9
        assert len(multi_indices_up_to(4, 3)) == math.comb(7, 3) - 1

    def test_lexicographic_strictly_increasing(self):
        for n, d in [(2, 1), (3, 2), (4, 3)]:
            idx = multi_indices_up_to(n, d)
            assert list(idx) == sorted(idx)
            assert len(set(idx)) == len(idx)

    def test_d1_orders(self):
        assert multi_indices_up_to(3, 1) == ((1,), (2,), (3,))


class TestSpec:
    def test_m_formula(self, spec21, spec32, spec43):
        for spec in (spec21, spec32, spec43):
            assert spec.m == spec.p * (spec.q + 1)
            assert spec.q == math.comb(spec.n + spec.d, spec.d) - 1

    def test_linear_mode(self):
        spec = build_feature_map(3, 2, ProjectionMode.LINEAR)
        assert spec.p == 7
        assert spec.m == 70

    def test_json_round_trip(self, spec32, tmp_path):
        path = tmp_path / "spec.json"
        spec32.save(path)
        back = FeatureMapSpec.load(path)
        assert back.n == spec32.n and back.d == spec32.d
        assert back.multi_indices == spec32.multi_indices
        assert np.array_equal(back.projections.vectors, spec32.projections.vectors)
        assert (back.p, back.q, back.m) == (spec32.p, spec32.q, spec32.m)

    def test_inconsistent_counts_rejected(self, spec21):
        data = spec21.to_json_dict()
        data["m"] = 99
        with pytest.raises(ValueError):
            FeatureMapSpec.from_json_dict(data)

    def test_bad_box(self):
        with pytest.raises(ValueError):
            build_feature_map(2, 1, domain_box=((1.0,), (-1.0,)))


class TestParticleConfiguration:
    def test_box_validation(self):
        ParticleConfiguration(np.array([[0.5], [0.2]]), domain_box=((0.0,), (1.0,)))
        with pytest.raises(ValueError):
            ParticleConfiguration(np.array([[1.5], [0.2]]), domain_box=((0.0,), (1.0,)))

    def test_1d_coercion(self):
        c = ParticleConfiguration(np.array([1.0, 2.0]))
        assert c.coords.shape == (2, 1)


class TestPhi:
    def test_pair_difference(self, spec21):
        assert eval_phi(spec21, [0.2, 0.0])[0] == pytest.approx(0.2, rel=1e-15)

    def test_duplicate_rows_exactly_zero(self, spec32):
        x = np.array([[0.1, 0.2], [0.1, 0.2], [0.5, -0.3]])
        assert np.all(eval_phi(spec32, x) == 0.0)

    def test_three_point_product(self):
        spec = build_feature_map(3, 1)
        phi = eval_phi(spec, [1.0, 2.0, 3.0])
        assert phi[0] == pytest.approx(-2.0, rel=1e-14)

    def test_matches_determinant_oracle(self, spec32, rng):
        sign = (-1.0) ** (spec32.n * (spec32.n - 1) // 2)
        for _ in range(25):
            x = rng.uniform(-1, 1, size=(3, 2))
            phi = eval_phi(spec32, x)
            det = phi_det_oracle(spec32, x)
            assert np.allclose(phi, sign * det, rtol=1e-9, atol=1e-12)

    def test_dimension_mismatch(self, spec32):
        with pytest.raises(DimensionMismatch):
            eval_phi(spec32, np.zeros((2, 2)))


class TestPsi:
    def test_d1_power_sums(self, spec21):
        assert eval_psi(spec21, [1.0, 2.0]) == pytest.approx([3.0, 5.0])
        assert eval_psi(spec21, [2.0, 1.0]) == pytest.approx([3.0, 5.0])

    def test_d2_oracle_case(self):
        spec = build_feature_map(2, 2)
        x = np.array([[1.0, 0.0], [0.0, 1.0]])
        psi = eval_psi(spec, x)
        assert spec.multi_indices == ((0, 1), (0, 2), (1, 0), (1, 1), (2, 0))
        assert psi == pytest.approx([1.0, 1.0, 1.0, 0.0, 1.0])
        assert psi == pytest.approx(psi_brute_force(spec, x))

    def test_matches_brute_force(self, spec43, rng):
        for _ in range(10):
            x = rng.uniform(-1, 1, size=(4, 3))
            assert np.allclose(eval_psi(spec43, x), psi_brute_force(spec43, x),
                               rtol=1e-12, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3),
           st.permutations([0, 1, 2]))
    def test_permutation_invariance(self, values, perm):
        spec = build_feature_map(3, 1)
        x = np.asarray(values)[:, None]
        base = eval_psi(spec, x)
        permuted = eval_psi(spec, x[list(perm)])
        assert np.allclose(permuted, base, rtol=1e-10, atol=1e-10)


class TestEta:
    def test_golden_values(self, spec21):
        y = eval_eta_array(spec21, [0.2, 0.0])
        expected = np.array([0.2, 0.04, 0.008])
        assert np.all(np.abs(y - expected) <= 1e-15 * np.abs(expected))

        y2 = eval_eta_array(spec21, [0.1, -0.1])
        assert y2[0] == pytest.approx(0.2, rel=1e-15)
        assert y2[1] == 0.0
        assert y2[2] == pytest.approx(0.004, rel=1e-15)

    def test_duplicates_zero_vector(self, spec43, rng):
        x = rng.uniform(-1, 1, size=(4, 3))
        x[2] = x[0]
        assert np.all(eval_eta_array(spec43, x) == 0.0)

    def test_block_structure_exact(self, spec32, rng):
        x = rng.uniform(-1, 1, size=(3, 2))
        eta = eval_eta_array(spec32, x)
        phi = eval_phi(spec32, x)
        psi = eval_psi(spec32, x)
        p = spec32.p
        assert np.array_equal(eta[:p], phi)
        for l in range(spec32.q):
            assert np.array_equal(eta[(l + 1) * p:(l + 2) * p], psi[l] * phi)

    @pytest.mark.parametrize("n,d", [(2, 1), (3, 2), (4, 3)])
    def test_antisymmetry_sweep(self, n, d):
        spec = build_feature_map(n, d)
        rng = np.random.default_rng(99)
        perms = all_permutations(n)
        for _ in range(60):
            x = rng.uniform(-1, 1, size=(n, d))
            base = eval_eta_array(spec, x)
            scale = 1.0 + np.max(np.abs(base))
            for perm in perms:
                got = eval_eta_array(spec, apply_perm(x, perm))
                assert np.max(np.abs(got - perm_sign(perm) * base)) <= 1e-10 * scale

    def test_feature_vector_wrapper(self, spec21):
        fv = eval_eta(spec21, [0.2, 0.0])
        assert fv.values.shape == (3,)
        assert fv.spec is spec21

    def test_rescaled_box_matches_manual_affine(self):
        box = ((0.0, -2.0), (4.0, 2.0))
        spec = build_feature_map(3, 2, domain_box=box)
        plain = build_feature_map(3, 2)
        rng = np.random.default_rng(5)
        x = rng.uniform([0.0, -2.0], [4.0, 2.0], size=(3, 2))
        u = np.empty_like(x)
        u[:, 0] = (x[:, 0] - 2.0) / 2.0
        u[:, 1] = x[:, 1] / 2.0
        assert np.allclose(eval_eta_array(spec, x), eval_eta_array(plain, u),
                           rtol=1e-12, atol=1e-15)

    def test_unit_box_is_identity(self):
        spec = build_feature_map(2, 1, domain_box=((-1.0,), (1.0,)))
        y = eval_eta_array(spec, [1e-20, 0.0])
        assert y[0] == 1e-20  # no affine round-off applied


class TestBatch:
    def test_empty(self, spec21):
        assert eval_eta_batch(spec21, []) == []

    def test_singleton(self, spec21):
        [fv] = eval_eta_batch(spec21, [[0.2, 0.0]])
        assert np.array_equal(fv.values, eval_eta_array(spec21, [0.2, 0.0]))

    def test_matches_single_calls_bitwise(self, spec32, rng):
        xs = [rng.uniform(-1, 1, size=(3, 2)) for _ in range(100)]
        batch = eval_eta_batch(spec32, xs)
        for x, fv in zip(xs, batch):
            assert np.array_equal(fv.values, eval_eta_array(spec32, x))

    def test_error_reports_index(self, spec21):
        xs = [[0.2, 0.0], np.zeros((3, 1))]
        with pytest.raises(DimensionMismatch, match="configuration 1"):
            eval_eta_batch(spec21, xs)


class TestExports:
    def test_csv_round_trip(self, spec32, rng, tmp_path):
        xs = [rng.uniform(-1, 1, size=(3, 2)) for _ in range(5)]
        path = tmp_path / "features.csv"
        export_features_csv(path, spec32, xs)
        lines = path.read_text().strip().split("\n")
        assert len(lines) == 6  # header + 5 rows
        header = lines[0].split(",")
        assert len(header) == 6 + spec32.m
        row = [float(c) for c in lines[1].split(",")]
        assert np.array_equal(np.asarray(row[:6]).reshape(3, 2), xs[0])
        assert np.array_equal(np.asarray(row[6:]), eval_eta_array(spec32, xs[0]))

    def test_read_configs_csv(self, spec32, rng, tmp_path):
        xs = [rng.uniform(-1, 1, size=(3, 2)) for _ in range(4)]
        path = tmp_path / "inputs.csv"
        export_features_csv(path, spec32, xs)  # extra columns are ignored on read
        back = read_configs_csv(path, 3, 2)
        assert len(back) == 4
        assert np.array_equal(back[2], xs[2])

    def test_json_export(self, spec21, tmp_path):
        path = tmp_path / "features.json"
        export_features_json(path, spec21, [[0.2, 0.0]])
        data = json.loads(path.read_text())
        assert data["features"][0] == eval_eta_array(spec21, [0.2, 0.0]).tolist()
        assert data["spec"]["m"] == 3


def test_separating_phi_lower_bound(spec32, rng):
    from antisym.verify import separating_phi_lower_bound

    for _ in range(50):
        x = rng.uniform(-1, 1, size=(3, 2))
        try:
            mag, bound = separating_phi_lower_bound(spec32, x)
        except Exception:
            continue
        assert mag > bound / 2
