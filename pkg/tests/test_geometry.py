import itertools

import numpy as np
import pytest

from antisym import (
    CollidingInput,
    DimensionMismatch,
    ProjectionMode,
    ProjectionSet,
    build_projection_set,
    find_separating_projection,
    projection_count,
)


def det2(a, b):
    return a[0] * b[1] - a[1] * b[0]


def test_counts_pairwise():
    assert projection_count(2, 1, ProjectionMode.PAIRWISE) == 1
    assert projection_count(3, 2, ProjectionMode.PAIRWISE) == 4
    assert projection_count(4, 3, ProjectionMode.PAIRWISE) == 13


def test_counts_linear():
    assert projection_count(3, 2, ProjectionMode.LINEAR) == 7
    assert projection_count(2, 1, ProjectionMode.LINEAR) == 3


def test_d1_single_unit_scalar():
    ps = build_projection_set(2, 1)
    assert ps.p == 1
    assert ps.vectors.shape == (1, 1)
    assert ps.vectors[0, 0] == 1.0


def test_unit_norms():
    for n, d in [(2, 1), (3, 2), (4, 3), (5, 4)]:
        ps = build_projection_set(n, d)
        assert np.all(ps.unit_norm_errors() <= 1e-12)


def test_pairwise_subsets_independent_3_2():
    ps = build_projection_set(3, 2)
    assert ps.p == 4
    # oracle: all 6 pairs via the 2x2 determinant formula
    dets = [abs(det2(ps.vectors[i], ps.vectors[j]))
            for i, j in itertools.combinations(range(4), 2)]
    assert len(dets) == 6
    assert min(dets) > 1e-10
    assert ps.min_subset_determinant() == pytest.approx(min(dets))


def test_subset_determinants_4_3():
    ps = build_projection_set(4, 3)
    assert ps.min_subset_determinant() > 1e-10


def test_determinism():
    a = build_projection_set(4, 3)
    b = build_projection_set(4, 3)
    assert np.array_equal(a.vectors, b.vectors)


def test_json_round_trip(tmp_path):
    ps = build_projection_set(3, 2, ProjectionMode.LINEAR)
    data = ps.to_json_dict()
    back = ProjectionSet.from_json_dict(data)
    assert np.array_equal(back.vectors, ps.vectors)
    assert back.mode is ProjectionMode.LINEAR
    assert (back.n, back.d) == (ps.n, ps.d)


def test_separating_identity_projection():
    ps = build_projection_set(2, 1)
    assert find_separating_projection(ps, [1.0, 3.0]) == 0


def test_separating_skips_blind_projection():
    # w_0 projects both particles to 0; w_1 separates them.
    vectors = np.array([[1.0, 0.0], [0.6, 0.8]])
    ps = ProjectionSet(vectors=vectors, n=2, d=2, mode=ProjectionMode.PAIRWISE)
    x = np.array([[0.0, 0.0], [0.0, 1.0]])
    assert find_separating_projection(ps, x) == 1


def test_separating_collision_raises():
    ps = build_projection_set(2, 1)
    with pytest.raises(CollidingInput):
        find_separating_projection(ps, [0.3, 0.3])


def test_separating_none_when_tolerance_huge():
    ps = build_projection_set(2, 1)
    assert find_separating_projection(ps, [0.0, 1.0], separation_tol=10.0) is None


def test_separating_dimension_mismatch():
    ps = build_projection_set(3, 2)
    with pytest.raises(DimensionMismatch):
        find_separating_projection(ps, [1.0, 2.0, 3.0])


@pytest.mark.parametrize("n,d", [(2, 1), (3, 2), (4, 3)])
def test_separation_sweep(n, d):
    # every distinct-particle sample admits a separating projection
    ps = build_projection_set(n, d)
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        x = rng.uniform(-1.0, 1.0, size=(n, d))
        while min(np.linalg.norm(x[i] - x[j]) for i in range(n) for j in range(i + 1, n)) < 1e-6:
            x = rng.uniform(-1.0, 1.0, size=(n, d))
        assert find_separating_projection(ps, x) is not None


def test_invalid_inputs():
    with pytest.raises(ValueError):
        build_projection_set(0, 1)
    with pytest.raises(ValueError):
        build_projection_set(2, 0)
