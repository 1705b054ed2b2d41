from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import all_pairs, brute_quality, brute_repeatability, brute_roc, random_instance

from meshbench.descriptors import DescriptorSet
from meshbench.detectors import FeaturePoints, FeatureRegions
from meshbench.eval import (
    MISSING,
    DegeneratePopulation,
    EmptyEvaluableSet,
    EvalConfig,
    NoMatches,
    RocCurve,
    aggregate,
    dense_quality,
    descriptor_quality,
    overlap,
    point_repeatability,
    region_repeatability,
    repeatability_vs_overlap,
    repeatability_vs_rho,
    roc,
    roc_from_distances,
)
from meshbench.eval.regions import greedy_assignment
from meshbench.shapes import icosphere
from meshbench.transforms.correspondence import CorrespondenceMap

RHO = 0.25


@pytest.fixture(scope="module")
def sphere():
    return icosphere(2)


@pytest.fixture(scope="module")
def G(sphere):
    return all_pairs(sphere)


def pts(v):
    v = np.asarray(v)
    return FeaturePoints(v, np.zeros(len(v)))


def desc(matrix, vertices):
    return DescriptorSet(np.asarray(matrix, dtype=float), np.asarray(vertices), "test")


# -- point repeatability -----------------------------------------------------------------


def test_self_repeatability_is_100(sphere):
    f = pts([0, 5, 17, 40])
    corr = CorrespondenceMap.identity(sphere.n_vertices)
    for rho in (1e-9, 0.1, 5.0):
        assert point_repeatability(f, f, corr, sphere, rho) == 100.0


def test_single_far_pair_is_0(sphere, G):
    far = int(np.argmax(G[0]))
    corr = CorrespondenceMap.identity(sphere.n_vertices)
    assert point_repeatability(pts([0]), pts([far]), corr, sphere, 0.5 * G[0, far]) == 0.0


def test_features_without_groundtruth_are_ignored(sphere):
    n = sphere.n_vertices
    v = np.arange(n)
    v[3] = -1
    corr = CorrespondenceMap(v, np.full(n, -1), np.zeros((n, 3)))
    # feature 3 has no groundtruth and would otherwise count as a miss
    assert point_repeatability(pts([0]), pts([0, 3]), corr, sphere, 0.01) == 100.0


def test_no_evaluable_features_raises(sphere):
    n = sphere.n_vertices
    corr = CorrespondenceMap(np.full(n, -1), np.full(n, -1), np.zeros((n, 3)))
    with pytest.raises(EmptyEvaluableSet):
        point_repeatability(pts([0]), pts([1]), corr, sphere, 1.0)


def test_empty_null_features_give_0(sphere):
    corr = CorrespondenceMap.identity(sphere.n_vertices)
    assert point_repeatability(pts([]), pts([1]), corr, sphere, 1.0) == 0.0


def test_rho_must_be_positive(sphere):
    corr = CorrespondenceMap.identity(sphere.n_vertices)
    with pytest.raises(ValueError):
        point_repeatability(pts([0]), pts([0]), corr, sphere, 0.0)


def test_barycentric_groundtruth_distance(sphere):
    # a point at a face corner with all weight is the corner itself
    f = 7
    corner = sphere.faces[f, 1]
    corr = CorrespondenceMap(np.array([-1]), np.array([f]), np.array([[0.0, 1.0, 0.0]]))
    assert point_repeatability(pts([corner]), pts([0]), corr, sphere, 1e-12) == 100.0


@pytest.mark.parametrize("seed", range(5))
def test_point_repeatability_matches_brute_force(sphere, G, seed):
    fx, fy, corr, _, _ = random_instance(sphere, seed, n_feat=30)
    for rho in (0.05, RHO, 0.6):
        got = point_repeatability(fx, fy, corr, sphere, rho)
        assert got == pytest.approx(brute_repeatability(G, sphere, fx, fy, corr, rho), abs=1e-12)


@given(st.integers(0, 10_000))
def test_repeatability_monotone_in_rho(seed):
    m = icosphere(2)
    fx, fy, corr, _, _ = random_instance(m, seed, n_feat=20)
    rhos = np.linspace(0.01, 1.0, 15)
    curve = repeatability_vs_rho(fx, fy, corr, m, rhos)
    assert np.all(np.diff(curve) >= 0)
    assert curve[4] == pytest.approx(point_repeatability(fx, fy, corr, m, rhos[4]), abs=1e-12)


@given(st.integers(0, 10_000))
def test_repeatability_permutation_invariant(seed):
    m = icosphere(2)
    fx, fy, corr, _, _ = random_instance(m, seed, n_feat=20)
    perm = np.random.default_rng(seed).permutation(m.n_vertices)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    pm = m.permuted(perm)
    v = np.where(corr.vertex >= 0, inv[np.maximum(corr.vertex, 0)], -1)
    pcorr = CorrespondenceMap(v, corr.face, corr.bary)
    a = point_repeatability(fx, fy, corr, m, RHO)
    b = point_repeatability(pts(inv[fx.vertices]), fy, pcorr, pm, RHO)
    assert a == b


# -- region repeatability ----------------------------------------------------------------


def test_overlap_half_overlap_is_one_third():
    areas = np.ones(10)
    assert overlap(np.array([0, 1, 2, 3]), np.array([2, 3, 4, 5]), areas) == pytest.approx(1 / 3)


@given(st.sets(st.integers(0, 19), min_size=1), st.sets(st.integers(0, 19), min_size=1))
def test_overlap_symmetric_bounded_and_one_iff_equal(a, b):
    areas = np.random.default_rng(0).uniform(0.1, 2.0, 20)
    a, b = np.array(sorted(a)), np.array(sorted(b))
    o = overlap(a, b, areas)
    assert o == overlap(b, a, areas)
    assert 0 <= o <= 1
    assert (o == 1.0) == (set(a) == set(b))


def _uniform_null(n):
    # region evaluation only needs vertex areas (and faces for barycentric refs)
    return SimpleNamespace(vertex_areas=np.ones(n), faces=np.zeros((0, 3), dtype=np.int64))


def test_region_half_overlap_threshold():
    null = _uniform_null(10)
    corr = CorrespondenceMap.identity(10)
    rx = FeatureRegions(([0, 1, 2, 3],), [1.0])
    ry = FeatureRegions(([2, 3, 4, 5],), [1.0])
    assert region_repeatability(rx, ry, corr, null, threshold=1 / 3) == 100.0
    assert region_repeatability(rx, ry, corr, null, threshold=0.34) == 0.0


def test_region_self_and_disjoint(sphere):
    corr = CorrespondenceMap.identity(sphere.n_vertices)
    rx = FeatureRegions(([0, 1, 2], [10, 11], [30, 31, 32, 33]), [1.0, 2.0, 3.0])
    for t in (0.01, 0.7, 1.0):
        assert region_repeatability(rx, rx, corr, sphere, t) == 100.0
    ry = FeatureRegions(([50, 51],), [1.0])
    assert region_repeatability(rx, ry, corr, sphere, 0.7) == 0.0


def test_region_empty_mapping_counted():
    n = 10
    v = np.arange(n)
    v[[8, 9]] = -1
    corr = CorrespondenceMap(v, np.full(n, -1), np.zeros((n, 3)))
    null = _uniform_null(n)
    rx = FeatureRegions(([0, 1],), [1.0])
    ry = FeatureRegions(([0, 1], [8, 9]), [1.0, 1.0])
    from meshbench.eval.regions import region_overlaps

    best, diag = region_overlaps(rx, ry, corr, null)
    assert diag == {"evaluated": 1, "empty_mapped": 1}
    assert best.tolist() == [1.0]
    with pytest.raises(EmptyEvaluableSet):
        region_repeatability(rx, FeatureRegions(([8, 9],), [1.0]), corr, null)


def test_greedy_assignment_is_one_to_one():
    O = np.array([[0.9, 0.8], [0.85, 0.1]])
    # row 0 takes column 0 first; row 1 is left with column 1
    assert greedy_assignment(O).tolist() == [0.9, 0.1]


def test_region_threshold_validation():
    null = _uniform_null(4)
    r = FeatureRegions(([0],), [1.0])
    with pytest.raises(ValueError):
        region_repeatability(r, r, CorrespondenceMap.identity(4), null, threshold=0.0)


def test_repeatability_vs_overlap_monotone():
    null = _uniform_null(12)
    corr = CorrespondenceMap.identity(12)
    rx = FeatureRegions(([0, 1, 2, 3], [6, 7, 8]), [1.0, 1.0])
    ry = FeatureRegions(([1, 2, 3], [6, 7, 8, 9, 10]), [1.0, 1.0])
    curve = repeatability_vs_overlap(rx, ry, corr, null, np.linspace(0.05, 1, 20))
    assert np.all(np.diff(curve) <= 0)


# -- descriptor quality ------------------------------------------------------------------


def test_quality_self_is_zero(sphere):
    rng = np.random.default_rng(0)
    v = np.array([0, 10, 20, 30])
    d = desc(rng.random((4, 8)), v)
    q = descriptor_quality(d, d, CorrespondenceMap.identity(sphere.n_vertices), sphere, RHO)
    assert q.mean == 0.0
    assert len(q.distances) == 4


def test_quality_orthonormal_pair(sphere, G):
    # two well-separated features with descriptors e1 and e2, matched to themselves
    a, b = 0, int(np.argmax(G[0]))
    d = desc(np.eye(2), [a, b])
    q = descriptor_quality(d, d, CorrespondenceMap.identity(sphere.n_vertices), sphere, RHO)
    assert q.denominator == pytest.approx(np.sqrt(2), abs=1e-15)
    assert q.distances.tolist() == [0.0, 0.0]


def test_quality_no_matches(sphere, G):
    far = int(np.argmax(G[0]))
    corr = CorrespondenceMap.identity(sphere.n_vertices)
    with pytest.raises(NoMatches):
        descriptor_quality(desc([[1.0]], [0]), desc([[1.0]], [far]), corr, sphere, RHO)


def test_quality_acceptance_is_strict(sphere):
    e = sphere.edges[0]
    r = float(np.linalg.norm(sphere.vertices[e[0]] - sphere.vertices[e[1]]))
    corr = CorrespondenceMap.identity(sphere.n_vertices)
    dx, dy = desc([[0.0]], [e[0]]), desc([[1.0]], [e[1]])
    with pytest.raises(NoMatches):
        descriptor_quality(dx, dy, corr, sphere, r)
    assert len(descriptor_quality(dx, dy, corr, sphere, r * (1 + 1e-9)).distances) == 1


def test_quality_dimension_mismatch_names_both(sphere):
    corr = CorrespondenceMap.identity(sphere.n_vertices)
    with pytest.raises(ValueError, match="null.*bumpy"):
        descriptor_quality(desc([[1.0, 2.0]], [0]), desc([[1.0]], [0]), corr, sphere, RHO, names=("null", "bumpy"))


@pytest.mark.parametrize("seed", range(5))
def test_quality_matches_brute_force(sphere, G, seed):
    _, _, corr, dx, dy = random_instance(sphere, seed, n_feat=30)
    q = descriptor_quality(dx, dy, corr, sphere, RHO)
    ref, D = brute_quality(G, sphere, dx, dy, corr, RHO)
    assert q.denominator == pytest.approx(D, rel=1e-12)
    assert list(zip(q.rows.tolist(), q.matches.tolist())) == [(k, j) for k, j, _ in ref]
    assert np.allclose(q.distances, [d for _, _, d in ref], rtol=0, atol=1e-12)


@given(st.integers(0, 10_000), st.floats(1e-3, 1e3))
def test_quality_invariant_to_positive_scaling(seed, c):
    m = icosphere(2)
    _, _, corr, dx, dy = random_instance(m, seed, n_feat=20)
    a = descriptor_quality(dx, dy, corr, m, 0.4)
    b = descriptor_quality(desc(c * dx.matrix, dx.vertices), desc(c * dy.matrix, dy.vertices), corr, m, 0.4)
    assert np.allclose(a.distances, b.distances, rtol=0, atol=1e-9)


@given(st.integers(0, 10_000))
def test_quality_permutation_invariant(seed):
    m = icosphere(2)
    _, _, corr, dx, dy = random_instance(m, seed, n_feat=20)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(dy))
    a = descriptor_quality(dx, dy, corr, m, 0.4)
    b = descriptor_quality(dx, desc(dy.matrix[order], dy.vertices[order]), corr, m, 0.4)
    assert sorted(a.distances.tolist()) == pytest.approx(sorted(b.distances.tolist()), abs=1e-12)


# -- ROC ---------------------------------------------------------------------------------


def test_roc_hand_built_3x3():
    d = np.array([[0.1, 0.5, 0.9], [0.7, 0.2, 0.4], [0.3, 0.8, 0.6]])
    r = np.array([[0, 5, 5], [5, 0, 5], [5, 5, 0]], dtype=float)
    tau = [0.0, 0.15, 0.25, 0.45, 0.65, 1.0]
    c = roc_from_distances(d, r <= 1, tau)
    pos, neg = d[r <= 1], d[r > 1]
    assert c.tpr.tolist() == [np.mean(pos <= t) for t in tau]
    assert c.fpr.tolist() == [np.mean(neg <= t) for t in tau]
    assert c.tpr.tolist() == [0, 1 / 3, 2 / 3, 2 / 3, 1, 1]


def test_roc_endpoints():
    d = np.array([0.2, 0.4, 0.6, 0.8])
    c = roc_from_distances(d, np.array([True, False, True, False]), [0.1, 0.9])
    assert (c.fpr[0], c.tpr[0]) == (0.0, 0.0)
    assert (c.fpr[-1], c.tpr[-1]) == (1.0, 1.0)


def test_roc_degenerate_population():
    with pytest.raises(DegeneratePopulation):
        roc_from_distances(np.array([0.1, 0.2]), np.array([True, True]), [0.5])


def test_roc_curve_validation():
    with pytest.raises(ValueError):
        RocCurve(np.array([0.0, 1.0]), np.array([0.5, 0.2]), np.array([0.0, 1.0]))


@pytest.mark.parametrize("seed", range(3))
def test_roc_matches_brute_force(sphere, G, seed):
    _, _, corr, dx, dy = random_instance(sphere, seed, n_feat=25)
    tau = np.linspace(0, 2, 41)
    c = roc(dx, dy, corr, sphere, RHO, tau=tau)
    fpr, tpr = brute_roc(G, sphere, dx, dy, corr, RHO, tau)
    assert np.allclose(c.fpr, fpr, atol=1e-12) and np.allclose(c.tpr, tpr, atol=1e-12)


# -- dense quality -----------------------------------------------------------------------


def test_dense_self_is_zero():
    d = DescriptorSet(np.random.default_rng(0).random((50, 4)), np.arange(50), "hks", dense=True)
    assert dense_quality(d, d, CorrespondenceMap.identity(50)) == 0.0


def test_dense_exact_vs_sampled_denominator():
    rng = np.random.default_rng(1)
    x = rng.random((100, 16))
    dx = DescriptorSet(x, np.arange(100), "hks", dense=True)
    dy = DescriptorSet(x + 0.05 * rng.normal(size=x.shape), np.arange(100), "hks", dense=True)
    corr = CorrespondenceMap.identity(100)
    exact = dense_quality(dx, dy, corr, exact=True)
    sampled = dense_quality(dx, dy, corr, exact=False, pairs=2000, seed=3)
    assert sampled == pytest.approx(exact, rel=0.05)
    assert dense_quality(dx, dy, corr) == exact  # 10^4 pairs is under the exact limit


def test_dense_barycentric_interpolation(sphere):
    n = sphere.n_vertices
    x = sphere.vertices.copy()  # linear field: interpolation reproduces points
    dx = DescriptorSet(x, np.arange(n), "xyz", dense=True)
    corr = CorrespondenceMap(np.full(1, -1), np.array([4]), np.array([[0.2, 0.3, 0.5]]))
    p = corr.points(sphere)
    dy = DescriptorSet(p, np.array([0]), "xyz", dense=True)
    assert dense_quality(dx, dy, corr, sphere) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        dense_quality(dx, dy, corr)


def test_dense_shape_mismatch():
    dx = DescriptorSet(np.zeros((5, 2)), np.arange(5), "a", dense=True)
    dy = DescriptorSet(np.zeros((5, 3)), np.arange(5), "a", dense=True)
    with pytest.raises(ValueError):
        dense_quality(dx, dy, CorrespondenceMap.identity(5))


# -- aggregation -------------------------------------------------------------------------


def test_aggregate_cumulative_prefix_means():
    rep = aggregate({("noise", s): v for s, v in zip(range(1, 6), (90, 80, 70, 60, 50))})
    assert rep.cumulative["noise"] == [90, 85, 80, 75, 70]
    assert rep.average == [90, 85, 80, 75, 70]


def test_aggregate_single_strength_echoes():
    rep = aggregate({("holes", 1): 42.5})
    assert rep.cumulative["holes"][0] == 42.5
    assert rep.cumulative["holes"][1:] == [None] * 4
    assert rep.to_csv().splitlines()[1] == f"holes,42.50,{MISSING},{MISSING},{MISSING},{MISSING}"


def test_aggregate_two_classes_average():
    res = {("a", s): 100.0 for s in range(1, 6)} | {("b", s): 0.0 for s in range(1, 6)}
    assert aggregate(res).average == [50.0] * 5


def test_aggregate_missing_middle_strength():
    rep = aggregate({("a", 1): 10.0, ("a", 3): 30.0, ("b", 1): 20.0, ("b", 2): 40.0})
    assert rep.cumulative["a"] == [10.0, None, None, None, None]
    assert rep.average[:2] == [15.0, 30.0]


def test_aggregate_validation():
    with pytest.raises(ValueError):
        aggregate({})
    with pytest.raises(ValueError):
        aggregate({("a", 6): 1.0})
    with pytest.raises(ValueError):
        aggregate({("a", 1): 101.0})


def test_report_csv_layout():
    rep = aggregate({("scaling", s): 100.0 for s in range(1, 6)})
    lines = rep.to_csv().splitlines()
    assert lines[0] == "class,s1,le2,le3,le4,le5"
    assert lines[1] == "scaling,100.00,100.00,100.00,100.00,100.00"
    assert lines[2].startswith("Average,")


@given(st.lists(st.floats(0, 100), min_size=5, max_size=5))
def test_aggregate_prefix_mean_property(vals):
    rep = aggregate({("c", s + 1): v for s, v in enumerate(vals)})
    for i in range(5):
        assert rep.cumulative["c"][i] == pytest.approx(np.mean(vals[: i + 1]), abs=1e-12)


def test_eval_config_radius_and_validation():
    assert EvalConfig().radius(200.0) == pytest.approx(2.0)
    assert EvalConfig(rho=5.0).radius(200.0) == 5.0
    with pytest.raises(ValueError):
        EvalConfig(overlap=1.5)
    with pytest.raises(ValueError):
        EvalConfig(tau=(0.2, 0.1))
