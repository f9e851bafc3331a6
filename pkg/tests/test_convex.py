import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import maximal_convex_1d
from quadversary import convex
from quadversary.core import DomainError, RandomStream

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def test_value_vanishes_on_samples_and_is_one_without_samples():
    gen = RandomStream(1).substream("vanish").generator()
    samples = convex.SampleSet(gen.random((4, 3)), 3)
    evaluator = convex.MaximalConvexEvaluator(samples)
    assert evaluator.values(samples.points).max() <= 1e-9
    empty = convex.SampleSet.empty(3)
    assert convex.maximal_convex_value(np.array([0.2, 0.9, 0.4]), empty) == 1.0


def test_value_matches_1d_hull_geometry():
    samples = convex.SampleSet(np.array([[0.25]]), 1)
    assert convex.maximal_convex_value(np.array([0.5]), samples) == pytest.approx(
        1.0 / 3.0, abs=1e-9
    )


def test_values_match_1d_oracle_for_many_sample_sets():
    gen = RandomStream(2).substream("oracle-1d").generator()
    xs = gen.random(1000)
    for k in range(1, 6):
        pts = gen.random(k)
        evaluator = convex.MaximalConvexEvaluator(convex.SampleSet(pts[:, None], 1))
        expected = maximal_convex_1d(xs, pts)
        got = evaluator.values(xs[:, None])
        assert np.abs(got - expected).max() <= 1e-8
    # endpoint samples switch branches off entirely
    for pts in (np.array([0.0]), np.array([1.0]), np.array([0.0, 1.0])):
        evaluator = convex.MaximalConvexEvaluator(convex.SampleSet(pts[:, None], 1))
        expected = maximal_convex_1d(xs, pts)
        assert np.abs(evaluator.values(xs[:, None]) - expected).max() <= 1e-8


def test_batch_evaluator_equals_single_solves():
    gen = RandomStream(3).substream("batch").generator()
    samples = convex.SampleSet(gen.random((6, 4)), 4)
    evaluator = convex.MaximalConvexEvaluator(samples)
    xs = gen.random((200, 4))
    batch = evaluator.values(xs)
    singles = np.array([convex.maximal_convex_value(x, samples) for x in xs])
    assert np.abs(batch - singles).max() <= 1e-9


def test_midpoint_convexity_and_range():
    gen = RandomStream(4).substream("convexity").generator()
    for d in (2, 4, 6):
        samples = convex.SampleSet(gen.random((min(10, d + 4), d)), d)
        evaluator = convex.MaximalConvexEvaluator(samples)
        x = gen.random((2000, d))
        y = gen.random((2000, d))
        fx, fy = evaluator.values(x), evaluator.values(y)
        fmid = evaluator.values((x + y) / 2.0)
        assert (fmid <= (fx + fy) / 2.0 + 1e-7).all()
        assert fx.min() >= 0.0 and fx.max() <= 1.0


def test_dominates_every_vanishing_affine_minorant():
    gen = RandomStream(5).substream("minorant").generator()
    d = 3
    samples = convex.SampleSet(gen.random((5, d)), d)
    evaluator = convex.MaximalConvexEvaluator(samples)
    xs = gen.random((1000, d))
    fvals = evaluator.values(xs)
    for _ in range(20):
        slope = gen.normal(size=d)
        shift = -float((samples.points @ slope).max())  # vanishes on the samples
        peak = shift + float(np.clip(slope, 0.0, None).sum())  # max over the cube
        if peak > 1.0:
            slope, shift = slope / peak, shift / peak
        minorant = np.clip(xs @ slope + shift, 0.0, None)
        assert (minorant <= fvals + 1e-7).all()


def test_integral_trivial_sample_sets():
    stream = RandomStream(6)
    empty = convex.maximal_convex_integral(convex.SampleSet.empty(3), 500, stream)
    assert empty.value == 1.0 and empty.std_error == 0.0
    verts = np.array([[i, j] for i in (0.0, 1.0) for j in (0.0, 1.0)])
    full = convex.maximal_convex_integral(convex.SampleSet(verts, 2), 500, stream)
    assert full.value == 0.0


def test_integral_1d_single_origin_sample():
    # with the origin pinned, the maximal function is the identity ramp
    est = convex.maximal_convex_integral(
        convex.SampleSet(np.array([[0.0]]), 1), 20_000, RandomStream(7)
    )
    assert abs(est.value - 0.5) <= 3.0 * est.std_error
    bound = convex.empirical_error_lower_bound(
        convex.SampleSet(np.array([[0.0]]), 1), 20_000, RandomStream(7)
    )
    assert bound.value == pytest.approx(est.value / 2.0, abs=1e-15)
    assert abs(bound.value - 0.25) <= 1.5 * est.std_error


def test_caratheodory_examples():
    decomposition = dict(convex.caratheodory_cube_decomposition(np.array([0.7, 0.2])))
    assert decomposition == {
        (1, 1): pytest.approx(0.2),
        (1, 0): pytest.approx(0.5),
        (0, 0): pytest.approx(0.3),
    }
    assert convex.caratheodory_cube_decomposition(np.array([0.0, 1.0])) == [((0, 1), 1.0)]
    tied = dict(convex.caratheodory_cube_decomposition(np.array([0.5, 0.5])))
    assert tied == {(1, 1): pytest.approx(0.5), (0, 0): pytest.approx(0.5)}


@settings(max_examples=200, deadline=None)
@given(st.lists(unit, min_size=1, max_size=6))
def test_caratheodory_reconstruction(coords):
    x = np.array(coords)
    decomposition = convex.caratheodory_cube_decomposition(x)
    assert len(decomposition) <= x.size + 1
    weights = np.array([w for _, w in decomposition])
    vertices = np.array([v for v, _ in decomposition], dtype=float)
    assert weights.min() > 0.0
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.abs(weights @ vertices - x).max() <= 1e-12


def test_vertexize_counts_and_pointwise_decrease():
    gen = RandomStream(8).substream("vertexize").generator()
    one = convex.vertexize(convex.SampleSet(gen.random((1, 2)), 2))
    assert one.n <= 3
    verts = np.array([[0.0, 1.0], [1.0, 1.0]])
    again = convex.vertexize(convex.SampleSet(verts, 2))
    assert sorted(map(tuple, again.points)) == sorted(map(tuple, verts))

    samples = convex.SampleSet(gen.random((2, 3)), 3)
    expanded = convex.vertexize(samples)
    assert expanded.n <= (3 + 1) * 2
    before = convex.MaximalConvexEvaluator(samples)
    after = convex.MaximalConvexEvaluator(expanded)
    xs = gen.random((100, 3))
    assert (after.values(xs) <= before.values(xs) + 1e-9).all()


def test_elekes_ball_geometry():
    center, radius = convex.elekes_ball(np.zeros(4), 4)
    assert np.allclose(center, 0.25) and radius == math.sqrt(4) / 4.0
    center, radius = convex.elekes_ball(np.ones(4), 4)
    assert np.allclose(center, 0.75)
    for d in (1, 3, 8):
        v = np.zeros(d)
        v[:: 2] = 1.0
        center, radius = convex.elekes_ball(v, d)
        assert np.linalg.norm(v - center) == pytest.approx(radius, abs=1e-12)
    with pytest.raises(DomainError):
        convex.elekes_ball(np.full(3, 0.5), 3)


def test_cover_check_passes_on_vertex_sets():
    single = convex.SampleSet(np.array([[1.0, 0.0, 1.0]]), 3)
    assert convex.elekes_cover_check(single, 100, RandomStream(9)).ok
    opposite = convex.SampleSet(np.array([[0.0, 0.0], [1.0, 1.0]]), 2)
    assert convex.elekes_cover_check(opposite, 10_000, RandomStream(10)).ok
    all32 = convex.SampleSet(
        np.array([[(i >> k) & 1 for k in range(5)] for i in range(32)], dtype=float), 5
    )
    assert convex.elekes_cover_check(all32, 10_000, RandomStream(11)).ok


def test_hull_geometry_invariants():
    geometry = convex.HullGeometry(0.3, 6)
    assert 2.0 * geometry.s == (1.0 + 0.3) / 2.0
    assert geometry.apex[-1] == 0.3 and geometry.apex[0] == (1.0 + 0.3) / 2.0
    assert geometry.cap_radius == pytest.approx(math.sqrt(6) * geometry.s)


def test_cap_volume_known_cases():
    est = convex.cap_volume_mc(0.0, 1, 40_000, RandomStream(12))
    # at height 0 the 1-D cap is exactly [0, 1/2]
    assert abs(est.value - 0.5) <= 3.0 * est.std_error
    full = convex.cap_volume_mc(1.0, 4, 2_000, RandomStream(13))
    assert full.value == 1.0 and full.std_error == 0.0


def test_cap_volume_dominated_by_factor_power():
    bound = convex.chernoff_factor_min(0.25).g_min ** 10
    est = convex.cap_volume_mc(0.0, 10, 50_000, RandomStream(14))
    assert est.value <= bound + 3.0 * est.std_error


def test_chernoff_factor_basics():
    for s in (0.1, 0.25, 0.5):
        assert convex.chernoff_factor(s, 0.0) == 1.0
    # derivative in the rate at zero is s - 1/3
    for s in (0.25, 1.0 / 3.0, 0.45):
        h = 1e-5
        fd = (convex.chernoff_factor(s, h) - convex.chernoff_factor(s, 0.0)) / h
        assert fd == pytest.approx(s - 1.0 / 3.0, abs=1e-4)
    with pytest.raises(DomainError):
        convex.chernoff_factor(0.25, -1.0)


def test_chernoff_factor_matches_closed_form():
    for alpha in np.linspace(0.0, 30.0, 31):
        quad_route = convex.chernoff_factor(0.25, float(alpha))
        erf_route = convex.chernoff_factor_erf(0.25, float(alpha))
        assert quad_route == pytest.approx(erf_route, abs=1e-8)


def test_chernoff_factor_min_certification():
    bound = convex.chernoff_factor_min(0.25)
    assert bound.certified and bound.g_min < convex.CERTIFICATION_LIMIT
    assert bound.alpha_star > 0.0
    assert bound.g_min <= convex.chernoff_factor(0.25, 1.0) + 1e-12
    flat = convex.chernoff_factor_min(1.0 / 3.0)
    assert flat.g_min == pytest.approx(1.0, abs=1e-9) and not flat.certified
    rising = convex.chernoff_factor_min(0.45)
    assert rising.g_min == pytest.approx(1.0, abs=1e-9) and not rising.certified
    with pytest.raises(DomainError):
        convex.chernoff_factor_min(0.75)


def test_chernoff_factor_convex_in_rate():
    alphas = np.linspace(0.0, 12.0, 25)
    values = [convex.chernoff_factor(0.25, float(a)) for a in alphas]
    mids = [convex.chernoff_factor(0.25, float((a + b) / 2)) for a, b in zip(alphas, alphas[2:])]
    for left, mid, right in zip(values, mids, values[2:]):
        assert mid <= (left + right) / 2.0 + 1e-10


# First computation recorded as a derived golden value.
GOLDEN_T0 = 0.0950517578125


def test_height_threshold_properties():
    threshold = convex.default_height_threshold()
    assert threshold.t0 > 0.0
    assert threshold.eps0 == threshold.t0 / 2.0
    assert threshold.bound_at_t0.certified
    assert threshold.t0 == pytest.approx(GOLDEN_T0, abs=1e-4)
    # certification is tight: just above the threshold it fails
    above = convex.chernoff_factor_min((1.0 + threshold.t0 + 2e-3) / 4.0)
    assert not above.certified


def test_hull_volume_upper_bound_shapes():
    t0 = convex.default_height_threshold().t0
    assert convex.hull_volume_upper_bound(0, 7, t0) == 1.0 - t0
    assert convex.hull_volume_upper_bound(3, 400, t0) == pytest.approx(1.0 - t0, abs=1e-5)
    assert convex.hull_volume_upper_bound(1, 1, 0.1) == 1.0  # vacuous at small d
    with pytest.raises(DomainError):
        convex.hull_volume_upper_bound(1, 1, 1.5)


def test_complexity_lower_bound_values():
    eps0 = convex.default_height_threshold().eps0
    assert convex.complexity_lower_bound(eps0, 20, eps0) == 0
    tiny = convex.complexity_lower_bound(1e-15, 50, eps0)
    assert tiny == math.ceil((1.1**50) * (1 - 1e-15 / eps0) / 51.0)
    previous = None
    for eps in (1e-6, 1e-3, eps0 / 2.0, eps0 * 0.99):
        bound = convex.complexity_lower_bound(eps, 30, eps0)
        if previous is not None:
            assert bound <= previous
        previous = bound
    assert convex.complexity_lower_bound(1e-3, 60, eps0) > convex.complexity_lower_bound(
        1e-3, 40, eps0
    )


def test_hull_volume_against_exact_small_d_polytope_volume():
    from scipy.spatial import ConvexHull

    gen = RandomStream(41).substream("hull-exact").generator()
    # d = 1: the hull is a quadrilateral, area by the shoelace formula
    pts = np.sort(gen.random(3))
    corners = np.array([[pts[0], 0.0], [pts[-1], 0.0], [1.0, 1.0], [0.0, 1.0]])
    x, y = corners[:, 0], corners[:, 1]
    area = 0.5 * abs(float(x @ np.roll(y, -1) - y @ np.roll(x, -1)))
    est = convex.maximal_convex_integral(
        convex.SampleSet(pts[:, None], 1), 40_000, RandomStream(42)
    )
    assert abs((1.0 - est.value) - area) <= 3.0 * est.std_error
    # d = 2: exact 3-D hull volume of the samples plus the lifted top face
    samples = gen.random((4, 2))
    base = np.hstack([samples, np.zeros((4, 1))])
    top = np.array([[i, j, 1.0] for i in (0.0, 1.0) for j in (0.0, 1.0)])
    exact_volume = ConvexHull(np.vstack([base, top])).volume
    est = convex.maximal_convex_integral(
        convex.SampleSet(samples, 2), 40_000, RandomStream(43)
    )
    assert abs((1.0 - est.value) - exact_volume) <= 3.0 * est.std_error


def test_statistical_volume_consistent_with_closed_form_bound():
    t0 = convex.default_height_threshold().t0
    gen = RandomStream(15).substream("volume-bound").generator()
    for trial in range(10):
        d = int(gen.integers(2, 11))
        n = int(gen.integers(1, 11))
        samples = convex.SampleSet(gen.random((n, d)), d)
        est = convex.maximal_convex_integral(samples, 2000, RandomStream(16).substream(trial))
        hull_volume = 1.0 - est.value
        assert hull_volume <= convex.hull_volume_upper_bound(n, d, t0) + 3.0 * est.std_error
