import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmmrate.hilbert import (
    MAX_BIRKHOFF_SIZE,
    MetricDomainError,
    adversarial_ratio_search,
    batch_hilbert_distance,
    birkhoff_coefficient,
    complex_hilbert_distance,
    complex_perturbed_pairs,
    contraction_ratio_sample,
    hilbert_distance,
    induced_map,
    random_interior,
    random_pairs,
)
from hmmrate.model import SimplexVector, SingularEvaluation, perturb_transition

# measured once with seed 2024 over l in {2, 3, 5}; sup of |v-w|/d_H was 0.35355 (= sqrt(2)/4)
K_DOMINATION = 0.3536
# on {min_i w_i >= 0.05}: inf d_H/|v-w| was 2.828 (l=2), sup 27.6 (l=3, near pairs)
C1_COMPACT = 2.8
C2_COMPACT = 30.0

positive = st.floats(0.05, 20.0)


def vec(l):
    return st.lists(positive, min_size=l, max_size=l).map(lambda x: np.array(x) / sum(x))


class TestRealMetric:
    def test_identity(self):
        assert hilbert_distance([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_log3(self):
        assert hilbert_distance([0.5, 0.5], [0.25, 0.75]) == pytest.approx(math.log(3), abs=1e-15)

    def test_log2(self):
        assert hilbert_distance([1 / 3] * 3, [0.5, 0.25, 0.25]) == pytest.approx(math.log(2), abs=1e-15)

    def test_accepts_simplex_vector(self):
        assert hilbert_distance(SimplexVector([0.5, 0.5]), SimplexVector([0.25, 0.75])) == pytest.approx(math.log(3))

    def test_boundary_rejected(self):
        with pytest.raises(MetricDomainError):
            hilbert_distance([0.0, 1.0], [0.5, 0.5])

    def test_length_mismatch(self):
        with pytest.raises(MetricDomainError):
            hilbert_distance([0.5, 0.5], [0.2, 0.3, 0.5])

    def test_direct_ratio_formula(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            v, w = random_interior(rng, 4, 2)
            ref = max(math.log((w[i] / w[j]) / (v[i] / v[j])) for i in range(4) for j in range(4))
            assert hilbert_distance(v, w) == pytest.approx(ref, abs=1e-13)

    def test_axioms_bulk(self):
        rng = np.random.default_rng(1)
        for l in (2, 3, 5):
            U, V, W = (random_interior(rng, l, 100_000 // 3) for _ in range(3))
            duv, dvw, duw = batch_hilbert_distance(U, V), batch_hilbert_distance(V, W), batch_hilbert_distance(U, W)
            np.testing.assert_array_equal(duv, batch_hilbert_distance(V, U))
            assert np.all(duw <= duv + dvw + 1e-12)
            assert np.all(batch_hilbert_distance(U, U) == 0)

    def test_domination_constant(self):
        rng = np.random.default_rng(2024)
        for l in (2, 3, 5):
            V, W = random_interior(rng, l, 50_000, 6), random_interior(rng, l, 50_000, 6)
            assert np.all(np.linalg.norm(V - W, axis=1) <= K_DOMINATION * batch_hilbert_distance(V, W))

    def test_equivalence_on_compact_set(self):
        rng = np.random.default_rng(2024)
        for l in (2, 3, 5):
            X = rng.dirichlet(np.ones(l), 400_000)
            X = X[X.min(axis=1) >= 0.05]
            half = X.shape[0] // 2
            A, B = X[:half], X[half : 2 * half]
            near = A * np.exp(rng.normal(0, 1e-4, A.shape))
            near /= near.sum(axis=1, keepdims=True)
            for P, Q in ((A, B), (A, near)):
                q = batch_hilbert_distance(P, Q) / np.linalg.norm(P - Q, axis=1)
                assert q.min() >= C1_COMPACT and q.max() <= C2_COMPACT


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5).flatmap(lambda l: st.tuples(vec(l), vec(l), vec(l), st.floats(0.1, 10))))
def test_metric_axioms(args):
    u, v, w, c = args
    assert hilbert_distance(u, v) == pytest.approx(hilbert_distance(v, u), abs=1e-12)
    assert hilbert_distance(u, w) <= hilbert_distance(u, v) + hilbert_distance(v, w) + 1e-12
    # projective: scalar multiples are at distance zero
    assert hilbert_distance(u, c * u) <= 1e-12
    assert hilbert_distance(c * u, v) == pytest.approx(hilbert_distance(u, v), abs=1e-12)


class TestComplexMetric:
    def test_identity(self):
        v = [0.5 + 0.01j, 0.5 - 0.01j]
        assert complex_hilbert_distance(v, v) == 0.0

    def test_real_restriction(self):
        assert complex_hilbert_distance([0.5, 0.5], [0.25, 0.75]) == pytest.approx(math.log(3), abs=1e-15)

    def test_mpmath_oracle(self):
        mpmath.mp.dps = 50
        v = [mpmath.mpc(0.5, 0.01), mpmath.mpc(0.5, -0.01)]
        w = [mpmath.mpc(0.5), mpmath.mpc(0.5)]
        ref = max(abs(mpmath.log((w[i] / w[j]) / (v[i] / v[j]))) for i in range(2) for j in range(2))
        got = complex_hilbert_distance([0.5 + 0.01j, 0.5 - 0.01j], [0.5, 0.5])
        assert got == pytest.approx(float(ref), abs=1e-15)

    def test_domain_enforced(self):
        with pytest.raises(MetricDomainError):
            complex_hilbert_distance([0.5 + 2j, 0.5 - 2j], [0.5, 0.5])

    def test_axioms_near_real(self):
        rng = np.random.default_rng(3)
        for l in (2, 3, 4):
            for _ in range(300):
                (u, v), (w, _) = complex_perturbed_pairs(rng, l, 2, 0.2)
                duv, dvw, duw = (complex_hilbert_distance(a, b) for a, b in ((u, v), (v, w), (u, w)))
                assert duv == pytest.approx(complex_hilbert_distance(v, u), abs=1e-12)
                assert duw <= duv + dvw + 1e-12


class TestInducedMap:
    def test_fixed_point(self):
        np.testing.assert_allclose(induced_map([[2, 1], [1, 2]], [0.5, 0.5]), [0.5, 0.5], atol=1e-15)

    def test_near_identity(self):
        np.testing.assert_allclose(induced_map([[1, 1e-4], [1e-4, 1]], [0.9, 0.1]), [0.9, 0.1], atol=1e-3)

    def test_vertex(self):
        np.testing.assert_allclose(induced_map([[2, 1], [1, 2]], [1, 0]), [2 / 3, 1 / 3], atol=1e-15)

    def test_complex_singular(self):
        with pytest.raises(SingularEvaluation):
            induced_map(np.array([[1, -1], [1j, -1j]]), np.array([0.5, 0.5]))

    def test_sums_to_one(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            T = np.exp(rng.normal(size=(3, 3)))
            assert induced_map(T, random_interior(rng, 3, 1)[0]).sum() == pytest.approx(1.0, abs=1e-14)


class TestBirkhoff:
    def test_rank_one(self):
        assert birkhoff_coefficient([[1, 1], [1, 1]]) == 0.0
        assert birkhoff_coefficient(np.outer([1, 2, 3], [4, 5, 6])) == pytest.approx(0.0, abs=1e-7)

    def test_hand_values(self):
        assert birkhoff_coefficient([[2, 1], [1, 2]]) == pytest.approx(1 / 3, abs=1e-15)
        assert birkhoff_coefficient([[0.9, 0.1], [0.2, 0.8]]) == pytest.approx(5 / 7, abs=1e-15)

    def test_two_by_two_closed_form(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            a, b, c, d = np.exp(rng.normal(size=4))
            phi = min(a * d / (b * c), b * c / (a * d))
            assert birkhoff_coefficient([[a, b], [c, d]]) == pytest.approx((1 - phi**0.5) / (1 + phi**0.5), abs=1e-14)

    def test_domain(self):
        with pytest.raises(MetricDomainError):
            birkhoff_coefficient([[1, 0], [1, 1]])
        with pytest.raises(MetricDomainError):
            birkhoff_coefficient(np.ones((MAX_BIRKHOFF_SIZE + 1,) * 2))
        with pytest.raises(MetricDomainError):
            birkhoff_coefficient(np.ones((2, 3)))


class TestContractionSample:
    def test_rank_one(self):
        rng = np.random.default_rng(6)
        assert contraction_ratio_sample(np.ones((2, 2)), random_pairs(rng, 2, 100)).max_ratio == 0.0

    def test_symmetric_matrix(self):
        rng = np.random.default_rng(7)
        T = [[2, 1], [1, 2]]
        res = contraction_ratio_sample(T, random_pairs(rng, 2, 10_000))
        assert res.max_ratio <= 1 / 3 + 1e-12 and res.pairs_used == 10_000
        assert adversarial_ratio_search(T) >= 0.33

    def test_skips_degenerate_pairs(self):
        res = contraction_ratio_sample([[2, 1], [1, 2]], [([0.5, 0.5], [0.5, 0.5]), ([0.5, 0.5], [0.2, 0.8])])
        assert res.skipped == 1 and res.pairs_used == 1

    def test_complex_perturbation_contracts(self):
        rng = np.random.default_rng(8)
        P = np.array([[0.9, 0.1], [0.2, 0.8]])
        Pc = perturb_transition(P, 0.01, 8)
        res = contraction_ratio_sample(Pc, complex_perturbed_pairs(rng, 2, 1000, 0.05), metric="complex")
        assert res.max_ratio < 1


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_iterated_contraction(l, seed, k):
    rng = np.random.default_rng(seed)
    T = np.exp(rng.uniform(-2, 2, (l, l)))
    tau = birkhoff_coefficient(T)
    v, w = random_interior(rng, l, 2)
    d0 = hilbert_distance(v, w)
    x, y = v, w
    for step in range(1, k + 1):
        x, y = induced_map(T, x), induced_map(T, y)
        assert hilbert_distance(x, y) <= tau**step * d0 + 1e-12
