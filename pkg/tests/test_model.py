import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmmrate.model import (
    ChannelKind,
    ChannelModel,
    ComplexChannelModel,
    ComplexMarkovModel,
    ComplexSimplexVector,
    MarkovModel,
    ModelError,
    SimplexVector,
    SingularEvaluation,
    density,
    density_complex,
    perturb_transition,
    sample_paths,
    sample_trajectory,
    stationary_vector,
)
from hmmrate.quadrature import total_mass

from conftest import random_positive_stochastic


def power_iteration(P, iters=10000):
    x = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(iters):
        x = x @ P
    return x


class TestStationary:
    def test_symmetric(self):
        np.testing.assert_allclose(stationary_vector([[0.5, 0.5], [0.5, 0.5]]), [0.5, 0.5], atol=1e-15)

    def test_two_state_by_hand(self):
        # 0.1 pi_1 = 0.2 pi_2, pi_1 + pi_2 = 1
        np.testing.assert_allclose(stationary_vector([[0.9, 0.1], [0.2, 0.8]]), [2 / 3, 1 / 3], atol=1e-14)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_power_iteration(self, seed):
        rng = np.random.default_rng(seed)
        P = random_positive_stochastic(rng, int(rng.integers(2, 7)))
        pi = stationary_vector(P)
        np.testing.assert_allclose(pi, power_iteration(P), atol=1e-10)
        np.testing.assert_allclose(pi @ P, pi, atol=1e-10)
        assert abs(pi.sum() - 1) < 1e-12

    def test_rejects_bad_rows(self):
        with pytest.raises(ModelError):
            stationary_vector([[0.5, 0.6], [0.5, 0.5]])

    def test_rejects_zero_entries(self):
        with pytest.raises(ModelError):
            stationary_vector([[1.0, 0.0], [0.5, 0.5]])

    def test_complex_rows(self):
        P = perturb_transition([[0.9, 0.1], [0.2, 0.8]], 0.01, 0)
        pi = stationary_vector(P)
        np.testing.assert_allclose(pi @ P, pi, atol=1e-12)
        assert abs(pi.sum() - 1) < 1e-12


class TestTypes:
    def test_simplex_invariants(self):
        v = SimplexVector([0.25, 0.75])
        assert v.interior and len(v) == 2
        assert not SimplexVector([0.0, 1.0]).interior
        with pytest.raises(ModelError):
            SimplexVector([0.5, 0.6])
        with pytest.raises(ModelError):
            SimplexVector([-0.1, 1.1])

    def test_complex_simplex_half_plane(self):
        assert ComplexSimplexVector([0.5 + 0.01j, 0.5 - 0.01j]).in_right_half_plane
        assert not ComplexSimplexVector([0.5 + 2j, 0.5 - 2j]).in_right_half_plane

    def test_markov_model(self, two_state):
        assert two_state.size == 2 and two_state.strictly_positive
        np.testing.assert_allclose(two_state.stationary @ two_state.transition, two_state.stationary, atol=1e-10)
        with pytest.raises(ModelError):
            MarkovModel([[1.0, 0.0], [0.5, 0.5]])

    def test_complex_markov_rows(self):
        ComplexMarkovModel([[0.9 + 0.1j, 0.1 - 0.1j], [0.2, 0.8]])
        with pytest.raises(ModelError):
            ComplexMarkovModel([[0.9 + 0.1j, 0.1], [0.2, 0.8]])

    def test_channel_scales_positive(self):
        with pytest.raises(ModelError):
            ChannelModel.gaussian([0, 0], [1, 0])
        with pytest.raises(ModelError):
            ChannelModel.cauchy([0], [-1])

    def test_models_are_immutable(self, two_state):
        with pytest.raises(ValueError):
            two_state.transition[0, 0] = 0.5


class TestDensity:
    def test_cauchy_peak(self):
        assert density(ChannelModel.cauchy([0], [1]), 0.0, 1) == pytest.approx(1 / math.pi, rel=1e-15)

    def test_gaussian_peak(self):
        assert density(ChannelModel.gaussian([0], [1]), 0.0, 1) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)

    def test_cauchy_scale_two(self):
        assert density(ChannelModel.cauchy([1], [2]), 1.0, 1) == pytest.approx(1 / (2 * math.pi), rel=1e-15)

    def test_symbol_range(self):
        with pytest.raises(ModelError):
            density(ChannelModel.cauchy([0], [1]), 0.0, 2)

    @pytest.mark.parametrize(
        "channel",
        [
            ChannelModel.gaussian([0.0, 3.0], [1.0, 0.2]),
            ChannelModel.gaussian([-5.0], [7.0]),
            ChannelModel.cauchy([0.0, 2.0], [1.0, 0.1]),
            ChannelModel.cauchy([10.0], [5.0]),
        ],
    )
    def test_integrates_to_one(self, channel):
        for y in range(channel.size):
            assert total_mass(channel, y) == pytest.approx(1.0, abs=1e-8)

    def test_integrates_to_one_mpmath(self):
        # independent oracle: mpmath tanh-sinh over the whole line
        mpmath.mp.dps = 30
        g = mpmath.quad(lambda z: mpmath.npdf(z, 0.3, 1.7), [-mpmath.inf, 0.3, mpmath.inf])
        c = mpmath.quad(lambda z: 0.5 / (mpmath.pi * ((z - 1) ** 2 + 0.25)), [-mpmath.inf, 1, mpmath.inf])
        assert float(g) == pytest.approx(total_mass(ChannelModel.gaussian([0.3], [1.7]), 0), abs=1e-8)
        assert float(c) == pytest.approx(total_mass(ChannelModel.cauchy([1.0], [0.5]), 0), abs=1e-8)

    def test_slow_tail_density_closed_form(self):
        ch = ChannelModel(ChannelKind.SLOW_TAIL, [0.0], [1.0])
        # integral over |z| <= t is 1 - 1/log(e + t)
        f = lambda z: density(ch, z, 1)
        from scipy import integrate

        val = integrate.quad(f, -20, 20, points=[0])[0]
        assert val == pytest.approx(1 - 1 / math.log(math.e + 20), rel=1e-9)


class TestDensityComplex:
    def test_real_parameters_match(self):
        for ch in (ChannelModel.gaussian([0.5, -1], [1.0, 2.0]), ChannelModel.cauchy([0.5, -1], [1.0, 2.0])):
            cc = ComplexChannelModel.from_real(ch)
            for z in np.linspace(-10, 10, 41):
                for y in (1, 2):
                    assert abs(density_complex(cc, z, y) - density(ch, z, y)) <= 1e-15

    def test_gaussian_unit(self):
        cc = ComplexChannelModel.gaussian([0], [1 + 0j])
        assert density_complex(cc, 0.0, 1) == pytest.approx(0.3989422804014327, abs=1e-15)

    def test_cauchy_singular(self):
        cc = ComplexChannelModel.cauchy([0], [1j])
        with pytest.raises(SingularEvaluation):
            density_complex(cc, 1.0, 1)

    def test_gaussian_complex_scale_mpmath(self):
        mpmath.mp.dps = 40
        s = mpmath.mpc(1, 0.01)
        ref = complex(1 / (mpmath.sqrt(2 * mpmath.pi) * s) * mpmath.exp(-1 / (2 * s * s)))
        cc = ComplexChannelModel.gaussian([0], [1 + 0.01j])
        assert abs(density_complex(cc, 1.0, 1) - ref) < 1e-15
        assert abs(np.exp(cc.log_densities(1.0)[0]) - ref) < 1e-15

    @pytest.mark.parametrize("kind", ["gaussian", "cauchy"])
    @pytest.mark.parametrize("which", [0, 1])
    def test_cauchy_riemann(self, kind, which):
        # d/dx and d/(i dy) of an analytic function agree
        base = np.array([0.3, 1.2], dtype=complex)
        h = 1e-6

        def q(t):
            p = base.copy()
            p[which] = t
            return density_complex(ComplexChannelModel(kind, [p[0]], [p[1]]), 0.7, 1)

        t0 = base[which] + 0.05j
        dx = (q(t0 + h) - q(t0 - h)) / (2 * h)
        dy = (q(t0 + 1j * h) - q(t0 - 1j * h)) / (2j * h)
        assert abs(dx - dy) < 1e-8


class TestSampling:
    def test_deterministic(self, two_state):
        ch = ChannelModel.cauchy([-1, 1], [1, 1])
        a = sample_trajectory(two_state, ch, 50, 7)
        b = sample_trajectory(two_state, ch, 50, 7)
        np.testing.assert_array_equal(a.inputs, b.inputs)
        np.testing.assert_array_equal(a.outputs, b.outputs)
        assert set(a.inputs) <= {1, 2}

    def test_uniform_first_symbol(self):
        # one symbol per seed over many seeds; batched draw gives the same law
        m = MarkovModel.iid([0.5, 0.5])
        ch = ChannelModel.gaussian([-1, 1], [1, 1])
        rng = np.random.default_rng(0)
        states, _ = sample_paths(m, ch, 1, 100_000, rng)
        assert abs(states.mean() - 0.5) < 0.01
        ys = [sample_trajectory(m, ch, 1, s).inputs[0] for s in range(2000)]
        assert abs(np.mean(ys) - 1.5) < 0.05

    def test_channel_mean(self):
        m = MarkovModel.iid([0.5, 0.5])
        ch = ChannelModel.gaussian([-1, 1], [1, 1])
        states, z = sample_paths(m, ch, 1, 100_000, np.random.default_rng(1))
        sel = z[states == 1]
        assert abs(sel.mean() - 1) < 3 / math.sqrt(sel.size)

    def test_transition_frequencies(self, two_state):
        ch = ChannelModel.gaussian([0, 0], [1, 1])
        N = 200_000
        t = sample_trajectory(two_state, ch, N, 3)
        y = t.inputs - 1
        counts = np.zeros((2, 2))
        np.add.at(counts, (y[:-1], y[1:]), 1)
        freq = counts / counts.sum(axis=1, keepdims=True)
        assert np.all(np.abs(freq - two_state.transition) < 5 / math.sqrt(N))

    def test_slow_tail_sampler_cdf(self):
        ch = ChannelModel(ChannelKind.SLOW_TAIL, [0.0], [1.0])
        _, z = sample_paths(MarkovModel([[1.0]]), ch, 1, 100_000, np.random.default_rng(2))
        for t in (1.0, 10.0, 1000.0):
            p = 1 / math.log(math.e + t)
            assert abs(np.mean(np.abs(z) > t) - p) < 5 * math.sqrt(p * (1 - p) / z.size)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_stationary_is_fixed_point(l, seed):
    P = random_positive_stochastic(np.random.default_rng(seed), l, floor=1e-3)
    pi = stationary_vector(P)
    assert np.all(np.abs(pi @ P - pi) <= 1e-10)
    assert abs(pi.sum() - 1) <= 1e-12
