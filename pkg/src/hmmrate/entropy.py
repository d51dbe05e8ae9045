"""Estimation of H_n(Z) = -E log p(z_0 | z_{-n}^{-1}) and its convergence in n."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from .filtering import log_predictive_batch
from .model import ChannelModel, MarkovModel, sample_paths
from .quadrature import differential_entropy, mixture_entropy

# differences below this are roundoff, whatever their standard error
ABSOLUTE_NOISE_FLOOR = 1e-12
NOISE_FLOOR_SE = 3.0


@dataclass(frozen=True)
class EntropyEstimate:
    n: int
    value: float
    std_error: float
    samples: int
    method: Literal["monte_carlo", "quadrature_1d"]


def conditional_entropy_given_input(model: MarkovModel, channel: ChannelModel) -> float:
    """H(Z_0|Y_0) = sum_y pi_y h(q(.|y)) in nats, each term by adaptive quadrature."""
    if model.size != channel.size:
        raise ValueError("model and channel sizes differ")
    terms = [differential_entropy(channel, y) for y in range(channel.size)]
    return math.fsum(p * h for p, h in zip(model.stationary, terms))


def marginal_entropy(model: MarkovModel, channel: ChannelModel) -> EntropyEstimate:
    """H_0(Z): entropy of the stationary output mixture; equals H(Z) for i.i.d. inputs."""
    h = mixture_entropy(channel, model.stationary)
    return EntropyEstimate(0, h, 0.0, 0, "quadrature_1d")


def markov_block_entropy(model: MarkovModel, n: int) -> float:
    """H(Y_{-n}^0) = H(pi) + n H(Y_1|Y_0) for the stationary input chain."""
    pi, P = model.stationary, model.transition
    h0 = -math.fsum(p * math.log(p) for p in pi if p > 0)
    h1 = -math.fsum(pi[i] * P[i, j] * math.log(P[i, j]) for i in range(model.size) for j in range(model.size))
    return h0 + n * h1


def sandwich_bounds(model: MarkovModel, channel: ChannelModel, n: int) -> tuple[float, float]:
    """(H(Z_0|Y_0), H(Y_{-n}^0)/(n+1) + H(Z_0|Y_0)): bounds on H_n(Z)."""
    hc = conditional_entropy_given_input(model, channel)
    return hc, hc + markov_block_entropy(model, n) / (n + 1)


def _mean_se(x: NDArray[np.float64]) -> tuple[float, float]:
    n = x.size
    m = math.fsum(x) / n
    var = math.fsum((x - m) ** 2) / (n - 1)
    return m, math.sqrt(var / n)


def conditional_log_densities(
    model: MarkovModel, channel: ChannelModel, z: NDArray[np.float64], windows
) -> dict[int, NDArray[np.float64]]:
    """log p(z_0 | z_{-n}^{-1}) for each n in ``windows``, per row of ``z``.

    The last column of ``z`` is z_0; window n uses the n columns before it,
    so all windows share the same sample paths.
    """
    logq = channel.log_densities(z)
    T = z.shape[1]
    out = {}
    for n in windows:
        inc, _ = log_predictive_batch(model.transition, model.stationary, logq[:, T - n - 1 :, :])
        out[n] = inc[:, -1]
    return out


def estimate_entropy_rate(
    model: MarkovModel, channel: ChannelModel, n: int, samples: int, rng_seed: int
) -> EntropyEstimate:
    """Monte Carlo mean of -log p(z_0 | z_{-n}^{-1}) over stationary sample paths."""
    if samples < 2:
        raise ValueError("need at least two samples")
    if n < 0:
        raise ValueError("window must be nonnegative")
    rng = np.random.default_rng(rng_seed)
    _, z = sample_paths(model, channel, n + 1, samples, rng)
    h = -conditional_log_densities(model, channel, z, [n])[n]
    value, se = _mean_se(h)
    return EntropyEstimate(n, value, se, samples, "monte_carlo")


@dataclass(frozen=True)
class ConvergenceRecord:
    estimates: tuple[EntropyEstimate, ...]
    deltas: tuple[float, ...]  # H_{n+1} - H_n, n = 0..n_max-1
    delta_errors: tuple[float, ...]
    rho_hat: float
    L_hat: float
    r_squared: float
    fit_points: int
    verdict: Literal["converged", "converged at noise floor", "inconclusive"]

    def rows(self):
        """(n, H_n, std_error, delta, rho_hat) rows; delta is empty for the last n."""
        for k, est in enumerate(self.estimates):
            d = self.deltas[k] if k < len(self.deltas) else None
            yield est.n, est.value, est.std_error, d, self.rho_hat


def fit_geometric(deltas, errors, noise_se: float = NOISE_FLOOR_SE):
    """Least-squares fit of log|delta_n| = log L + n log rho over the leading run
    of differences above the noise floor. Returns (rho, L, r2, points)."""
    xs, ys = [], []
    for n, (d, e) in enumerate(zip(deltas, errors)):
        if abs(d) <= max(noise_se * e, ABSOLUTE_NOISE_FLOOR):
            break
        xs.append(n)
        ys.append(math.log(abs(d)))
    if len(xs) < 2:
        return float("nan"), float("nan"), float("nan"), len(xs)
    x, y = np.array(xs, float), np.array(ys)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(np.exp(slope)), float(np.exp(intercept)), float(r2), len(xs)


def convergence_scan(
    model: MarkovModel, channel: ChannelModel, n_max: int, samples: int, rng_seed: int
) -> ConvergenceRecord:
    """H_0..H_{n_max} on one set of paths of length n_max + 1 (nested windows).

    Successive differences are averaged per path, so the common randomness
    cancels out of H_{n+1} - H_n.
    """
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    if samples < 2:
        raise ValueError("need at least two samples")
    rng = np.random.default_rng(rng_seed)
    _, z = sample_paths(model, channel, n_max + 1, samples, rng)
    h = {n: -v for n, v in conditional_log_densities(model, channel, z, range(n_max + 1)).items()}
    estimates = []
    for n in range(n_max + 1):
        m, se = _mean_se(h[n])
        estimates.append(EntropyEstimate(n, m, se, samples, "monte_carlo"))
    deltas, errors = [], []
    for n in range(n_max):
        m, se = _mean_se(h[n + 1] - h[n])
        deltas.append(m)
        errors.append(se)
    rho, L, r2, pts = fit_geometric(deltas, errors)
    if pts < 2:
        verdict = "converged at noise floor"
    elif rho < 1:
        verdict = "converged"
    else:
        verdict = "inconclusive"
    return ConvergenceRecord(tuple(estimates), tuple(deltas), tuple(errors), rho, L, r2, pts, verdict)
