"""Regularity checks on channel families, parameter derivatives of H_n, and a
numerical probe of the equal-scale Gaussian non-analyticity.

Suprema and infima over a complex parameter ball are approximated by the
ball's center plus points on the circle of radius r2 in each coordinate
direction. Every positive verdict is therefore "certified-on-grid" only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, optimize

from .filtering import log_predictive_batch
from .model import (
    ChannelKind,
    ChannelModel,
    ComplexChannelModel,
    MarkovModel,
    SingularEvaluation,
    sample_paths,
    stationary_vector,
)
from .quadrature import mixture_entropy

Verdict = Literal["certified-on-grid", "violated", "inconclusive"]


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    verdict: Verdict
    margins: dict = field(default_factory=dict)
    witness: dict | None = None

    def __post_init__(self):
        if self.verdict == "violated" and not self.witness:
            raise ValueError("a violated condition needs a witness")


def ball_channels(channel: ChannelModel, r2: float, n_circle: int = 16) -> list[ChannelModel]:
    """The center of the complex r2-ball around the channel parameters plus
    ``n_circle`` points on the coordinate circle of each parameter."""
    theta0 = channel.params.astype(complex)
    out = [ComplexChannelModel.from_real(channel)]
    if r2 <= 0:
        return out
    phases = np.exp(2j * np.pi * np.arange(n_circle) / n_circle)
    for k in range(theta0.size):
        for ph in phases:
            t = theta0.copy()
            t[k] += r2 * ph
            out.append(channel.with_params(t))
    return out


# --------------------------------------------------------------------------
# analyticity and joint continuity on the parameter ball
# --------------------------------------------------------------------------


def check_analytic_ball(channel: ChannelModel, r2: float) -> list[ConditionReport]:
    """Conditions c-i (q analytic in theta) and c-ii (q jointly continuous in
    (z, theta)) on the Euclidean r2-ball around each component's (mu, scale).

    Decided from the singular set of each family, not by sampling:
    Gaussian q is entire in (mu, sigma) away from sigma = 0; Cauchy q has poles
    where (z - mu)^2 + gamma^2 = 0, whose nearest point to a real (mu0, gamma0)
    lies at Euclidean distance gamma0 / sqrt(2). The slow-tail family uses
    |z - mu|, which has no analytic continuation in mu.
    """
    verdicts = []
    if channel.kind is ChannelKind.SLOW_TAIL:
        # the continuation sign(Re u) u jumps across Re u = 0
        k = 0
        mu0, s0 = float(channel.mu[k]), float(channel.scale[k])
        a = mu0 + r2 * np.exp(0.49j * np.pi)
        b = mu0 + r2 * np.exp(0.51j * np.pi)
        qa, qb = (
            np.exp(ComplexChannelModel(channel.kind, [t], [s0]).log_densities(mu0))[0] for t in (a, b)
        )
        witness = {"z": mu0, "y": k + 1, "theta_a": [complex(a), s0], "theta_b": [complex(b), s0], "jump": float(abs(qa - qb))}
        if r2 > 0:
            for cid in ("c-i", "c-ii"):
                verdicts.append(ConditionReport(cid, "violated", {"r2": r2}, witness))
            return verdicts
        return [ConditionReport(cid, "certified-on-grid", {"r2": r2}) for cid in ("c-i", "c-ii")]
    if channel.kind is ChannelKind.GAUSSIAN:
        dist = np.real(channel.scale).astype(float)
    else:
        dist = np.real(channel.scale).astype(float) / math.sqrt(2.0)
    k = int(np.argmin(dist))
    margins = {"r2": r2, "singular_distance": float(dist[k])}
    if r2 < dist[k]:
        return [ConditionReport(cid, "certified-on-grid", margins) for cid in ("c-i", "c-ii")]
    mu0, s0 = float(channel.mu[k]), float(channel.scale[k])
    if channel.kind is ChannelKind.GAUSSIAN:
        witness = {"y": k + 1, "theta": [mu0, 0.0], "reason": "sigma = 0"}
    else:
        # z - mu = i gamma at z = mu0
        witness = {"y": k + 1, "z": mu0, "theta": [complex(mu0, -s0 / 2), s0 / 2], "reason": "pole"}
    return [ConditionReport(cid, "violated", margins, witness) for cid in ("c-i", "c-ii")]


# --------------------------------------------------------------------------
# comparability (all density ratios bounded above and below)
# --------------------------------------------------------------------------


def _tail_log_ratio(channel: ChannelModel, i: int, j: int) -> float:
    """lim_{|z|->inf} log(q(z|j)/q(z|i)) for the heavy-tailed families."""
    if channel.kind is ChannelKind.CAUCHY:
        return math.log(channel.scale[j] / channel.scale[i])
    return 0.0


def comparability_bounds(
    channel: ChannelModel, i: int, j: int, z_max: float = 50.0, points: int = 20001
) -> tuple[float, float, float, float]:
    """(inf, sup) of q(z|j)/q(z|i) over the line for a heavy-tailed channel,
    with the z attaining each (inf for a tail limit). 0-based i, j."""
    z = np.linspace(-z_max, z_max, points)
    lq = channel.log_densities(z)

    def lr(t):
        v = channel.log_densities(t)
        return float(v[j] - v[i])

    r = lq[:, j] - lq[:, i]
    dz = z[1] - z[0]
    res = []
    for sign in (1.0, -1.0):
        k = int(np.argmax(sign * r))
        opt = optimize.minimize_scalar(
            lambda t: -sign * lr(t), bounds=(z[k] - dz, z[k] + dz), method="bounded", options={"xatol": 1e-12}
        )
        best_z, best = float(opt.x), lr(opt.x)
        if sign * best < sign * r[k]:
            best_z, best = float(z[k]), float(r[k])
        tail = _tail_log_ratio(channel, i, j)
        if sign * tail > sign * best:
            best_z, best = math.inf, tail
        res.append((best, best_z))
    (hi, z_hi), (lo, z_lo) = res
    return math.exp(lo), math.exp(hi), z_lo, z_hi


def _gaussian_divergence_witness(channel: ChannelModel, i: int, j: int, z_start: float, target: float = 30.0):
    """Walk outward until |log q_j/q_i| exceeds ``target``."""
    z = max(z_start, 1.0)
    for _ in range(200):
        for s in (z, -z):
            v = channel.log_densities(s)
            if abs(v[j] - v[i]) > target:
                return s, float(v[j] - v[i])
        z *= 1.5
    return None


def check_comparability(channel: ChannelModel, z_max: float = 50.0, points: int = 20001) -> ConditionReport:
    """Find C' <= q(z|j)/q(z|i) <= C'' over all pairs i, j and all real z."""
    l = channel.size
    if channel.kind is ChannelKind.GAUSSIAN:
        for i in range(l):
            for j in range(l):
                if channel.mu[i] != channel.mu[j] or channel.scale[i] != channel.scale[j]:
                    w = _gaussian_divergence_witness(channel, i, j, z_max)
                    return ConditionReport(
                        "comparable",
                        "violated",
                        {"C_lower": 0.0, "C_upper": math.inf},
                        {"i": i + 1, "j": j + 1, "z": w[0], "log_ratio": w[1]},
                    )
        return ConditionReport("comparable", "certified-on-grid", {"C_lower": 1.0, "C_upper": 1.0})
    lo, hi = math.inf, 0.0
    arg_lo = arg_hi = None
    for i in range(l):
        for j in range(l):
            if i == j:
                continue
            a, b, z_a, z_b = comparability_bounds(channel, i, j, z_max, points)
            if a < lo:
                lo, arg_lo = a, (i + 1, j + 1, z_a)
            if b > hi:
                hi, arg_hi = b, (i + 1, j + 1, z_b)
    if l == 1:
        lo = hi = 1.0
    verdict = "certified-on-grid" if 0 < lo and hi < math.inf else "violated"
    witness = {"argmin": arg_lo, "argmax": arg_hi}
    return ConditionReport("comparable", verdict, {"C_lower": lo, "C_upper": hi}, witness)


# --------------------------------------------------------------------------
# dominance by one component outside a compact set
# --------------------------------------------------------------------------


def _max_log_ratio(channels: Sequence[ChannelModel], I: int, z: NDArray) -> NDArray:
    best = np.full(z.shape, -np.inf)
    for ch in channels:
        lq = np.real(ch.log_densities(z))
        others = np.delete(lq, I, axis=-1)
        if others.shape[-1]:
            best = np.maximum(best, (others - lq[..., I : I + 1]).max(axis=-1))
    return best


def check_dominance(
    channel: ChannelModel,
    I: int,
    epsilon: float,
    search_bound: float = 1000.0,
    step: float = 1e-3,
    r2: float = 0.0,
    n_circle: int = 16,
) -> ConditionReport:
    """Smallest Z* with |q(z|j)/q(z|I)| <= epsilon for all j != I and |z| >= Z*.

    ``I`` is 1-based. With r2 > 0 the ratio is maximized over the sampled
    complex parameter ball as well.
    """
    k = I - 1
    channels = ball_channels(channel, r2, n_circle)
    log_eps = math.log(epsilon)
    grid = np.arange(0.0, search_bound + step / 2, step)

    def excess(zabs):
        z = np.array([zabs, -zabs])
        return float(_max_log_ratio(channels, k, z).max()) - log_eps

    m = np.maximum(_max_log_ratio(channels, k, grid), _max_log_ratio(channels, k, -grid)) - log_eps
    if m[-1] > 0:
        return ConditionReport(
            "dominant",
            "inconclusive",
            {"epsilon": epsilon, "search_bound": search_bound, "ratio_at_bound": math.exp(m[-1] + log_eps)},
        )
    bad = np.flatnonzero(m > 0)
    if bad.size == 0:
        z_star = 0.0
    else:
        a = grid[bad[-1]]
        z_star = float(optimize.brentq(excess, a, a + step, xtol=1e-13))
    return ConditionReport(
        "dominant", "certified-on-grid", {"epsilon": epsilon, "Z_star": z_star, "I": I, "r2": r2}
    )


# --------------------------------------------------------------------------
# real part dominating the imaginary part
# --------------------------------------------------------------------------


def check_real_domination(
    channel: ChannelModel,
    r2: float,
    delta: float,
    z_max: float = 50.0,
    z_points: int = 4001,
    n_circle: int = 16,
) -> ConditionReport:
    """Check |Im q| < delta |Re q| and |log(q^theta / q^theta0)| <= delta on the grid."""
    z = np.linspace(-z_max, z_max, z_points)
    lq0 = channel.log_densities(z)
    worst_i = worst_ii = 0.0
    wit_i = wit_ii = None
    for ch in ball_channels(channel, r2, n_circle):
        lq = ch.log_densities(z)
        if not np.all(np.isfinite(lq)):
            bad = np.argwhere(~np.isfinite(lq))[0]
            return ConditionReport(
                "real-dominated",
                "inconclusive",
                {"r2": r2, "delta": delta},
                {"z": float(z[bad[0]]), "y": int(bad[1]) + 1, "theta": ch.params.tolist(), "reason": "singular"},
            )
        phase = np.imag(lq)
        with np.errstate(divide="ignore"):
            im_over_re = np.where(np.cos(phase) > 0, np.abs(np.tan(phase)), np.inf)
        dev = np.abs(lq - lq0)
        a = np.unravel_index(np.argmax(im_over_re), im_over_re.shape)
        b = np.unravel_index(np.argmax(dev), dev.shape)
        if im_over_re[a] > worst_i:
            worst_i = float(im_over_re[a])
            wit_i = {"z": float(z[a[0]]), "y": int(a[1]) + 1, "theta": ch.params.tolist(), "part": "i"}
        if dev[b] > worst_ii:
            worst_ii = float(dev[b])
            wit_ii = {"z": float(z[b[0]]), "y": int(b[1]) + 1, "theta": ch.params.tolist(), "part": "ii"}
    margins = {"r2": r2, "delta": delta, "max_im_over_re": worst_i, "max_log_deviation": worst_ii}
    if worst_i >= delta:
        return ConditionReport("real-dominated", "violated", margins, wit_i)
    if worst_ii > delta:
        return ConditionReport("real-dominated", "violated", margins, wit_ii)
    return ConditionReport("real-dominated", "certified-on-grid", margins)


# --------------------------------------------------------------------------
# integrability of envelope densities
# --------------------------------------------------------------------------


def _stacked(channels: Sequence[ChannelModel]) -> ComplexChannelModel:
    """All ball samples as one channel with m * l components."""
    return ComplexChannelModel(
        channels[0].kind,
        np.concatenate([c.mu for c in channels]),
        np.concatenate([c.scale for c in channels]),
    )


def _plogq(lp, lq):
    """e^lp * lq with 0 * (-inf) read as 0."""
    with np.errstate(invalid="ignore", over="ignore"):
        v = np.exp(lp) * lq
    return np.where(np.isfinite(lp), v, 0.0)


def _line_integral_with_tails(f, center: float, core: float, max_u: float = 640.0, ratio_limit: float = 0.75):
    """Integrate f over the line: [c - R0, c + R0] directly, then the two tails
    in u = log|z - c| over doubling intervals [u_k, 2 u_k].

    Returns (value, increments, converged). For a tail decaying like
    1/(|z| log^2|z|) the increments halve; a 1/(|z| log|z|) tail gives
    constant increments, which flags divergence.
    """
    R0 = max(core, math.e)
    opts = dict(limit=400, epsabs=1e-14, epsrel=1e-10)
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        core_val = integrate.quad(f, center - R0, center + R0, points=[center], **opts)[0]

        def tail(u):
            e = math.exp(u)
            return (f(center + e) + f(center - e)) * e

        increments = []
        u = math.log(R0)
        total = core_val
        while 2 * u <= max_u:
            inc = integrate.quad(tail, u, 2 * u, **opts)[0]
            increments.append(inc)
            total += inc
            u *= 2
            if abs(inc) <= 1e-15 * max(1.0, abs(total)):
                return total, increments, True
    if len(increments) >= 3:
        r1 = abs(increments[-1]) / max(abs(increments[-2]), 1e-300)
        r2 = abs(increments[-2]) / max(abs(increments[-3]), 1e-300)
        converged = r1 < ratio_limit and r2 < ratio_limit
    else:
        converged = False
    return total, increments, converged


def check_integrability(
    channel: ChannelModel, r2: float, I: int | None = None, n_circle: int = 8
) -> ConditionReport:
    """Integrals of the ball envelopes: int q_sup, int q_sup log q_inf,
    int q_sup log q_sup, and for each j int sup_theta |q(.|j) log q(.|I)|.

    ``I`` (1-based) defaults to the component with the largest scale.
    """
    channels = ball_channels(channel, r2, n_circle)
    if I is None:
        I = int(np.argmax(np.real(channel.scale))) + 1
    center = float(np.mean(channel.mu))
    core = float(np.max(np.abs(channel.mu - center)) + 10 * np.max(channel.scale))

    stacked = _stacked(channels)
    m, l = len(channels), channel.size

    def lq(z):
        return stacked.log_densities(float(z)).reshape(m, l)

    def sup_inf(z):
        v = np.real(lq(z))
        return v.max(), v.min()

    def dii(j):
        def f(z):
            v = lq(z)
            return float(_plogq(np.real(v[:, j]), np.abs(v[:, I - 1])).max())

        return f

    integrands = {
        "c-iii:i": lambda z: float(np.exp(sup_inf(z)[0])),
        "c-iii:ii": lambda z: float(_plogq(*sup_inf(z))),
        "c-iii:iii": lambda z: float(_plogq(sup_inf(z)[0], sup_inf(z)[0])),
    }
    for j in range(channel.size):
        integrands[f"d-ii:j={j + 1}"] = dii(j)

    margins, failed = {}, None
    for name, f in integrands.items():
        val, incs, ok = _line_integral_with_tails(f, center, core)
        margins[name] = val
        if not ok and failed is None:
            failed = {"integral": name, "tail_increments": incs[-4:]}
    if failed:
        return ConditionReport("c-iii/d-ii", "violated", margins, failed)
    return ConditionReport("c-iii/d-ii", "certified-on-grid", margins)


def check_positivity(model: MarkovModel, channel: ChannelModel, z_max: float = 50.0) -> list[ConditionReport]:
    """Conditions (a) strictly positive chain and (b) positive channel densities."""
    a = ConditionReport("a", "certified-on-grid", {"min_transition": float(model.transition.min())})
    z = np.linspace(-z_max, z_max, 2001)
    lq = channel.log_densities(z)
    if np.all(np.isfinite(lq)):
        b = ConditionReport("b", "certified-on-grid", {"min_log_density": float(lq.min())})
    else:
        k = np.argwhere(~np.isfinite(lq))[0]
        b = ConditionReport("b", "violated", {}, {"z": float(z[k[0]]), "y": int(k[1]) + 1})
    return [a, b]


def check_equicontinuity(
    channel: ChannelModel, I: int, r2: float, z_max: float = 50.0, z_points: int = 2001, n_circle: int = 16
) -> ConditionReport:
    """Modulus-of-continuity proxy for theta -> q(z|j)/q(z|I), uniformly in z.

    Reports max_z |g_z(theta) - g_z(theta0)| over the sampled ball, divided by
    r2. There is no finite certificate for equicontinuity; this is a proxy.
    """
    z = np.linspace(-z_max, z_max, z_points)
    lq0 = channel.log_densities(z)
    g0 = np.exp(lq0 - lq0[:, I - 1 : I])
    worst = 0.0
    for ch in ball_channels(channel, r2, n_circle)[1:]:
        lq = ch.log_densities(z)
        g = np.exp(lq - lq[:, I - 1 : I])
        worst = max(worst, float(np.abs(g - g0).max()))
    modulus = worst / r2 if r2 > 0 else 0.0
    return ConditionReport("d-i", "certified-on-grid", {"r2": r2, "max_change": worst, "modulus": modulus})


# --------------------------------------------------------------------------
# parameter derivatives of H_n
# --------------------------------------------------------------------------


def parameter_vector(model: MarkovModel, channel: ChannelModel) -> NDArray:
    """(Pi entries row-major, mu_1..mu_l, scale_1..scale_l)."""
    return np.concatenate([model.transition.ravel(), channel.params])


def project_direction(direction: ArrayLike, l: int) -> NDArray:
    """Remove row means from the transition block so rows keep summing to 1."""
    d = np.array(direction, dtype=float)
    P = d[: l * l].reshape(l, l)
    P -= P.mean(axis=1, keepdims=True)
    d[: l * l] = P.ravel()
    return d


def random_directions(l: int, count: int, rng: np.random.Generator) -> list[NDArray]:
    out = []
    for _ in range(count):
        d = project_direction(rng.standard_normal(l * l + 2 * l), l)
        out.append(d / np.linalg.norm(d))
    return out


class WeightedEntropy:
    """H_n estimator on fixed paths drawn at theta0, continued to nearby theta.

    hat H(theta) = -(1/N) sum_k w_k(theta) log p^theta(z0 | past), with
    w_k = p^theta(z_{-n}^0) / p^theta0(z_{-n}^0). For fixed paths this is an
    analytic function of theta, so it may be evaluated at complex theta.
    """

    def __init__(self, model: MarkovModel, channel: ChannelModel, n: int, samples: int, rng_seed: int):
        self.model, self.channel, self.n = model, channel, n
        self.l = model.size
        rng = np.random.default_rng(rng_seed)
        _, self.z = sample_paths(model, channel, n + 1, samples, rng)
        self.theta0 = parameter_vector(model, channel)
        inc, _ = log_predictive_batch(model.transition, model.stationary, channel.log_densities(self.z))
        self.log_joint0 = inc.sum(axis=1)

    def terms(self, theta: ArrayLike) -> NDArray:
        """Per-path contributions; their mean is hat H(theta)."""
        theta = np.asarray(theta)
        l = self.l
        P = theta[: l * l].reshape(l, l)
        pi = stationary_vector(P)
        ch = self.channel.with_params(theta[l * l :])
        try:
            inc, _ = log_predictive_batch(P, pi, ch.log_densities(self.z))
        except SingularEvaluation as exc:
            raise SingularEvaluation(f"filter breakdown at theta={theta}: {exc}") from exc
        if not np.all(np.isfinite(inc)):
            k = int(np.argwhere(~np.isfinite(inc))[0, 0])
            raise SingularEvaluation(f"non-finite log density on path {k} at theta={theta}")
        w = np.exp(inc.sum(axis=1) - self.log_joint0)
        return -w * inc[:, -1]

    def __call__(self, theta: ArrayLike):
        t = self.terms(theta)
        if np.iscomplexobj(t):
            return complex(math.fsum(t.real) / t.size, math.fsum(t.imag) / t.size)
        return math.fsum(t) / t.size


@dataclass(frozen=True)
class DerivativeEstimate:
    direction: tuple[float, ...]
    complex_step: float
    central_difference: float
    h_cs: float
    h_fd: float
    gap: float
    std_error: float  # of the complex-step estimate
    coupled_std_error: float  # of the per-path difference between the two

    @property
    def tolerance(self) -> float:
        return max(1e-6, 3.0 * self.coupled_std_error)

    @property
    def agrees(self) -> bool:
        return self.gap <= self.tolerance


def derivative_scan(
    model: MarkovModel,
    channel: ChannelModel,
    directions: Sequence[ArrayLike],
    n: int,
    samples: int,
    h_cs: float = 1e-20,
    h_fd: float = 1e-5,
    rng_seed: int = 0,
) -> list[DerivativeEstimate]:
    """Directional derivatives of H_n by complex step and by central difference,
    both on the same sample paths."""
    est = WeightedEntropy(model, channel, n, samples, rng_seed)
    out = []
    for d in directions:
        d = project_direction(d, model.size)
        t0 = est.theta0
        cs_terms = est.terms(t0 + 1j * h_cs * d).imag / h_cs
        fd_terms = (est.terms(t0 + h_fd * d) - est.terms(t0 - h_fd * d)) / (2 * h_fd)
        N = cs_terms.size
        cs = math.fsum(cs_terms) / N
        fd = math.fsum(fd_terms) / N
        se = float(np.std(cs_terms, ddof=1) / math.sqrt(N))
        cse = float(np.std(cs_terms - fd_terms, ddof=1) / math.sqrt(N))
        out.append(DerivativeEstimate(tuple(d.tolist()), cs, fd, h_cs, h_fd, abs(cs - fd), se, cse))
    return out


def complex_step(f, x: float, h: float = 1e-20) -> float:
    """Im f(x + i h) / h for a function analytic near the real point x."""
    return float(np.imag(f(x + 1j * h)) / h)


# --------------------------------------------------------------------------
# equal-scale Gaussian example
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WindingReport:
    z: float
    r: float
    sigma: float
    winding: int | None
    total_angle: float
    samples: int
    min_modulus: float
    singular: bool


def log_phi(z: float, omega: NDArray, sigma: float) -> NDArray:
    """log Phi_z(1/omega) = log(sigma^-1/omega) + (z-1)^2 omega^2 - (z+1)^2 sigma^-2."""
    s = 1.0 / sigma
    return np.log(s / omega) + (z - 1.0) ** 2 * omega**2 - (z + 1.0) ** 2 * s * s


def _log1p_exp(L: NDArray) -> NDArray:
    """log(1 + e^L) without overflow (principal branch on each piece)."""
    big = np.real(L) > 0
    out = np.empty_like(L)
    out[big] = L[big] + np.log1p(np.exp(-L[big]))
    out[~big] = np.log1p(np.exp(L[~big]))
    return out


def winding_probe(
    sigma: float,
    r: float,
    z: float,
    alpha_samples: int = 512,
    margin: float = 1e-9,
    max_step: float = 0.25,
    max_points: int = 2_000_000,
) -> WindingReport:
    """Turns of 1 + Phi_z(1/omega) around 0 as omega = 1/sigma + r e^{i alpha}
    runs over alpha in [-pi/2, 3pi/2] (Phi_z^{-1} for z < 0).

    Sampling starts from ``alpha_samples`` equal steps and bisects any step
    whose first-order bound on the change of log(1 + Phi) exceeds ``max_step``,
    so consecutive principal-argument increments stay well below pi.
    """
    sign = 1.0 if z >= 0 else -1.0

    def L(alpha):
        omega = 1.0 / sigma + r * np.exp(1j * np.asarray(alpha, dtype=float))
        return sign * log_phi(z, omega, sigma)

    def gain(Lv):
        # |d log(1+Phi)| <= |Phi/(1+Phi)| |dL|
        return 1.0 / np.abs(1.0 + np.exp(-np.clip(np.real(Lv), -700, 700) - 1j * np.imag(Lv)))

    alphas = np.linspace(-np.pi / 2, 3 * np.pi / 2, alpha_samples + 1)
    while True:
        Lv = L(alphas)
        g = gain(Lv)
        dL = np.abs(np.diff(Lv))
        bound = dL * np.maximum(g[:-1], g[1:])
        refine = bound > max_step
        if not refine.any() or alphas.size > max_points:
            break
        mids = 0.5 * (alphas[:-1][refine] + alphas[1:][refine])
        alphas = np.sort(np.concatenate([alphas, mids]))
    w = _log1p_exp(Lv)
    # |1 + Phi| = exp(Re log(1+Phi))
    min_mod = float(np.exp(np.real(w).min()))
    steps = np.angle(np.exp(1j * np.diff(np.imag(w))))
    total = float(steps.sum())
    singular = bool(min_mod < margin or refine.any())
    k = None if singular else int(round(total / (2 * np.pi)))
    return WindingReport(z, r, sigma, k, total, int(alphas.size), min_mod, singular)


@dataclass(frozen=True, eq=False)
class NonAnalyticityTable:
    sigma: float
    sigma2: NDArray[np.float64]
    entropy: NDArray[np.float64]
    divided: tuple[NDArray[np.float64], ...]  # divided[k-1][i] = f[x_i, ..., x_{i+k}]

    def rows(self):
        for i, s2 in enumerate(self.sigma2):
            yield (s2, self.entropy[i]) + tuple(
                d[i] if i < d.size else None for d in self.divided
            )


def equal_prior_entropy(sigma1: float, sigma2: float, **kw) -> float:
    """H(Z) for Z = Y-dependent Gaussian, P(Y=1)=P(Y=2)=1/2, means -1 and +1."""
    ch = ChannelModel.gaussian([-1.0, 1.0], [sigma1, sigma2])
    return mixture_entropy(ch, [0.5, 0.5], **kw)


def divided_differences(x: NDArray, f: NDArray, max_order: int) -> tuple[NDArray, ...]:
    out = []
    cur = np.asarray(f, dtype=float)
    for k in range(1, max_order + 1):
        cur = (cur[1:] - cur[:-1]) / (x[k:] - x[:-k])
        out.append(cur)
    return tuple(out)


def nonanalyticity_scan(
    sigma: float, width: float = 0.2, points: int = 21, max_order: int = 6, center: float | None = None
) -> NonAnalyticityTable:
    """H(Z) on sigma2 in c * [1 - width, 1 + width] (c = sigma by default),
    with divided differences up to ``max_order``."""
    c = sigma if center is None else center
    s2 = c * np.linspace(1 - width, 1 + width, points)
    h = np.array([equal_prior_entropy(sigma, v, epsabs=1e-14, epsrel=1e-13) for v in s2])
    return NonAnalyticityTable(sigma, s2, h, divided_differences(s2, h, max_order))
