"""The observation-driven filter on the simplex.

For an observation z the l x l matrix Pi(z) has entries pi_ij q(z|j), and the
filter state (the conditional law of the current input given past outputs)
moves by the projective map x -> x Pi(z) / (x Pi(z) 1). Normalizers are
accumulated in log space; each Pi(z) is rescaled by its largest column factor
first, which is projectively exact and keeps far-tail observations finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .hilbert import birkhoff_coefficient
from .model import (
    ChannelModel,
    ComplexChannelModel,
    ComplexMarkovModel,
    MarkovModel,
    ModelError,
    SingularEvaluation,
    in_right_half_plane,
)

# |normalizer| below this (relative to the scale of x Pi) counts as singular
SINGULAR_RTOL = 1e-12


def _check_dims(model, channel):
    if model.size != channel.size:
        raise ModelError(f"channel has {channel.size} components for a {model.size}-state chain")


def observation_matrix(model: MarkovModel | ComplexMarkovModel, channel: ChannelModel, z: float) -> NDArray:
    """Pi(z)_ij = pi_ij q(z|j)."""
    _check_dims(model, channel)
    return model.transition * channel.densities(z)[None, :]


def _scaled_step(x: NDArray, P: NDArray, logq: NDArray):
    """One filter step on a batch; returns (new states, log normalizers).

    ``x`` has shape (..., l) and ``logq`` the matching per-state log densities.
    """
    shift = np.max(np.real(logq), axis=-1, keepdims=True)
    if not np.all(np.isfinite(shift)):
        raise SingularEvaluation("observation density is zero or non-finite under every state")
    u = (x @ P) * np.exp(logq - shift)
    s = u.sum(axis=-1, keepdims=True)
    if np.iscomplexobj(u):
        scale = np.abs(u).sum(axis=-1, keepdims=True)
        if np.any(np.abs(s) <= SINGULAR_RTOL * scale):
            raise SingularEvaluation("complex filter normalizer vanishes")
    return u / s, (np.log(s) + shift)[..., 0]


def log_predictive_batch(
    transition: NDArray, initial: NDArray, logq: NDArray
) -> tuple[NDArray, NDArray]:
    """Run the filter over a batch of observation sequences.

    ``logq`` has shape (N, T, l): log q(z_t|j) for each sequence and step.
    Returns the per-step conditional log-densities log p(z_t | z_0..z_{t-1})
    with shape (N, T), and the final filter states (N, l). Works unchanged for
    complex transition matrices and log-densities; complex logs are summed
    step by step on the principal branch.
    """
    N, T, l = logq.shape
    dtype = np.result_type(transition, initial, logq)
    x = np.broadcast_to(np.asarray(initial, dtype=dtype), (N, l))
    out = np.empty((N, T), dtype=dtype)
    for t in range(T):
        x, out[:, t] = _scaled_step(x, transition, logq[:, t, :])
    return out, x


def filter_step(x: ArrayLike, model, channel: ChannelModel, z: float) -> NDArray:
    """x_{i+1} = f_z(x_i), computed as induced_map(Pi(z), x) with rescaling."""
    _check_dims(model, channel)
    x = np.asarray(getattr(x, "weights", x))
    try:
        new, _ = _scaled_step(x, model.transition, channel.log_densities(z))
    except SingularEvaluation as exc:
        raise SingularEvaluation(f"filter normalizer vanishes at z={z}", z) from exc
    return new


@dataclass(frozen=True, eq=False)
class FilterTrajectory:
    """States x_{-n-1}, ..., x_{-1} and the log-density of the observations.

    ``states[0]`` is the initial state; ``states[k]`` has absorbed the first k
    observations. ``log_joint`` is log p(observations).
    """

    states: NDArray
    log_joint: complex | float
    increments: NDArray
    model: MarkovModel | ComplexMarkovModel = field(repr=False)
    channel: ChannelModel = field(repr=False)

    def log_predictive(self, z0: float) -> complex | float:
        """log p(z_0 | observations) = log(x_{-1} Pi(z_0) 1)."""
        logq = self.channel.log_densities(z0)
        shift = np.max(np.real(logq))
        s = (self.states[-1] @ self.model.transition) @ np.exp(logq - shift)
        return np.log(s) + shift

    def predictive(self, z0: float) -> complex | float:
        return np.exp(self.log_predictive(z0))


def run_filter(
    model,
    channel: ChannelModel,
    observations: Sequence[float],
    initial: ArrayLike | None = None,
) -> FilterTrajectory:
    """Filter ``observations`` starting from ``initial`` (the stationary vector by default).

    An empty observation list is allowed and leaves the initial state alone.
    """
    _check_dims(model, channel)
    z = np.asarray(observations, dtype=float).reshape(-1)
    x0 = model.stationary if initial is None else np.asarray(getattr(initial, "weights", initial))
    dtype = np.result_type(model.transition, x0, channel.mu, channel.scale)
    states = np.empty((z.size + 1, model.size), dtype=dtype)
    incs = np.empty(z.size, dtype=dtype)
    states[0] = x0
    logq = channel.log_densities(z)
    for i in range(z.size):
        try:
            states[i + 1], incs[i] = _scaled_step(states[i], model.transition, logq[i])
        except SingularEvaluation as exc:
            raise SingularEvaluation(f"filter normalizer vanishes at z={z[i]}", float(z[i])) from exc
    log_joint = incs.sum() if incs.size else dtype.type(0)
    return FilterTrajectory(states, log_joint, incs, model, channel)


def forgetting_curve(
    model: MarkovModel,
    channel: ChannelModel,
    observations: Sequence[float],
    initial_a: ArrayLike,
    initial_b: ArrayLike,
) -> list[tuple[int, float]]:
    """Euclidean gaps |x_i^a - x_i^b| after each observation, i = 1..n."""
    a = run_filter(model, channel, observations, initial_a).states
    b = run_filter(model, channel, observations, initial_b).states
    gaps = np.linalg.norm(a - b, axis=1)
    return [(i, float(gaps[i])) for i in range(1, len(gaps))]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    points: int


def fit_log_gap(curve: Sequence[tuple[int, float]], floor: float = 1e-13, start: int = 1) -> SlopeFit:
    """Least-squares line through log(gap) for steps >= ``start`` with gap above ``floor``.

    Fitting stops at the first gap that reaches the floor.
    """
    pts = []
    for i, g in curve:
        if i < start:
            continue
        if g <= floor:
            break
        pts.append((i, np.log(g)))
    if len(pts) < 2:
        return SlopeFit(float("-inf"), float("nan"), float("nan"), len(pts))
    x, y = np.array(pts).T
    return _linear_fit(x, y)


def _linear_fit(x: NDArray, y: NDArray) -> SlopeFit:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(intercept), float(r2), len(x))


def forgetting_bound(model: MarkovModel, block: int = 1) -> float:
    """log tau(Pi^block) / block: the per-step Hilbert contraction rate of the filter."""
    P = np.linalg.matrix_power(model.transition, block)
    tau = birkhoff_coefficient(P)
    return float(np.log(tau) / block) if tau > 0 else float("-inf")


# --------------------------------------------------------------------------
# reblocking
# --------------------------------------------------------------------------

BlockTag = Literal["uniform", "type_I", "type_II", "remainder"]


class SchemeError(ModelError):
    """Malformed reblocking scheme."""


@dataclass(frozen=True)
class ReblockingScheme:
    """Consecutive half-open blocks [start, stop) partitioning a window of ``length`` steps."""

    length: int
    blocks: tuple[tuple[int, int], ...]
    tags: tuple[BlockTag, ...]
    sigma_bound: float | None = None
    n0: int | None = None

    def __post_init__(self):
        if len(self.blocks) != len(self.tags):
            raise SchemeError("one tag per block required")
        pos = 0
        for (a, b), tag in zip(self.blocks, self.tags):
            if a != pos or b <= a:
                raise SchemeError(f"block [{a}, {b}) does not continue at position {pos}")
            pos = b
        if pos != self.length:
            raise SchemeError(f"blocks cover {pos} of {self.length} steps")
        for k, tag in enumerate(self.tags):
            if tag == "remainder" and k != len(self.tags) - 1:
                raise SchemeError("only the last block may be a remainder")

    def validate(self, observations: Sequence[float]) -> None:
        """Check block types against the observations they cover."""
        z = np.asarray(observations, dtype=float)
        if z.size != self.length:
            raise SchemeError(f"scheme covers {self.length} steps, got {z.size} observations")
        for (a, b), tag in zip(self.blocks, self.tags):
            if tag == "uniform" and self.n0 is not None and b - a != self.n0:
                raise SchemeError(f"uniform block [{a}, {b}) is not of length {self.n0}")
            if tag in ("type_I", "type_II"):
                if self.sigma_bound is None or self.n0 is None:
                    raise SchemeError("dichotomy blocks need sigma_bound and n0")
                inside = abs(z[a]) <= self.sigma_bound
                if tag == "type_I" and (b - a != 1 or inside):
                    raise SchemeError(f"type I block [{a}, {b}) must be one observation outside the compact set")
                if tag == "type_II" and (not inside or (b - 1) - a < self.n0):
                    raise SchemeError(f"type II block [{a}, {b}) must start inside the compact set and span > n0 steps")

    def split(self, observations: Sequence[float]) -> list[NDArray]:
        z = np.asarray(observations, dtype=float)
        return [z[a:b] for a, b in self.blocks]


def uniform_scheme(length: int, n0: int) -> ReblockingScheme:
    """Blocks of exactly ``n0`` steps; a shorter final block is tagged remainder."""
    if n0 < 1:
        raise SchemeError("block length must be positive")
    blocks, tags = [], []
    for a in range(0, length, n0):
        b = min(a + n0, length)
        blocks.append((a, b))
        tags.append("uniform" if b - a == n0 else "remainder")
    return ReblockingScheme(length, tuple(blocks), tuple(tags), n0=n0)


def dichotomy_scheme(observations: Sequence[float], sigma_bound: float, n0: int) -> ReblockingScheme:
    """Greedy split into single steps outside [-sigma_bound, sigma_bound] (type I)
    and runs of n0 + 1 steps opening inside it (type II).

    A type II block that would overrun the window becomes the remainder.
    """
    z = np.asarray(observations, dtype=float)
    blocks, tags = [], []
    a = 0
    while a < z.size:
        if abs(z[a]) > sigma_bound:
            blocks.append((a, a + 1))
            tags.append("type_I")
            a += 1
        elif a + n0 + 1 <= z.size:
            blocks.append((a, a + n0 + 1))
            tags.append("type_II")
            a += n0 + 1
        else:
            blocks.append((a, z.size))
            tags.append("remainder")
            a = z.size
    return ReblockingScheme(z.size, tuple(blocks), tuple(tags), sigma_bound=sigma_bound, n0=n0)


def reblock(observations: Sequence[float], scheme: ReblockingScheme) -> list[NDArray]:
    scheme.validate(observations)
    return scheme.split(observations)


def filter_block(x: ArrayLike, model, channel: ChannelModel, block: Sequence[float]) -> NDArray:
    """Composed map f_{z_k} o ... o f_{z_j}, applied as one projective matrix product."""
    _check_dims(model, channel)
    x = np.asarray(getattr(x, "weights", x))
    prod = np.eye(model.size, dtype=np.result_type(model.transition, channel.mu, channel.scale))
    for lq in channel.log_densities(np.asarray(block, dtype=float)):
        prod = prod @ (model.transition * np.exp(lq - np.max(np.real(lq)))[None, :])
        prod /= np.abs(prod).max()
    u = x @ prod
    s = u.sum()
    if np.iscomplexobj(u) and abs(s) <= SINGULAR_RTOL * np.abs(u).sum():
        raise SingularEvaluation("block normalizer vanishes")
    return u / s


def run_blocked(model, channel: ChannelModel, observations: Sequence[float], scheme: ReblockingScheme, initial=None):
    """Final filter state after applying the blocks of ``scheme`` in order."""
    x = model.stationary if initial is None else np.asarray(getattr(initial, "weights", initial))
    for block in reblock(observations, scheme):
        x = filter_block(x, model, channel, block)
    return x


# --------------------------------------------------------------------------
# complexified orbits
# --------------------------------------------------------------------------


def project_to_simplex(v: NDArray[np.float64]) -> NDArray[np.float64]:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def distance_to_simplex(x: NDArray) -> float:
    """Euclidean distance from a complex vector to the real simplex W."""
    x = np.asarray(x, dtype=complex)
    re = x.real
    return float(np.hypot(np.linalg.norm(x.imag), np.linalg.norm(re - project_to_simplex(re))))


@dataclass(frozen=True, eq=False)
class OrbitReport:
    distances: NDArray[np.float64]
    right_half_plane: NDArray[np.bool_]
    singular_steps: tuple[int, ...]
    hilbert_gaps: NDArray[np.float64] | None = None

    @property
    def max_distance(self) -> float:
        return float(np.nanmax(self.distances)) if self.distances.size else 0.0

    @property
    def all_in_right_half_plane(self) -> bool:
        return bool(np.all(self.right_half_plane))

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(~self.right_half_plane))


def complex_orbit_probe(
    model_c: ComplexMarkovModel,
    channel_c: ChannelModel,
    observations: Sequence[float],
    metric: Literal["euclidean", "complex_hilbert"] = "euclidean",
    reference: tuple[MarkovModel, ChannelModel] | None = None,
) -> OrbitReport:
    """Empirical statistics of a complexified filter orbit.

    Per step: Euclidean distance of x_i to W and right-half-plane membership.
    A singular step is recorded and skipped (the state is carried over). With
    ``metric="complex_hilbert"`` and a real ``reference`` (model, channel), the
    complex Hilbert distance between the complex and real orbits is recorded
    too (NaN where undefined).
    """
    from .hilbert import complex_hilbert_distance

    _check_dims(model_c, channel_c)
    z = np.asarray(observations, dtype=float)
    x = np.asarray(model_c.stationary, dtype=complex)
    if reference is not None:
        xr = reference[0].stationary.astype(float)
    dist = np.empty(z.size)
    rhp = np.empty(z.size, dtype=bool)
    gaps = np.full(z.size, np.nan) if metric == "complex_hilbert" else None
    singular = []
    logq = channel_c.log_densities(z)
    logq_r = reference[1].log_densities(z) if reference is not None else None
    for i in range(z.size):
        try:
            x, _ = _scaled_step(x, model_c.transition, logq[i])
        except SingularEvaluation:
            singular.append(i)
        if not np.all(np.isfinite(x)):
            raise SingularEvaluation(f"complex orbit diverged at step {i}", float(z[i]))
        dist[i] = distance_to_simplex(x)
        rhp[i] = in_right_half_plane(x)
        if reference is not None:
            xr, _ = _scaled_step(xr, reference[0].transition, logq_r[i])
            if gaps is not None and rhp[i]:
                gaps[i] = complex_hilbert_distance(xr.astype(complex), x)
    return OrbitReport(dist, rhp, tuple(singular), gaps)
