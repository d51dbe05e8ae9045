"""Input Markov chains, memoryless output channels, and trajectory sampling.

States are numbered 1..l at the public surface (``density``, ``Trajectory``);
arrays indexed by state are 0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

ROW_SUM_TOL = 1e-12
SIMPLEX_TOL = 1e-12
STATIONARY_TOL = 1e-10
SLOW_TAIL_CLIP = 1e300

LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
LOG_PI = np.log(np.pi)


class ModelError(ValueError):
    """Raised for malformed chains, channels, or simplex vectors."""


class SingularEvaluation(ArithmeticError):
    """A complexified quantity hit a zero denominator or normalizer."""

    def __init__(self, message: str, z: float | None = None):
        super().__init__(message)
        self.z = z


# --------------------------------------------------------------------------
# simplex vectors
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SimplexVector:
    weights: NDArray[np.float64]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ModelError(f"simplex vector must be 1-D and nonempty, got shape {w.shape}")
        if np.any(w < 0):
            raise ModelError(f"negative weight in simplex vector: {w}")
        if abs(w.sum() - 1.0) > SIMPLEX_TOL:
            raise ModelError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.size

    @property
    def interior(self) -> bool:
        return bool(np.all(self.weights > 0))


@dataclass(frozen=True, eq=False)
class ComplexSimplexVector:
    weights: NDArray[np.complex128]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        if w.ndim != 1 or w.size == 0:
            raise ModelError(f"simplex vector must be 1-D and nonempty, got shape {w.shape}")
        if abs(w.sum() - 1.0) > SIMPLEX_TOL:
            raise ModelError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.size

    @property
    def in_right_half_plane(self) -> bool:
        """Membership in the set where every ratio w_i/w_j has positive real part."""
        return in_right_half_plane(self.weights)


def in_right_half_plane(w: ArrayLike) -> bool:
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        return False
    ratios = w[:, None] / w[None, :]
    return bool(np.all(ratios.real > 0))


# --------------------------------------------------------------------------
# Markov chains
# --------------------------------------------------------------------------


def _check_rows(matrix: NDArray) -> None:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ModelError(f"transition matrix must be square, got shape {matrix.shape}")
    bad = np.abs(matrix.sum(axis=1) - 1.0) > ROW_SUM_TOL
    if np.any(bad):
        raise ModelError(f"rows {np.flatnonzero(bad) + 1} of the transition matrix do not sum to 1")


def stationary_vector(transition: ArrayLike) -> NDArray:
    """Solve pi Pi = pi, sum(pi) = 1 by a dense linear solve.

    Real inputs must be strictly positive and row-stochastic. Complex
    matrices (rows summing to 1) are accepted and give the analytic
    continuation of the stationary vector.
    """
    P = np.asarray(transition)
    is_complex = np.iscomplexobj(P)
    P = P.astype(complex if is_complex else float)
    _check_rows(P)
    if not is_complex and np.any(P <= 0):
        raise ModelError("transition matrix must be strictly positive")
    l = P.shape[0]
    A = P.T - np.eye(l)
    A[-1, :] = 1.0
    b = np.zeros(l, dtype=P.dtype)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularEvaluation("stationary equations are singular") from exc
    if not is_complex:
        # roundoff can leave ~1e-17 negatives for nearly reducible chains
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
    return pi


@dataclass(frozen=True, eq=False)
class MarkovModel:
    """Stationary first-order chain with a strictly positive transition matrix."""

    transition: NDArray[np.float64]
    stationary: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self):
        P = np.array(self.transition, dtype=float)
        _check_rows(P)
        if np.any(P <= 0):
            raise ModelError("transition matrix must be strictly positive")
        P.setflags(write=False)
        pi = stationary_vector(P)
        pi.setflags(write=False)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "stationary", pi)

    @property
    def size(self) -> int:
        return self.transition.shape[0]

    @property
    def strictly_positive(self) -> bool:
        return bool(self.transition.min() > 0)

    @classmethod
    def iid(cls, probabilities: Sequence[float]) -> "MarkovModel":
        """Chain whose rows all equal ``probabilities`` (an i.i.d. input)."""
        p = np.asarray(probabilities, dtype=float)
        return cls(np.tile(p, (p.size, 1)))


@dataclass(frozen=True, eq=False)
class ComplexMarkovModel:
    """Complex matrix with unit row sums; stationary vector by analytic continuation."""

    transition: NDArray[np.complex128]
    stationary: NDArray[np.complex128] = field(init=False, repr=False)

    def __post_init__(self):
        P = np.array(self.transition, dtype=complex)
        _check_rows(P)
        P.setflags(write=False)
        pi = stationary_vector(P)
        pi.setflags(write=False)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "stationary", pi)

    @property
    def size(self) -> int:
        return self.transition.shape[0]

    @classmethod
    def from_real(cls, model: MarkovModel) -> "ComplexMarkovModel":
        return cls(model.transition.astype(complex))


def perturb_transition(transition: ArrayLike, size: float, seed: int) -> NDArray[np.complex128]:
    """Add a random complex perturbation with zero row sums and Frobenius norm ``size``."""
    P = np.asarray(transition, dtype=complex)
    rng = np.random.default_rng(seed)
    E = rng.standard_normal(P.shape) + 1j * rng.standard_normal(P.shape)
    E -= E.mean(axis=1, keepdims=True)
    norm = np.linalg.norm(E)
    if norm == 0:
        return P.copy()
    return P + size * E / norm


# --------------------------------------------------------------------------
# channels
# --------------------------------------------------------------------------


class ChannelKind(str, Enum):
    GAUSSIAN = "gaussian"
    CAUCHY = "cauchy"
    # heavy-tailed stress case, density 1/(2s (e+|w|) log^2(e+|w|)), w=(z-mu)/s
    SLOW_TAIL = "slow_tail"


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """Memoryless channel: one location/scale density per input symbol.

    ``scale`` is sigma for Gaussian and gamma for Cauchy components.
    """

    kind: ChannelKind
    mu: NDArray[np.float64]
    scale: NDArray[np.float64]

    _dtype = float

    def __post_init__(self):
        kind = ChannelKind(self.kind)
        mu = np.array(self.mu, dtype=self._dtype).reshape(-1)
        scale = np.array(self.scale, dtype=self._dtype).reshape(-1)
        if mu.shape != scale.shape or mu.size == 0:
            raise ModelError(f"mu and scale must have the same nonzero length, got {mu.size} and {scale.size}")
        self._validate(scale)
        mu.setflags(write=False)
        scale.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "scale", scale)

    def _validate(self, scale):
        if np.any(~np.isfinite(scale)) or np.any(scale <= 0):
            raise ModelError(f"channel scales must be positive, got {scale}")

    @property
    def size(self) -> int:
        return self.mu.size

    @classmethod
    def gaussian(cls, mu: Sequence[float], sigma: Sequence[float]):
        return cls(ChannelKind.GAUSSIAN, mu, sigma)

    @classmethod
    def cauchy(cls, mu: Sequence[float], gamma: Sequence[float]):
        return cls(ChannelKind.CAUCHY, mu, gamma)

    @property
    def params(self) -> NDArray:
        """Parameter vector (mu_1..mu_l, scale_1..scale_l)."""
        return np.concatenate([self.mu, self.scale])

    def with_params(self, params: ArrayLike) -> "ChannelModel":
        """Same family at a new parameter vector; complex values give a ComplexChannelModel."""
        p = np.asarray(params)
        l = self.size
        if np.iscomplexobj(p):
            return ComplexChannelModel(self.kind, p[:l], p[l:])
        return ChannelModel(self.kind, p[:l], p[l:])

    def log_densities(self, z: ArrayLike) -> NDArray:
        """log q(z|y) for every state; output shape ``z.shape + (l,)``.

        Complex parameters use the principal branch of each log factor, which is
        the analytic continuation from positive real scales.
        """
        z = np.asarray(z, dtype=float)[..., None]
        mu, s = self.mu, self.scale
        w = z - mu
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.kind is ChannelKind.GAUSSIAN:
                return -LOG_SQRT_2PI - np.log(s) - w * w / (2.0 * s * s)
            if self.kind is ChannelKind.CAUCHY:
                return np.log(s) - LOG_PI - np.log(w * w + s * s)
            u = w / s
            # |u| continued analytically from the real axis: sign(Re u) * u
            a = np.where(np.real(u) >= 0, u, -u) + np.e
            return -np.log(2.0 * s) - np.log(a) - 2.0 * np.log(np.log(a))

    def densities(self, z: ArrayLike) -> NDArray:
        return np.exp(self.log_densities(z))

    def sample(self, states: NDArray[np.intp], rng: np.random.Generator) -> NDArray[np.float64]:
        """Draw one output per entry of ``states`` (0-based)."""
        mu = self.mu[states]
        s = self.scale[states]
        if self.kind is ChannelKind.GAUSSIAN:
            return mu + s * rng.standard_normal(states.shape)
        if self.kind is ChannelKind.CAUCHY:
            return mu + s * rng.standard_cauchy(states.shape)
        # inverse CDF: P(|W| > t) = 1/log(e+t)
        # P(|W| > 1e300) is about 1/691; those draws are clipped to stay finite
        u = rng.random(states.shape)
        with np.errstate(over="ignore"):
            t = np.minimum(np.exp(1.0 / u) - np.e, SLOW_TAIL_CLIP)
        sign = np.where(rng.random(states.shape) < 0.5, -1.0, 1.0)
        return mu + s * sign * t


@dataclass(frozen=True, eq=False)
class ComplexChannelModel(ChannelModel):
    """Channel family evaluated at complex (mu, scale)."""

    _dtype = complex

    def _validate(self, scale):
        if np.any(~np.isfinite(scale)):
            raise ModelError(f"channel scales must be finite, got {scale}")

    @classmethod
    def from_real(cls, channel: ChannelModel) -> "ComplexChannelModel":
        return cls(channel.kind, channel.mu, channel.scale)

    def sample(self, states, rng):
        raise TypeError("cannot sample from a complexified channel")


def _symbol_index(channel: ChannelModel, y: int) -> int:
    if not 1 <= y <= channel.size:
        raise ModelError(f"symbol {y} outside alphabet 1..{channel.size}")
    return y - 1


def density(channel: ChannelModel, z: float, y: int) -> float:
    """q(z|y) for a real channel; ``y`` is 1-based."""
    if isinstance(channel, ComplexChannelModel):
        raise TypeError("use density_complex for complexified channels")
    return float(np.exp(channel.log_densities(z)[_symbol_index(channel, y)]))


def density_complex(channel: ChannelModel, z: float, y: int) -> complex:
    """Complexified q(z|y), evaluated from the closed-form density (not via exp/log)."""
    k = _symbol_index(channel, y)
    mu = complex(channel.mu[k])
    s = complex(channel.scale[k])
    w = z - mu
    if channel.kind is ChannelKind.GAUSSIAN:
        if s == 0:
            raise SingularEvaluation("Gaussian scale is zero", z)
        return 1.0 / (np.sqrt(2.0 * np.pi) * s) * np.exp(-w * w / (2.0 * s * s))
    if channel.kind is ChannelKind.CAUCHY:
        den = w * w + s * s
        if den == 0:
            raise SingularEvaluation(f"Cauchy denominator (z-mu)^2+gamma^2 vanishes at z={z}", z)
        return s / (np.pi * den)
    if s == 0:
        raise SingularEvaluation("scale is zero", z)
    return complex(np.exp(channel.log_densities(z)[k]))


# --------------------------------------------------------------------------
# trajectories
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Joint sample path; ``inputs`` are 1-based symbols."""

    inputs: NDArray[np.intp]
    outputs: NDArray[np.float64]

    def __post_init__(self):
        if len(self.inputs) != len(self.outputs):
            raise ModelError("inputs and outputs must have equal length")
        if len(self.inputs) and np.min(self.inputs) < 1:
            raise ModelError("input symbols are 1-based")


def sample_states(model: MarkovModel, length: int, count: int, rng: np.random.Generator) -> NDArray[np.intp]:
    """``count`` stationary state paths of ``length`` steps, 0-based, shape (count, length)."""
    cum = np.cumsum(model.transition, axis=1)
    cum[:, -1] = 1.0
    pi_cum = np.cumsum(model.stationary)
    pi_cum[-1] = 1.0
    u = rng.random((count, length))
    states = np.empty((count, length), dtype=np.intp)
    states[:, 0] = np.searchsorted(pi_cum, u[:, 0], side="right")
    for t in range(1, length):
        rows = cum[states[:, t - 1]]
        states[:, t] = (u[:, t, None] >= rows).sum(axis=1)
    return states


def sample_paths(
    model: MarkovModel, channel: ChannelModel, length: int, count: int, rng: np.random.Generator
) -> tuple[NDArray[np.intp], NDArray[np.float64]]:
    """Batch sampler: (states 0-based, outputs), both shape (count, length)."""
    if channel.size != model.size:
        raise ModelError(f"channel has {channel.size} components for a {model.size}-state chain")
    states = sample_states(model, length, count, rng)
    return states, channel.sample(states, rng)


def sample_trajectory(model: MarkovModel, channel: ChannelModel, length: int, rng_seed: int) -> Trajectory:
    if length < 1:
        raise ModelError("trajectory length must be at least 1")
    rng = np.random.default_rng(rng_seed)
    states, z = sample_paths(model, channel, length, 1, rng)
    return Trajectory(states[0] + 1, z[0])
