"""Hilbert projective metrics, induced projective maps and Birkhoff coefficients."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .model import ModelError, SingularEvaluation, in_right_half_plane

log = logging.getLogger(__name__)

# O(l^4) enumeration in birkhoff_coefficient
MAX_BIRKHOFF_SIZE = 16


class MetricDomainError(ModelError):
    """Argument lies outside the domain of a Hilbert metric."""


def _as_interior(v: ArrayLike, name: str) -> NDArray[np.float64]:
    v = np.asarray(getattr(v, "weights", v), dtype=float)
    if v.ndim != 1:
        raise MetricDomainError(f"{name} must be a vector")
    if np.any(v <= 0):
        raise MetricDomainError(f"{name} has a non-positive coordinate: {v}")
    return v


def hilbert_distance(v: ArrayLike, w: ArrayLike) -> float:
    """max_{i,j} log((w_i/w_j)/(v_i/v_j)) for interior vectors.

    Only coordinate ratios matter, so unnormalized positive vectors are fine.
    """
    v = _as_interior(v, "v")
    w = _as_interior(w, "w")
    if v.shape != w.shape:
        raise MetricDomainError("vectors differ in length")
    r = np.log(w) - np.log(v)
    return float(r.max() - r.min())


def complex_hilbert_distance(v: ArrayLike, w: ArrayLike) -> float:
    """max_{i,j} |Log((w_i/w_j)/(v_i/v_j))| with the principal Log.

    Both arguments must have every pairwise ratio in the open right half-plane.
    """
    v = np.asarray(getattr(v, "weights", v), dtype=complex)
    w = np.asarray(getattr(w, "weights", w), dtype=complex)
    if v.shape != w.shape:
        raise MetricDomainError("vectors differ in length")
    for name, x in (("v", v), ("w", w)):
        if not in_right_half_plane(x):
            raise MetricDomainError(f"{name} is outside the right-half-plane domain: {x}")
    q = (w[:, None] / w[None, :]) / (v[:, None] / v[None, :])
    return float(np.abs(np.log(q)).max())


def induced_map(T: ArrayLike, w: ArrayLike) -> NDArray:
    """f_T(w) = wT / (wT 1)."""
    T = np.asarray(T)
    w = np.asarray(getattr(w, "weights", w))
    u = w @ T
    s = u.sum()
    if np.iscomplexobj(u):
        if abs(s) <= 1e-300 or not np.isfinite(s):
            raise SingularEvaluation(f"normalizer wT1 = {s} vanishes")
    elif not s > 0:
        raise SingularEvaluation(f"normalizer wT1 = {s} is not positive")
    return u / s


def birkhoff_phi(T: ArrayLike) -> float:
    """min over (i,j,k,m) of t_ik t_jm / (t_jk t_im), by exhaustive enumeration."""
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise MetricDomainError(f"expected a square matrix, got shape {T.shape}")
    if np.any(T <= 0):
        raise MetricDomainError("Birkhoff coefficient needs a strictly positive matrix")
    if T.shape[0] > MAX_BIRKHOFF_SIZE:
        raise MetricDomainError(f"enumeration limited to l <= {MAX_BIRKHOFF_SIZE}")
    # axes (i, j, k, m)
    num = T[:, None, :, None] * T[None, :, None, :]
    den = T[None, :, :, None] * T[:, None, None, :]
    return float((num / den).min())


def birkhoff_coefficient(T: ArrayLike) -> float:
    """tau(T) = (1 - sqrt(phi)) / (1 + sqrt(phi))."""
    r = np.sqrt(birkhoff_phi(T))
    return float((1.0 - r) / (1.0 + r))


@dataclass(frozen=True)
class ContractionSample:
    max_ratio: float
    pairs_used: int
    skipped: int


def contraction_ratio_sample(
    T: ArrayLike,
    pairs: Iterable[tuple[ArrayLike, ArrayLike]],
    metric: Literal["real", "complex"] = "real",
) -> ContractionSample:
    """Largest observed d(f_T(v), f_T(w)) / d(v, w) over the given pairs.

    Pairs at zero distance are skipped and counted.
    """
    dist = hilbert_distance if metric == "real" else complex_hilbert_distance
    best = 0.0
    used = skipped = 0
    for v, w in pairs:
        d0 = dist(v, w)
        if d0 == 0.0:
            skipped += 1
            continue
        ratio = dist(induced_map(T, v), induced_map(T, w)) / d0
        best = max(best, ratio)
        used += 1
    if skipped:
        log.warning("skipped %d degenerate pairs", skipped)
    return ContractionSample(best, used, skipped)


def random_interior(rng: np.random.Generator, l: int, count: int, spread: float = 3.0) -> NDArray[np.float64]:
    """Interior points with log-coordinates uniform on [-spread, spread]."""
    x = np.exp(rng.uniform(-spread, spread, size=(count, l)))
    return x / x.sum(axis=1, keepdims=True)


def random_pairs(rng: np.random.Generator, l: int, count: int, spread: float = 3.0):
    a = random_interior(rng, l, count, spread)
    b = random_interior(rng, l, count, spread)
    return list(zip(a, b))


def complex_perturbed_pairs(rng: np.random.Generator, l: int, count: int, radius: float, spread: float = 1.0):
    """Pairs near W°: interior points with complex perturbations of Hilbert size about ``radius``.

    Each point is built in log coordinates, x = exp(a + i b)/sum with |b_i - b_j| <= radius,
    so it lies in the right-half-plane domain within complex Hilbert distance ``radius``
    of a real interior point.
    """
    out = []
    for _ in range(count):
        pts = []
        for _ in range(2):
            a = rng.uniform(-spread, spread, l)
            b = rng.uniform(-radius / 2, radius / 2, l)
            x = np.exp(a + 1j * b)
            pts.append(x / x.sum())
        out.append(tuple(pts))
    return out


def batch_hilbert_distance(V: NDArray, W: NDArray) -> NDArray[np.float64]:
    """Row-wise real Hilbert distance for stacked interior vectors."""
    r = np.log(W) - np.log(V)
    return r.max(axis=-1) - r.min(axis=-1)


def adversarial_ratio_search(T: ArrayLike, points: int = 2001, spread: float = 12.0, step: float = 1e-5) -> float:
    """Grid search for near-extremal contraction ratios.

    Base points lie on a grid in log-ratio coordinates; each is paired with a
    neighbour displaced by ``step`` along every coordinate direction. Exhaustive
    only for l = 2; for larger l the grid runs along each coordinate axis.
    """
    T = np.asarray(T, dtype=float)
    l = T.shape[0]
    s = np.linspace(-spread, spread, points)
    best = 0.0
    for axis in range(l - 1 if l == 2 else l):
        for direction in range(l):
            if direction == axis and l > 2:
                continue
            base = np.zeros((points, l))
            base[:, axis] = s
            shifted = base.copy()
            shifted[:, direction] += step
            V = np.exp(base - base.max(axis=1, keepdims=True))
            W = np.exp(shifted - shifted.max(axis=1, keepdims=True))
            d0 = batch_hilbert_distance(V, W)
            d1 = batch_hilbert_distance(V @ T, W @ T)
            ok = d0 > 0
            best = max(best, float((d1[ok] / d0[ok]).max()))
    return best
