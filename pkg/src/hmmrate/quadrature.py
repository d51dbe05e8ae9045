"""1-D integrals over the real line for location/scale channel densities.

Gaussian-type integrands are integrated on [lo - 40 s, hi + 40 s] split at the
component locations. Heavy-tailed (Cauchy) integrands go through the exact
substitution z = c + s tan(u), which maps the line to (-pi/2, pi/2).
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy import integrate

from .model import ChannelKind, ChannelModel

GAUSS_HALF_WIDTH = 40.0


class QuadratureError(ArithmeticError):
    def __init__(self, message: str, value: float = float("nan"), abserr: float = float("nan")):
        super().__init__(f"{message} (value={value!r}, abserr={abserr!r})")
        self.value = value
        self.abserr = abserr


def _quad(f, a, b, epsabs, epsrel, limit, points=None):
    with np.errstate(all="ignore"):
        val, err, info = integrate.quad(
            f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, points=points, full_output=True
        )[:3]
    if not np.isfinite(val) or err > max(epsabs, epsrel * abs(val)) * 100:
        raise QuadratureError("adaptive quadrature did not converge", val, err)
    return val, err


def integrate_line(
    f: Callable[[float], float],
    kind: ChannelKind,
    locations,
    scale: float,
    epsabs: float = 1e-13,
    epsrel: float = 1e-12,
    limit: int = 500,
) -> float:
    """Integral of ``f`` over the real line.

    ``locations`` and ``scale`` describe where the mass sits; they choose the
    truncation (Gaussian) or the tangent substitution (heavy tails).
    """
    locations = np.atleast_1d(np.asarray(locations, dtype=float))
    if kind is ChannelKind.GAUSSIAN:
        lo = locations.min() - GAUSS_HALF_WIDTH * scale
        hi = locations.max() + GAUSS_HALF_WIDTH * scale
        pts = sorted(set(locations.tolist()))
        val, _ = _quad(f, lo, hi, epsabs, epsrel, limit, points=pts)
        return val
    c = float(np.mean(locations))

    def g(u):
        return f(c + scale * np.tan(u)) * scale / np.cos(u) ** 2

    # interior breakpoints at the component locations
    us = sorted({float(np.arctan((m - c) / scale)) for m in locations} | {0.0})
    edges = [-np.pi / 2] + us + [np.pi / 2]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            total += _quad(g, a, b, epsabs, epsrel, limit)[0]
    return total


def _channel_support(channel: ChannelModel, weights=None):
    kind = ChannelKind.GAUSSIAN if channel.kind is ChannelKind.GAUSSIAN else ChannelKind.CAUCHY
    return kind, np.real(channel.mu), float(np.max(np.real(channel.scale)))


def component_integral(channel: ChannelModel, y: int, f: Callable[[float, float], float], **kw) -> float:
    """Integral of f(z, log q(z|y)) dz for the 0-based component ``y``."""
    single = type(channel)(channel.kind, channel.mu[y : y + 1], channel.scale[y : y + 1])
    kind, loc, scale = _channel_support(single)

    def integrand(z):
        return f(z, float(single.log_densities(z)[0]))

    return integrate_line(integrand, kind, loc, scale, **kw)


def mixture_log_density(channel: ChannelModel, weights) -> Callable[[float], float]:
    w = np.asarray(weights, dtype=float)
    logw = np.log(w, where=w > 0, out=np.full(w.shape, -np.inf))

    def logp(z):
        lq = channel.log_densities(z) + logw
        m = lq.max()
        return float(m + np.log(np.exp(lq - m).sum()))

    return logp


def mixture_integral(channel: ChannelModel, weights, f: Callable[[float, float], float], **kw) -> float:
    """Integral of f(z, log p(z)) for the mixture p = sum_y weights_y q(.|y)."""
    logp = mixture_log_density(channel, weights)
    kind, loc, scale = _channel_support(channel)
    return integrate_line(lambda z: f(z, logp(z)), kind, loc, scale, **kw)


def _neg_plogp(z, lp):
    return -np.exp(lp) * lp if np.isfinite(lp) else 0.0


def differential_entropy(channel: ChannelModel, y: int, **kw) -> float:
    """-integral q(z|y) log q(z|y) dz for 0-based component ``y``, in nats."""
    return component_integral(channel, y, _neg_plogp, **kw)


def mixture_entropy(channel: ChannelModel, weights, **kw) -> float:
    return mixture_integral(channel, weights, _neg_plogp, **kw)


def total_mass(channel: ChannelModel, y: int, **kw) -> float:
    return component_integral(channel, y, lambda z, lp: np.exp(lp), **kw)
