"""Quadrature helpers shared by the kernel oracle and the estimate checks.

The recurring integral shapes are: a Gaussian-localized radial smoothing of a
power-law profile (the separated heat kernel applied to a source), and a time
convolution whose kernel time spans many decades.  Both get dedicated
composite Gauss-Legendre rules; generic endpoint-singular integrands go
through a sqrt substitution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

__all__ = [
    "QuadratureError",
    "gauss_legendre",
    "panel_integrate",
    "sqrt_weighted_integrate",
    "geometric_time_panels",
]


class QuadratureError(RuntimeError):
    """Quadrature refinement failed to converge."""


@lru_cache(maxsize=64)
def _gl_cache(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point rule on [a, b]."""
    x, w = _gl_cache(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def panel_integrate(f: Callable[[np.ndarray], np.ndarray], panels, order: int) -> float:
    """Sum Gauss-Legendre panels; `panels` is an iterable of (a, b)."""
    total = 0.0
    for a, b in panels:
        if b <= a:
            continue
        x, w = gauss_legendre(order, a, b)
        total += float(w @ np.asarray(f(x), dtype=float))
    return total


def sqrt_weighted_integrate(
    f: Callable[[np.ndarray], np.ndarray], a: float, b: float, order: int
) -> float:
    """Integrate f on [a, b] after xi = eta^2, taming power singularities at 0."""
    lo, hi = math.sqrt(a), math.sqrt(b)
    x, w = gauss_legendre(order, lo, hi)
    return float(w @ (np.asarray(f(x * x), dtype=float) * 2.0 * x))


def geometric_time_panels(t_lo: float, t_hi: float, per_decade: int = 4) -> list[tuple[float, float]]:
    """Geometric subdivision of [t_lo, t_hi], a few panels per decade."""
    if t_lo <= 0 or t_hi <= t_lo:
        raise ValueError("need 0 < t_lo < t_hi")
    n = max(1, int(math.ceil(per_decade * math.log10(t_hi / t_lo))))
    edges = np.geomspace(t_lo, t_hi, n + 1)
    return list(zip(edges[:-1], edges[1:]))


@dataclass(frozen=True)
class QuadSpec:
    """Knobs for the kernel-convolution quadratures."""

    radial_order: int = 96
    time_order: int = 12
    time_panels_per_decade: int = 4
    tail_sigmas: float = 12.0
    stub_fraction: float = 1e-3

    def refined(self) -> "QuadSpec":
        return QuadSpec(
            radial_order=self.radial_order + self.radial_order // 2,
            time_order=self.time_order + 6,
            time_panels_per_decade=self.time_panels_per_decade + 2,
            tail_sigmas=self.tail_sigmas + 4.0,
            stub_fraction=self.stub_fraction / 8.0,
        )
