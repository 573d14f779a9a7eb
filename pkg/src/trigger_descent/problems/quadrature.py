"""Composite Gauss-Legendre rules on [0, 1]."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# beyond this many panels, far-away trial points get wider panels
MAX_PANELS = 1000


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes in [0, 1] with weights summing to one."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def count(self) -> int:
        return len(self.nodes)

    def integrate(self, values: np.ndarray, length: float = 1.0) -> float:
        return float(length * (self.weights @ values))


@lru_cache(maxsize=None)
def gauss_legendre(count: int = 16) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(count)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(nodes, weights)


@lru_cache(maxsize=64)
def composite(panels: int, count: int = 16) -> QuadratureRule:
    """``panels`` equal sub-intervals of [0, 1], ``count`` nodes each."""
    base = gauss_legendre(count)
    offsets = np.arange(panels, dtype=float)[:, None]
    nodes = ((offsets + base.nodes[None, :]) / panels).ravel()
    weights = np.tile(base.weights / panels, panels)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(nodes, weights)


def panels_for(length: float, max_panels: int = MAX_PANELS) -> int:
    """One panel per unit of path length, at least one, at most ``max_panels``."""
    if not math.isfinite(length):
        return max_panels
    return int(min(max(1, math.ceil(length)), max_panels))
