"""Estimating-equation problems whose objective is a path integral of the score.

Two instances ship:

* Wedderburn quasi-likelihood for proportions on a site x variety design
  (20 indicator columns, 90 observations),
* Fieller-Creasy ratio estimation from paired normal observations (scalar).

In both cases only the estimating function is cheap; the objective is a
line integral of it, evaluated by composite Gauss-Legendre quadrature, and
each objective call reports its node count as inner oracle evaluations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..oracle import Problem
from .quadrature import composite, panels_for

N_SITES = 10
N_VARIETIES = 10
WEDDERBURN_ROWS = 90
WEDDERBURN_DIM = N_SITES + N_VARIETIES
FIELLER_ROWS = 50
FIELLER_SIGMA = 0.05
# default seed: its stationary points sit well inside [4.9, 5] and [-0.21, -0.2]
FIELLER_SEED = 4
ETA_CLIP = 500.0
NODES_PER_PANEL = 16


@dataclass(frozen=True)
class GeeDataset:
    """Observations for one of the two GEE problems.

    ``kind == "wedderburn"``: ``site`` and ``variety`` are 1-based labels in
    1..10 and ``y`` holds proportions.  ``kind == "fieller"``: ``y`` is an
    ``(N, 2)`` array of pairs and ``sigma`` the noise scale.
    """

    kind: str
    y: np.ndarray
    site: Optional[np.ndarray] = None
    variety: Optional[np.ndarray] = None
    sigma: float = FIELLER_SIGMA
    clipped: int = 0  # proportions moved off 0/1 at load time

    def __post_init__(self):
        if self.kind == "wedderburn":
            if len(self.y) != WEDDERBURN_ROWS:
                raise ValueError(f"wedderburn data needs {WEDDERBURN_ROWS} rows, got {len(self.y)}")
            if self.site is None or self.variety is None:
                raise ValueError("wedderburn data needs site and variety labels")
            for name, lab in (("site", self.site), ("variety", self.variety)):
                if lab.min() < 1 or lab.max() > 10:
                    raise ValueError(f"{name} labels must lie in 1..10")
            if np.any((self.y <= 0) | (self.y >= 1)):
                raise ValueError("proportions must lie strictly inside (0, 1)")
        elif self.kind == "fieller":
            if self.y.shape != (FIELLER_ROWS, 2):
                raise ValueError(f"fieller data needs {FIELLER_ROWS} pairs, got shape {self.y.shape}")
            if not self.sigma > 0:
                raise ValueError("sigma must be positive")
        else:
            raise ValueError(f"unknown dataset kind {self.kind!r}")

    def design(self) -> np.ndarray:
        """Wedderburn design matrix: indicator(site) followed by indicator(variety)."""
        x = np.zeros((len(self.y), WEDDERBURN_DIM))
        rows = np.arange(len(self.y))
        x[rows, self.site - 1] = 1.0
        x[rows, N_SITES + self.variety - 1] = 1.0
        return x


# --- Wedderburn ------------------------------------------------------------


def _wedderburn_score(eta, y):
    """``(y - mu) / (mu (1 - mu))`` with ``mu = logistic(eta)``, overflow-free."""
    eta = np.clip(eta, -ETA_CLIP, ETA_CLIP)
    return y * np.exp(-eta) - (1.0 - y) * np.exp(eta) + 2.0 * y - 1.0


def wedderburn_gradient(theta, data: GeeDataset, design: Optional[np.ndarray] = None) -> np.ndarray:
    x = data.design() if design is None else design
    return -x.T @ _wedderburn_score(x @ np.asarray(theta, dtype=float), data.y)


def wedderburn_objective(
    theta,
    data: GeeDataset,
    theta_ref=None,
    nodes: int = NODES_PER_PANEL,
    design: Optional[np.ndarray] = None,
) -> float:
    """Straight-line integral of the quasi-score from ``theta_ref`` to ``theta``."""
    x = data.design() if design is None else design
    theta = np.asarray(theta, dtype=float)
    ref = np.zeros_like(theta) if theta_ref is None else np.asarray(theta_ref, dtype=float)
    d = theta - ref
    rule = composite(panels_for(float(np.linalg.norm(d))), nodes)
    eta_ref = x @ ref
    d_eta = x @ d
    eta = eta_ref[:, None] + d_eta[:, None] * rule.nodes[None, :]
    # grad(p)^T d = -sum_i score_i(p) * d_eta_i
    integrand = -(d_eta @ _wedderburn_score(eta, data.y[:, None]))
    return rule.integrate(integrand)


def wedderburn_cost(theta, theta_ref=None, nodes: int = NODES_PER_PANEL) -> int:
    theta = np.asarray(theta, dtype=float)
    ref = np.zeros_like(theta) if theta_ref is None else theta_ref
    return panels_for(float(np.linalg.norm(theta - ref))) * nodes


def simulate_wedderburn_data(seed: int = 0, dispersion: float = 20.0) -> GeeDataset:
    """Synthetic leaf-blotch style proportions on a 9-site x 10-variety layout.

    Logistic site and variety effects, Beta noise with the given dispersion.
    """
    rng = np.random.default_rng(seed)
    sites, varieties = np.meshgrid(np.arange(1, 10), np.arange(1, 11), indexing="ij")
    site = sites.ravel()
    variety = varieties.ravel()
    site_eff = rng.normal(-2.5, 1.0, size=9)
    var_eff = rng.normal(0.0, 1.0, size=10)
    mu = 1.0 / (1.0 + np.exp(-(site_eff[site - 1] + var_eff[variety - 1])))
    y = rng.beta(mu * dispersion, (1.0 - mu) * dispersion)
    y = np.clip(y, 1e-6, 1.0 - 1e-6)
    return GeeDataset("wedderburn", y=y, site=site, variety=variety)


def wedderburn_problem(data: Optional[GeeDataset] = None, theta_ref=None, nodes: int = NODES_PER_PANEL) -> Problem:
    data = simulate_wedderburn_data() if data is None else data
    x = data.design()
    ref = np.zeros(WEDDERBURN_DIM) if theta_ref is None else np.asarray(theta_ref, dtype=float)
    return Problem(
        name="wedderburn",
        dimension=WEDDERBURN_DIM,
        objective=lambda th: wedderburn_objective(th, data, ref, nodes, x),
        gradient=lambda th: wedderburn_gradient(th, data, x),
        x0=np.zeros(WEDDERBURN_DIM),
        inner_cost=lambda th: wedderburn_cost(th, ref, nodes),
        audit_box=(-1.0, 1.0),
    )


# --- Fieller-Creasy --------------------------------------------------------


def _fieller_sums(data: GeeDataset) -> tuple[float, float]:
    y1, y2 = data.y[:, 0], data.y[:, 1]
    return float(y1 @ y2), float(y1 @ y1 - y2 @ y2)


def fieller_gradient(theta, data: GeeDataset) -> float:
    t = float(np.asarray(theta, dtype=float).reshape(-1)[0])
    y1, y2 = data.y[:, 0], data.y[:, 1]
    num = (y2 + t * y1) * (y1 - t * y2)
    return float(-np.sum(num) / (data.sigma**2 * (1.0 + t * t) ** 2))


def _fieller_gradient_many(t: np.ndarray, a: float, b: float, sigma: float) -> np.ndarray:
    # sum_i (y2 + t y1)(y1 - t y2) = a + t b - t^2 a
    return -(a + t * b - t * t * a) / (sigma**2 * (1.0 + t * t) ** 2)


def fieller_objective(theta, data: GeeDataset, nodes: int = NODES_PER_PANEL) -> float:
    """Signed integral of the score over ``[0, theta]``."""
    t = float(np.asarray(theta, dtype=float).reshape(-1)[0])
    if t == 0.0:
        return 0.0
    a, b = _fieller_sums(data)
    rule = composite(panels_for(abs(t)), nodes)
    return rule.integrate(_fieller_gradient_many(t * rule.nodes, a, b, data.sigma), length=t)


def fieller_stationary_points(data: GeeDataset) -> tuple[float, float]:
    """``(minimizer, maximizer)`` from the quadratic ``a + t b - t^2 a = 0``."""
    a, b = _fieller_sums(data)
    disc = math.sqrt(b * b + 4.0 * a * a)
    r1, r2 = (b + disc) / (2.0 * a), (b - disc) / (2.0 * a)
    # at a root the score slope has the sign of 2 t a - b; positive at the minimizer
    return (r1, r2) if 2.0 * r1 * a - b > 0 else (r2, r1)


def simulate_fieller_data(seed: int = FIELLER_SEED, sigma: float = FIELLER_SIGMA) -> GeeDataset:
    """50 pairs with means ``(m, m / 5)``, ``m`` evenly spaced in [1, 3]."""
    rng = np.random.default_rng(seed)
    m = np.linspace(1.0, 3.0, FIELLER_ROWS)
    means = np.column_stack([m, m / 5.0])
    y = means + rng.normal(0.0, sigma, size=means.shape)
    return GeeDataset("fieller", y=y, sigma=sigma)


def fieller_problem(data: Optional[GeeDataset] = None, nodes: int = NODES_PER_PANEL) -> Problem:
    data = simulate_fieller_data() if data is None else data
    minimizer, _ = fieller_stationary_points(data)
    return Problem(
        name="fieller",
        dimension=1,
        objective=lambda th: fieller_objective(th, data, nodes),
        gradient=lambda th: np.array([fieller_gradient(th, data)]),
        x0=np.array([0.5]),
        known_minimizer=np.array([minimizer]),
        inner_cost=lambda th: panels_for(abs(float(th[0]))) * nodes if th[0] != 0.0 else 0,
        audit_box=(-1.0, 6.0),
    )
