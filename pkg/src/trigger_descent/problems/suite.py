"""Built-in analytic test problems with standard starting points."""
from __future__ import annotations

import numpy as np

from ..oracle import Problem


def rosenbrock_objective(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rosenbrock_gradient(x):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    r = x[1:] - x[:-1] ** 2
    g[:-1] += -400.0 * x[:-1] * r - 2.0 * (1.0 - x[:-1])
    g[1:] += 200.0 * r
    return g


def rosenbrock(n: int = 2) -> Problem:
    x0 = np.tile([-1.2, 1.0], n // 2) if n % 2 == 0 else np.full(n, -1.2)
    return Problem(
        name=f"rosenbrock{n}",
        dimension=n,
        objective=rosenbrock_objective,
        gradient=rosenbrock_gradient,
        x0=x0,
        known_minimizer=np.ones(n),
        lower_bound=0.0,
    )


def sphere(n: int = 10) -> Problem:
    return Problem(
        name=f"sphere{n}",
        dimension=n,
        objective=lambda x: 0.5 * float(x @ x),
        gradient=lambda x: np.array(x, dtype=float),
        x0=np.arange(1.0, n + 1.0),
        known_minimizer=np.zeros(n),
        lower_bound=0.0,
        audit_box=(-5.0, 5.0),
    )


def diagonal_quadratic(n: int = 10, condition: float = 1e4) -> Problem:
    d = np.logspace(0.0, np.log10(condition), n)
    return Problem(
        name=f"diagquad{n}",
        dimension=n,
        objective=lambda x: 0.5 * float(d @ (x * x)),
        gradient=lambda x: d * x,
        x0=np.ones(n),
        known_minimizer=np.zeros(n),
        lower_bound=0.0,
    )


def _beale_terms(x):
    a, b = x
    c = np.array([1.5, 2.25, 2.625])
    p = np.array([1.0, 2.0, 3.0])
    r = c - a + a * b**p
    return r, p, a, b


def beale() -> Problem:
    def f(x):
        r, *_ = _beale_terms(x)
        return float(r @ r)

    def g(x):
        r, p, a, b = _beale_terms(x)
        da = -1.0 + b**p
        db = a * p * b ** (p - 1)
        return np.array([2 * r @ da, 2 * r @ db])

    return Problem(
        name="beale",
        dimension=2,
        objective=f,
        gradient=g,
        x0=np.array([1.0, 1.0]),
        known_minimizer=np.array([3.0, 0.5]),
        lower_bound=0.0,
        audit_box=(-1.5, 1.5),
    )


def himmelblau() -> Problem:
    def f(x):
        a, b = x
        return float((a * a + b - 11) ** 2 + (a + b * b - 7) ** 2)

    def g(x):
        a, b = x
        u = a * a + b - 11
        v = a + b * b - 7
        return np.array([4 * a * u + 2 * v, 2 * u + 4 * b * v])

    return Problem(
        name="himmelblau",
        dimension=2,
        objective=f,
        gradient=g,
        x0=np.array([0.0, 0.0]),
        known_minimizer=None,  # four global minimizers
        lower_bound=0.0,
        audit_box=(-4.0, 4.0),
    )


def _separable_data():
    # two clusters split by the line x1 + x2 = 0, labels in {-1, +1}
    pts = np.array(
        [
            [1.0, 2.0],
            [2.0, 1.0],
            [1.5, 1.5],
            [3.0, 0.5],
            [-1.0, -2.0],
            [-2.0, -0.5],
            [-1.5, -1.5],
            [-0.5, -3.0],
        ]
    )
    labels = np.array([1, 1, 1, 1, -1, -1, -1, -1], dtype=float)
    return pts, labels


def logistic_separable() -> Problem:
    """Logistic loss on perfectly separable data: no minimizer, unbounded level sets."""
    pts, labels = _separable_data()
    z = labels[:, None] * pts

    def f(w):
        return float(np.sum(np.logaddexp(0.0, -z @ w)))

    def g(w):
        m = z @ w
        s = -np.exp(-np.logaddexp(0.0, m))  # -sigmoid(-m)
        return z.T @ s

    return Problem(
        name="logistic_separable",
        dimension=2,
        objective=f,
        gradient=g,
        x0=np.array([0.0, 0.0]),
        lower_bound=0.0,
        bounded_iterates=False,
    )


def exp_quartic(n: int = 4) -> Problem:
    """``exp(|x|^2 / 2) + |x|^4 / 4``: gradient only locally Lipschitz."""

    def f(x):
        r2 = float(x @ x)
        return float(np.exp(0.5 * r2) + 0.25 * r2 * r2)

    def g(x):
        r2 = float(x @ x)
        return (np.exp(0.5 * r2) + r2) * x

    return Problem(
        name=f"expquartic{n}",
        dimension=n,
        objective=f,
        gradient=g,
        x0=np.full(n, 1.0),
        known_minimizer=np.zeros(n),
        lower_bound=1.0,
        audit_box=(-1.5, 1.5),
    )


def booth() -> Problem:
    def f(x):
        a, b = x
        return float((a + 2 * b - 7) ** 2 + (2 * a + b - 5) ** 2)

    def g(x):
        a, b = x
        u = a + 2 * b - 7
        v = 2 * a + b - 5
        return np.array([2 * u + 4 * v, 4 * u + 2 * v])

    return Problem(
        name="booth",
        dimension=2,
        objective=f,
        gradient=g,
        x0=np.array([0.0, 0.0]),
        known_minimizer=np.array([1.0, 3.0]),
        lower_bound=0.0,
        audit_box=(-5.0, 5.0),
    )


def three_hump_camel() -> Problem:
    def f(x):
        a, b = x
        return float(2 * a**2 - 1.05 * a**4 + a**6 / 6 + a * b + b**2)

    def g(x):
        a, b = x
        return np.array([4 * a - 4.2 * a**3 + a**5 + b, a + 2 * b])

    return Problem(
        name="threehumpcamel",
        dimension=2,
        objective=f,
        gradient=g,
        x0=np.array([-1.0, 1.5]),
        known_minimizer=np.zeros(2),
        lower_bound=0.0,
    )


def wood() -> Problem:
    def f(x):
        a, b, c, d = x
        return float(
            100 * (a * a - b) ** 2
            + (a - 1) ** 2
            + (c - 1) ** 2
            + 90 * (c * c - d) ** 2
            + 10.1 * ((b - 1) ** 2 + (d - 1) ** 2)
            + 19.8 * (b - 1) * (d - 1)
        )

    def g(x):
        a, b, c, d = x
        return np.array(
            [
                400 * a * (a * a - b) + 2 * (a - 1),
                -200 * (a * a - b) + 20.2 * (b - 1) + 19.8 * (d - 1),
                2 * (c - 1) + 360 * c * (c * c - d),
                -180 * (c * c - d) + 20.2 * (d - 1) + 19.8 * (b - 1),
            ]
        )

    return Problem(
        name="wood",
        dimension=4,
        objective=f,
        gradient=g,
        x0=np.array([-3.0, -1.0, -3.0, -1.0]),
        known_minimizer=np.ones(4),
        lower_bound=0.0,
    )


def zakharov(n: int = 4) -> Problem:
    i = np.arange(1.0, n + 1.0)

    def f(x):
        s = 0.5 * float(i @ x)
        return float(x @ x + s**2 + s**4)

    def g(x):
        s = 0.5 * float(i @ x)
        return 2 * x + (s + 2 * s**3) * i

    return Problem(
        name=f"zakharov{n}",
        dimension=n,
        objective=f,
        gradient=g,
        x0=np.full(n, 0.5),
        known_minimizer=np.zeros(n),
        lower_bound=0.0,
        audit_box=(-1.0, 1.0),
    )


def builtin_suite() -> list[Problem]:
    return [
        rosenbrock(2),
        rosenbrock(10),
        sphere(10),
        diagonal_quadratic(10, 1e4),
        beale(),
        himmelblau(),
        logistic_separable(),
        exp_quartic(4),
        booth(),
        three_hump_camel(),
        wood(),
        zakharov(4),
    ]


def get_problem(name: str) -> Problem:
    for p in builtin_suite():
        if p.name == name:
            return p
    raise KeyError(name)
