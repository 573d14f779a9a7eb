from .data import ParseError, load_gee_csv, write_gee_csv
from .gee import (
    GeeDataset,
    fieller_gradient,
    fieller_objective,
    fieller_problem,
    fieller_stationary_points,
    simulate_fieller_data,
    simulate_wedderburn_data,
    wedderburn_gradient,
    wedderburn_objective,
    wedderburn_problem,
)
from .quadrature import QuadratureRule, composite, gauss_legendre
from .suite import builtin_suite, get_problem
