"""Green function of the killed fractional Laplacian on the circle.

Evaluates ``G(x) = (1/2pi) sum_n cos(nx) / (c + |n|^alpha)`` on ``(0, pi]``
through several independent routes (Fourier series with certified tail,
periodized line kernel, Mittag-Leffler integral, closed form at alpha=2,
and two Monte Carlo estimators), and checks its structural properties.
"""

from . import analysis, stochastic
from .core import (
    Divergent,
    FracGreenError,
    GreenValue,
    Grid,
    KernelParams,
    Method,
    NumericalInstability,
    OutOfDomain,
    ToleranceUnreachable,
    validate,
)
from .line_green import h_closed_alpha2, h_deriv, h_eval, x_alpha_cdf, x_alpha_density
from .mittag_leffler import ml_eval, y_density
from .periodic_green import (
    g_closed_alpha2,
    g_deriv,
    g_eval,
    g_ml,
    g_periodized,
    g_prime_ml,
    g_series,
)

__version__ = "0.1.0"

__all__ = [
    "analysis",
    "stochastic",
    "Divergent",
    "FracGreenError",
    "GreenValue",
    "Grid",
    "KernelParams",
    "Method",
    "NumericalInstability",
    "OutOfDomain",
    "ToleranceUnreachable",
    "validate",
    "h_closed_alpha2",
    "h_deriv",
    "h_eval",
    "x_alpha_cdf",
    "x_alpha_density",
    "ml_eval",
    "y_density",
    "g_closed_alpha2",
    "g_deriv",
    "g_eval",
    "g_ml",
    "g_periodized",
    "g_prime_ml",
    "g_series",
]
