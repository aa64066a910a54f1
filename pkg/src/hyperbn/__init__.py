"""Numerical laboratory for the radial Brezis-Nirenberg problem on geodesic balls of H^n."""

from .hyperfun import (
    BoundSet,
    DimensionParam,
    bounds,
    dimension,
    f_fun,
    g_big,
    g_fun,
    g_prime,
    h_fun,
    l_fun,
    m_fun,
)

__version__ = "0.1.0"

__all__ = [
    "BoundSet",
    "DimensionParam",
    "bounds",
    "dimension",
    "f_fun",
    "g_big",
    "g_fun",
    "g_prime",
    "h_fun",
    "l_fun",
    "m_fun",
    "__version__",
]
