"""hyperl4 - exact L^4 norms of hyperbolic Schrodinger evolutions on T^3."""

__version__ = "0.1.0"
