"""Monte Carlo model of single-quantum detection in a quasi-continuum medium."""

__version__ = "0.1.0"
