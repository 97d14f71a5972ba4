"""Exact and vanishing-viscosity solutions of pressureless gas dynamics on x > 0."""

__version__ = "0.1.0"
