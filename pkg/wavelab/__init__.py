"""Pseudospectral laboratory for the inhomogeneous nonlinear wave equation u_tt - Δu + |x|^-b |u|^α u = 0."""

__version__ = "0.1.0"
