"""Pseudo-spectral Galerkin lab for stochastic shear-thickening fluids with nonlinear damping."""

__version__ = "0.1.0"
