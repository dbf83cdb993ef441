"""Nonparametric Bayesian estimation of a periodic diffusion drift."""
__version__ = "0.1.0"
