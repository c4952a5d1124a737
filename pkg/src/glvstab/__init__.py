"""Stability analysis of planar generalized Lotka-Volterra (power-law) systems."""

__version__ = "0.1.0"
