"""Simulation and bound-checking toolkit for GP-UCB on fixed grids."""

__version__ = "0.1.0"
