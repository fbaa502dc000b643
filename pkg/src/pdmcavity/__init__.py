"""Polar-molecule cavity QED: dressed-state perturbation theory and exact diagonalization."""

__version__ = "0.1.0"
