"""Asymptotic-preserving IMEX finite-volume solvers for the low Mach number
isentropic Euler equations, with the linear model problem used to study
their TVD and stability properties."""

__version__ = "0.1.0"
