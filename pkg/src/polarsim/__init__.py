"""Simulation of a two-LC Stokes polarimeter and its effect on entanglement-based QKD."""

__version__ = "0.1.0"
