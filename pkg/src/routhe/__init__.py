"""Forced discrete mechanical systems, Routh forces and discrete Routh reduction."""

from .fdms import DiscreteSystem, SolverConfig, run, step

__all__ = ["DiscreteSystem", "SolverConfig", "run", "step"]
__version__ = "0.1.0"
