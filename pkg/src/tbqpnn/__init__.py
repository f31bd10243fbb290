"""Simulation and training of time-bin quantum photonic neural networks."""

__version__ = "0.1.0"
