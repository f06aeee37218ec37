"""Simulation laboratory for identifiability and distinguishability from data."""

__version__ = "0.1.0"
