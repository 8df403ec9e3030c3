"""Quantum annealing with boundary-flat schedules, simulated exactly at desk scale."""

__version__ = "0.1.0"
