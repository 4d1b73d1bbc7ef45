"""Exact and heuristic solvers for two-vehicle routing and the balanced 2-period TSP."""

__version__ = "0.1.0"
