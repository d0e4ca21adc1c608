"""Analytic and fixed-step numerical solvers for ordinary differential equations."""

__version__ = "0.1.0"
