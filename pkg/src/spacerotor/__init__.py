"""Reduced dynamics and Hamilton-Jacobi checks for a rigid spacecraft with an internal rotor."""

__version__ = "0.1.0"
