"""Finite-volume solvers for two-phase flow with polymer flooding."""

__version__ = "0.1.0"
