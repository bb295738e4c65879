"""Isotropic realizability of two-dimensional strain fields for Stokes flow."""

__version__ = "0.1.0"
