"""Helmholtz conditions for time-dependent second-order ODE systems on the first jet bundle."""

__version__ = "0.1.0"
