"""Exact-arithmetic workbench for excisable posets and parametrised cubes."""

__version__ = "0.1.0"
