"""Duality pairing for better-behaved GKZ systems and its Gamma-series checks."""

__version__ = "0.1.0"
