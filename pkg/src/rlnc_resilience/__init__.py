"""Resiliency of gradient routing with random linear network coding in sensor networks."""

__version__ = "0.1.0"
