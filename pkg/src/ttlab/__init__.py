"""Sampling, statistics and Monte Carlo checks for uniform temporal trees."""

__version__ = "0.1.0"
