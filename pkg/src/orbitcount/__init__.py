"""Orbit-count statistics for random tuples of commuting permutations."""

__version__ = "0.1.0"
