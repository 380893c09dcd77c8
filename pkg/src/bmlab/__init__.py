"""Moment-graph sheaves, Kazhdan-Lusztig bases and conjecture checks for Coxeter groups."""

__version__ = "0.1.0"
