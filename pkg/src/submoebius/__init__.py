"""Exact verification of Möbius and sub-Möbius structures on finite point sets."""

__version__ = "0.1.0"
