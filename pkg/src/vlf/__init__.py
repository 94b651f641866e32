"""Desk-scale toolkit for locating visual answers in instructional videos."""

__version__ = "0.1.0"
