"""Symbolic-numeric toolkit for Grassmannian (Gr_{m,N}) Whittaker functions."""

__version__ = "0.1.0"
