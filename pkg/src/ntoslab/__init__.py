"""Numerical lab for terminal-coupled non-Hermitian SSH sensor chains."""

__version__ = "0.1.0"
