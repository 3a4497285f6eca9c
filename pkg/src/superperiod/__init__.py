"""Boundary expansions of genus-2 (super)period matrices and Mumford forms."""

__version__ = "0.1.0"
