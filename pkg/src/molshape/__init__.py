"""Rotation-normalized molecular shape descriptors."""
__version__ = "0.1.0"
