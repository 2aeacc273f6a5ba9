"""Discrete Yano rough Laplacian on surface meshes with spectral verification checks."""

__version__ = "0.1.0"
