"""Adaptive Fourier decomposition in the Hardy space of the tube over the first octant."""

from __future__ import annotations

__version__ = "0.1.0"
