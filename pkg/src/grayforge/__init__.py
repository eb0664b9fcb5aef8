"""Closed-form construction and numerical certification of cohomogeneity-one
Gray metrics dt^2 + f(t)^2 theta^2 + g(t)^2 h on circle bundles over
Kaehler-Einstein bases."""

from .errors import GrayforgeError

__version__ = "0.1.0"

__all__ = ["GrayforgeError", "__version__"]
