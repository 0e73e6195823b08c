"""Two-network collocation solver for elliptic and parabolic interface problems."""

__version__ = "0.1.0"
