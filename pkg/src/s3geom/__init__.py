"""Sub-Riemannian geometry of the 3-sphere: geodesics, CMC surfaces, rotational profiles."""

__version__ = "0.1.0"
