"""Simulation and certification of high-dimensional spatial entanglement in Laguerre-Gaussian modes."""
__version__ = "0.1.0"
