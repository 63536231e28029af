"""Continuum DVS.

Simulation toolkit for deep direct visual servoing of a single-section
tendon-driven continuum robot: synthetic views of one target image, spiral
dataset generation, CNN regression of tendon displacements and a closed-loop
proportional controller.
"""

__version__ = "0.1.0"
__author__ = "Continuum DVS contributors"

__all__ = [
    "__author__",
    "__version__",
]
