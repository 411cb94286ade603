"""Adaptive matched filters and Kelly's detector trained on complex matrix-variate
t samples: direct simulation, chi-square representations and closed forms."""
from . import adaptive, analytic, matvar, randvar, represent
from .randvar import RngStream

__version__ = "0.1.0"
