"""Numerical checks for asymptotically conical Calabi-Yau manifolds."""
from .errors import AccyError
from .polynomial import Polynomial
from .cone import AffineConeSpec, cubic_spec, flat_spec, odp_spec, quadric_spec, fit_rate, RateFit
from .projection import ProjectionMap

__all__ = ["AccyError", "Polynomial", "AffineConeSpec", "cubic_spec", "flat_spec", "odp_spec", "quadric_spec",
           "fit_rate", "RateFit", "ProjectionMap"]
