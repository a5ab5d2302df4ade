"""Numerical laboratory for static vacuum metrics with positive cosmological constant.

Model solutions (Birmingham-Kottler, Nariai), surface gravities and virtual
masses, pseudo-radial gradient estimates, radial Cauchy evolution from the
maximum set of the lapse, expansion checks and Lojasiewicz exponent fits.
"""

from .cauchy import CauchyData, EvolveControls, HorizonData, evolve, evolve_both, initial_data, round_trip
from .errors import ConstraintViolation, DomainError, EndpointLimitError, IntegrationError, KottlerError
from .mass import RegionClass, classify_region, surface_gravity, virtual_mass
from .models import BKParameters, bk_profile, critical_radii, lapse_max, max_mass, nariai_profile, radius_zero
from .profile import RadialProfile

__version__ = "0.1.0"

__all__ = [
    "BKParameters", "CauchyData", "ConstraintViolation", "DomainError", "EndpointLimitError",
    "EvolveControls", "HorizonData", "IntegrationError", "KottlerError", "RadialProfile", "RegionClass",
    "bk_profile", "classify_region", "critical_radii", "evolve", "evolve_both", "initial_data",
    "lapse_max", "max_mass", "nariai_profile", "radius_zero", "round_trip", "surface_gravity",
    "virtual_mass",
]
