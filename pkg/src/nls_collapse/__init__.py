"""Blow-up and scattering criteria for the radial 3D focusing cubic NLS."""
from .criteria import Criterion, CriterionVerdict, Verdict, evaluate_all
from .groundstate import GroundState, default_ground_state, solve_ground_state
from .grid import RadialGrid
from .profiles import (Gaussian, OffCentered, Oscillatory, QProfile, SuperGaussian, closed_form_diagnostics,
                       format_profile, make_profile, parse_profile, sample)
from .quantities import Diagnostics, RadialField, compute_diagnostics
from .solver import Classification, EvolveParams, evolve, evolve_profile

__version__ = "0.1.0"
