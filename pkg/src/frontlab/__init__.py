"""frontlab: bistable planar reaction-diffusion fronts at desk scale.

Profiles and speeds of traveling fronts, transverse spectral verdicts,
linearized semigroup decomposition, viscous Hamilton-Jacobi interface
dynamics via Cole-Hopf, a nonlinear 2D simulator, and the tracking scheme
tying them together.
"""
from .grids import Grid1D, Grid2D, Field2D
from .model import (ReactionModel, make_nagumo, make_fhn, rotate_model,
                    validate_bistable, model_from_config)
from .profile import (FrontProfile, AdjointEigenfunction, solve_front,
                      adjoint_eigenfunction, coefficients)
from .hj import ColeHopfParams, cole_hopf, inverse_cole_hopf
from .simulator import SimConfig, make_perturbation

__version__ = "0.1.0"
