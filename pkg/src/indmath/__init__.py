"""Numerical methods for four industrial case studies.

* :mod:`indmath.weldgeom`: intersection seams of two pipes and torch clearance
* :mod:`indmath.imaging`: straight-line (trip-wire) detection with a Radon transform
* :mod:`indmath.plume`: Gaussian plume concentration and dust-fall deposition
* :mod:`indmath.inversion`: emission-rate estimation by (non-negative) least squares
* :mod:`indmath.fvm`: finite-volume advection-diffusion check of the plume formula
"""

from .errors import IndmathError
from .fvm import FvmParams, Grid3D, compare_to_analytic, fvm_steady_solve, refinement_study
from .imaging import DetectionParams, LineFeature, detect_tripwires, radon_transform
from .inversion import build_design_matrix, solve_least_squares, solve_nnls
from .plume import (
    Contaminant,
    DispersionSpec,
    Receptor,
    Source,
    WindInterval,
    concentration,
    concentration_grid,
    deposition,
)
from .weldgeom import PipeJoint, clearance_check, full_seam, intersection_point

__version__ = "0.1.0"
