"""Anisotropic hyperelastic models for fibrous soft tissue: stress, dispersion, fitting."""
from .errors import DatasetError, DomainError, InfeasibleStateError, QuadratureError
from .kinematics import DeformationState, FiberGeometry, InvariantSet, Mode, deformation_gradient, invariants
from .models import MODEL_CATALOG, ModelSpec
from .stress import StressResult, nominal_stress, stress_curve, directional_stiffness, density_curve

__version__ = "0.1.0"
