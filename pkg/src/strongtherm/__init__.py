"""Strong-coupling thermodynamics on exactly diagonalizable system + bath models."""

from .calculus import DerivativeConfig, param_derivative
from .classical import ClassicalModel, ClassicalThermo
from .config import RunConfig, load_config, parse_config
from .drive import DrivenComposite, jz_bare, jz_partial_molar, local_operators
from .errors import StrongThermError
from .gibbs import ThermalEnsemble, canonical_report
from .kernels import BACKEND
from .mean_force import MeanForce, MeanForceResult, hamiltonian_of_mean_force
from .models import CompositeHamiltonian, ModelSpec, build
from .thermo_gt import gt_report
from .thermo_pm import pm_report

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ClassicalModel",
    "ClassicalThermo",
    "CompositeHamiltonian",
    "DerivativeConfig",
    "DrivenComposite",
    "MeanForce",
    "MeanForceResult",
    "ModelSpec",
    "RunConfig",
    "StrongThermError",
    "ThermalEnsemble",
    "build",
    "canonical_report",
    "gt_report",
    "hamiltonian_of_mean_force",
    "jz_bare",
    "jz_partial_molar",
    "load_config",
    "local_operators",
    "param_derivative",
    "parse_config",
    "pm_report",
]
