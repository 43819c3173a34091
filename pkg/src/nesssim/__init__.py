"""Non-equilibrium steady states of boundary-driven spin-1/2 chains via
Trotterized Lindblad evolution of a matrix-product superket."""

from .baths import BathSpec
from .models import ModelSpec
from .mps import SuperketMps, StateCollapsedError
from .tebd import (BondPolicy, ConvergenceSpec, TrotterPlan,
                   assemble_local_liouvilleans, build_trotter_plan,
                   evolve_to_ness, step)

__version__ = "0.1.0"

__all__ = [
    "BathSpec", "ModelSpec", "SuperketMps", "StateCollapsedError",
    "BondPolicy", "ConvergenceSpec", "TrotterPlan",
    "assemble_local_liouvilleans", "build_trotter_plan", "evolve_to_ness",
    "step", "__version__",
]
