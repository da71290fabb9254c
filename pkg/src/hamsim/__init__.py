"""Laboratory for error-mitigated Hamiltonian simulation.

Noisy Trotter and randomized-LCU evolution on small dense systems, PEC and
SNI error mitigation, the analytic resource model, and a seeded experiment
harness with a command line front end (``hamsim``).
"""

__version__ = "0.1.0"

from .channels import NoiseModel, StochasticPauliChannel, basis_state, exact_evolution, expectation
from .circuits import Gate, NoisyCircuit
from .errors import (
    CapacityError,
    ChannelIntegrityError,
    DegenerateInputError,
    DimensionError,
    HamsimError,
    InfeasibleSegmentationError,
    NonInvertibleError,
    SpecError,
)
from .pauli import Hamiltonian, PauliString

__all__ = [
    "CapacityError",
    "ChannelIntegrityError",
    "DegenerateInputError",
    "DimensionError",
    "Gate",
    "Hamiltonian",
    "HamsimError",
    "InfeasibleSegmentationError",
    "NoiseModel",
    "NoisyCircuit",
    "NonInvertibleError",
    "PauliString",
    "SpecError",
    "StochasticPauliChannel",
    "__version__",
    "basis_state",
    "exact_evolution",
    "expectation",
]
