"""Exact simulation of a light-coupled Josephson junction between two condensates."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .fock import (  # noqa: E402
    FockStateVector,
    IntegrityError,
    TwoModeParams,
    build_angular_ops,
    build_two_mode_hamiltonian,
    evolve,
    twin_fock_state,
)

__all__ = [
    "FockStateVector",
    "IntegrityError",
    "TwoModeParams",
    "build_angular_ops",
    "build_two_mode_hamiltonian",
    "evolve",
    "twin_fock_state",
    "__version__",
]
