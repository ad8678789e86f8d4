"""
Two-mode Fock space for a pair of trapped condensates.

States live in the fixed-N sector spanned by |n>_1 |N-n>_2, indexed by the
atom count ``n`` in trap 1 (ascending, 0..N). Units are hbar = 1, so every
energy-like parameter is an angular frequency.

The Schwinger operators follow

    J_x = (c1^dag c2 + c2^dag c1) / 2
    J_z = (n_2 - n_1) / 2

and ``J_y`` is fixed by requiring the right-handed algebra
[J_x, J_y] = i J_z in this basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-10


class IntegrityError(RuntimeError):
    """A numerical invariant (Hermiticity, unitarity) was violated."""


@dataclass(frozen=True)
class FockStateVector:
    """Complex amplitudes over the N+1 two-mode number states."""

    total_atoms: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.total_atoms < 0:
            raise ValueError(f"total_atoms must be >= 0, got {self.total_atoms}")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.total_atoms + 1:
            raise ValueError(
                f"expected {self.total_atoms + 1} amplitudes for N={self.total_atoms}, "
                f"got {amps.shape[0]}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.total_atoms + 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def normalized(self) -> "FockStateVector":
        return FockStateVector(self.total_atoms, self.amplitudes / self.norm)


@dataclass(frozen=True)
class AngularMomentumOps:
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    @property
    def total_atoms(self) -> int:
        return self.jz.shape[0] - 1


@dataclass(frozen=True)
class TwoModeParams:
    """Parameters of the effective two-mode Josephson Hamiltonian.

    ``e0`` only shifts the energy by a constant inside a fixed-N sector and is
    kept for bookkeeping.
    """

    total_atoms: int
    kappa: float = 0.0
    g: float = 0.0
    theta: float = 0.0
    e0: float = 0.0

    def __post_init__(self):
        if self.total_atoms < 0:
            raise ValueError(f"total_atoms must be >= 0, got {self.total_atoms}")
        for name in ("kappa", "g", "theta", "e0"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def energy_offset(self) -> float:
        """The constant (E0 - g/2) N + kappa N^2 / 4 dropped from the dynamics."""
        n = self.total_atoms
        return (self.e0 - self.g / 2) * n + self.kappa * n**2 / 4


def hopping_operator(n_atoms: int) -> np.ndarray:
    """Matrix of c1^dag c2, moving one atom from trap 2 into trap 1."""
    n = np.arange(n_atoms)
    op = np.zeros((n_atoms + 1, n_atoms + 1), dtype=complex)
    op[n + 1, n] = np.sqrt((n + 1) * (n_atoms - n))
    return op


def build_angular_ops(n_atoms: int) -> AngularMomentumOps:
    if n_atoms < 0:
        raise ValueError(f"N must be >= 0, got {n_atoms}")
    up = hopping_operator(n_atoms)
    lower = up.conj().T
    jx = (up + lower) / 2
    # sign chosen so that [jx, jy] = i jz with jz = (n2 - n1)/2
    jy = (lower - up) / 2j
    n = np.arange(n_atoms + 1)
    jz = np.diag((n_atoms - 2 * n) / 2).astype(complex)
    return AngularMomentumOps(jx, jy, jz)


def hermiticity_residual(matrix: np.ndarray) -> float:
    """Largest entry of |H - H^dag|."""
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


def build_two_mode_hamiltonian(params: TwoModeParams) -> np.ndarray:
    """Effective Hamiltonian kappa J_z^2 - (g/2)(e^{-i theta} c1^dag c2 + h.c.).

    In terms of the right-handed operators this is
    kappa J_z^2 - g (cos(theta) J_x - sin(theta) J_y); at theta = pi it reduces
    to kappa J_z^2 + g J_x. The c-number offset is omitted.
    """
    n_atoms = params.total_atoms
    ops = build_angular_ops(n_atoms)
    hop = np.exp(-1j * params.theta) * hopping_operator(n_atoms)
    ham = params.kappa * (ops.jz @ ops.jz) - 0.5 * params.g * (hop + hop.conj().T)
    # remove rounding asymmetry from the complex phase product
    return 0.5 * (ham + ham.conj().T)


def evolve(state: FockStateVector, hamiltonian: np.ndarray, t: float) -> FockStateVector:
    """Apply exp(-i H t) through the eigendecomposition of H."""
    hamiltonian = np.asarray(hamiltonian)
    if hamiltonian.shape != (state.dim, state.dim):
        raise ValueError(
            f"state of dimension {state.dim} is incompatible with operator of shape "
            f"{hamiltonian.shape}"
        )
    if not np.isfinite(t):
        raise ValueError("evolution time must be finite")
    scale = max(1.0, float(np.max(np.abs(hamiltonian))) if hamiltonian.size else 1.0)
    residual = hermiticity_residual(hamiltonian)
    if residual > HERMITIAN_TOL * scale:
        raise IntegrityError(f"Hamiltonian is not Hermitian (residual {residual:.3e})")
    if t == 0:
        return state
    energies, vectors = np.linalg.eigh(hamiltonian)
    coeffs = vectors.conj().T @ state.amplitudes
    return FockStateVector(state.total_atoms, vectors @ (np.exp(-1j * energies * t) * coeffs))


def expectation(state: FockStateVector, operator: np.ndarray) -> complex:
    amps = state.amplitudes
    return complex(amps.conj() @ operator @ amps)


def fock_state(n_atoms: int, n_trap1: int) -> FockStateVector:
    if not 0 <= n_trap1 <= n_atoms:
        raise ValueError(f"n_trap1={n_trap1} outside 0..{n_atoms}")
    amps = np.zeros(n_atoms + 1, dtype=complex)
    amps[n_trap1] = 1.0
    return FockStateVector(n_atoms, amps)


def twin_fock_state(n_atoms: int) -> FockStateVector:
    """|N/2>_1 |N/2>_2."""
    if n_atoms < 2 or n_atoms % 2:
        raise ValueError(f"twin Fock state needs an even N >= 2, got N={n_atoms}")
    return fock_state(n_atoms, n_atoms // 2)


def coherent_spin_state(n_atoms: int, polar: float, azimuth: float = 0.0) -> FockStateVector:
    """All N atoms in the single-particle mode cos(polar/2) c1 + e^{i azimuth} sin(polar/2) c2.

    Binomial number distribution with a definite relative phase; handy as a
    phase-coherent reference for interference traces.
    """
    n = np.arange(n_atoms + 1)
    binom = np.array([comb(n_atoms, k) for k in n], dtype=float)
    amps = (
        np.sqrt(binom)
        * np.cos(polar / 2) ** n
        * (np.exp(1j * azimuth) * np.sin(polar / 2)) ** (n_atoms - n)
    )
    return FockStateVector(n_atoms, amps)


def number_statistics(state: FockStateVector) -> tuple[float, float]:
    """Mean and standard deviation of the trap-1 atom number."""
    if abs(state.norm - 1.0) > 1e-6:
        raise ValueError(f"state is not normalized (norm {state.norm:.9f})")
    prob = state.probabilities
    n = np.arange(state.dim)
    mean = float(prob @ n)
    # centred second moment avoids cancellation for nearly sharp states
    variance = float(prob @ (n - mean) ** 2)
    return mean, float(np.sqrt(max(variance, 0.0)))
