"""
Full trap + ring model with the waveguide modes kept explicitly.

Four bosonic modes: trap 1, trap 2 and the two outcoupled momentum modes
k1, k2 circulating in the ring. The ring modes are free (no interaction)
with kinetic energies omega_k1, omega_k2, and couple to the traps through

    sum_j gamma'_j (c1^dag + e^{i theta} c2^dag) g_j + h.c.

When omega_kj >> |gamma'_j| the ring modes can be eliminated, leaving a
direct Josephson coupling g = 2 sum_j gamma'_j^2 / omega_kj between the
traps. :func:`validate_adiabatic` checks that reduction by simulating the
full model exactly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import find_peaks

from .fock import hermiticity_residual


@dataclass(frozen=True)
class RingCouplingModel:
    gamma_prime_1: float
    gamma_prime_2: float
    omega_k1: float
    omega_k2: float
    theta: float = 0.0
    n_particles: int = 1
    ring_cutoff: int = 2
    kappa: float = 0.0

    def __post_init__(self):
        if self.omega_k1 <= 0 or self.omega_k2 <= 0:
            raise ValueError("ring mode frequencies must be positive")
        if self.n_particles < 1:
            raise ValueError("need at least one particle")

    @property
    def epsilon(self) -> float:
        """max |gamma'| / min omega, the small parameter of the elimination."""
        return max(abs(self.gamma_prime_1), abs(self.gamma_prime_2)) / min(self.omega_k1, self.omega_k2)

    @classmethod
    def symmetric(cls, epsilon: float, omega: float = 1.0, **kwargs) -> "RingCouplingModel":
        """Equal couplings gamma' = epsilon * omega on both ring modes."""
        return cls(epsilon * omega, epsilon * omega, omega, omega, **kwargs)


@dataclass(frozen=True)
class AdiabaticReport:
    fitted_rabi_frequency: float
    effective_g: float
    relative_error: float
    max_ring_population: float
    epsilon: float


class AdiabaticFitError(RuntimeError):
    pass


def effective_coupling_g(model: RingCouplingModel) -> float:
    """2 (gamma'_1^2 / omega_k1 + gamma'_2^2 / omega_k2)."""
    return 2 * (model.gamma_prime_1**2 / model.omega_k1 + model.gamma_prime_2**2 / model.omega_k2)


def phase_from_geometry(delta_k: float, radius: float) -> float:
    """Flight phase pi * delta_k * r, reduced to [0, 2 pi)."""
    if not (np.isfinite(delta_k) and np.isfinite(radius)):
        raise ValueError("delta_k and radius must be finite")
    phase = math.fmod(math.pi * delta_k * radius, 2 * math.pi)
    if phase < 0:
        phase += 2 * math.pi
    return 0.0 if phase == 2 * math.pi else phase


def ring_basis(n_particles: int, ring_cutoff: int) -> list[tuple[int, int, int, int]]:
    """Occupations (n1, n2, r1, r2) with fixed total and ring modes capped at ``ring_cutoff``."""
    states = []
    for r1, r2 in itertools.product(range(ring_cutoff + 1), repeat=2):
        rest = n_particles - r1 - r2
        if rest < 0:
            continue
        for n1 in range(rest, -1, -1):
            states.append((n1, rest - n1, r1, r2))
    return sorted(states, key=lambda s: (s[2] + s[3], s[2], s[3], -s[0]))


def build_ring_hamiltonian(model: RingCouplingModel) -> tuple[np.ndarray, list[tuple[int, int, int, int]]]:
    """Hamiltonian of the four-mode model and the basis it is written in."""
    if model.ring_cutoff < 1:
        raise ValueError("ring_cutoff must be >= 1 for the coupling to act")
    basis = ring_basis(model.n_particles, model.ring_cutoff)
    index = {s: i for i, s in enumerate(basis)}
    ham = np.zeros((len(basis), len(basis)), dtype=complex)
    gammas = (model.gamma_prime_1, model.gamma_prime_2)
    omegas = (model.omega_k1, model.omega_k2)
    trap_phase = (1.0, np.exp(1j * model.theta))

    for col, (n1, n2, r1, r2) in enumerate(basis):
        ring = (r1, r2)
        ham[col, col] = omegas[0] * r1 + omegas[1] * r2 + 0.5 * model.kappa * (n1**2 + n2**2)
        for j in range(2):
            if ring[j] == 0:
                continue
            for trap in range(2):
                new = [n1, n2, r1, r2]
                new[trap] += 1
                new[2 + j] -= 1
                row = index[tuple(new)]
                amp = gammas[j] * trap_phase[trap] * math.sqrt(new[trap] * ring[j])
                # c_trap^dag g_j term and its conjugate
                ham[row, col] += amp
                ham[col, row] += np.conj(amp)
    return ham, basis


def number_operators(basis) -> dict[str, np.ndarray]:
    occ = np.array(basis, dtype=float)
    return {
        "trap1": occ[:, 0],
        "trap2": occ[:, 1],
        "ring": occ[:, 2] + occ[:, 3],
        "total": occ.sum(axis=1),
    }


def initial_trap1_state(basis, n_particles: int) -> np.ndarray:
    psi = np.zeros(len(basis), dtype=complex)
    psi[basis.index((n_particles, 0, 0, 0))] = 1.0
    return psi


def populations(model: RingCouplingModel, times) -> dict[str, np.ndarray]:
    """Mean occupations per particle over ``times``, starting with every atom in trap 1.

    Returns arrays keyed ``trap1``, ``trap2``, ``ring`` (fractions of the
    total) plus ``total`` (absolute particle number) and ``norm``.
    """
    ham, basis = build_ring_hamiltonian(model)
    residual = hermiticity_residual(ham)
    if residual > 1e-12 * max(1.0, float(np.abs(ham).max())):
        raise ArithmeticError(f"ring Hamiltonian not Hermitian ({residual:.3e})")
    energies, vectors = np.linalg.eigh(ham)
    coeffs = vectors.conj().T @ initial_trap1_state(basis, model.n_particles)
    times = np.asarray(times, dtype=float)
    amps = (np.exp(-1j * np.outer(times, energies)) * coeffs) @ vectors.T
    probs = np.abs(amps) ** 2
    ops = number_operators(basis)
    n = model.n_particles
    return {
        "trap1": probs @ ops["trap1"] / n,
        "trap2": probs @ ops["trap2"] / n,
        "ring": probs @ ops["ring"] / n,
        "total": probs @ ops["total"],
        "norm": probs.sum(axis=1),
    }


def _refine_peak(times: np.ndarray, values: np.ndarray, i: int) -> float:
    """Vertex of the parabola through the three samples around ``i``."""
    if i == 0 or i == len(values) - 1:
        return float(times[i])
    y0, y1, y2 = values[i - 1], values[i], values[i + 1]
    denom = y0 - 2 * y1 + y2
    if denom == 0:
        return float(times[i])
    shift = 0.5 * (y0 - y2) / denom
    return float(times[i] + shift * (times[i + 1] - times[i]))


def validate_adiabatic(
    model: RingCouplingModel, duration: Optional[float] = None, points: int = 4000
) -> AdiabaticReport:
    """Fit the trap-to-trap oscillation of the full model and compare with g.

    One particle starts in trap 1. The angular frequency of P2(t) is read
    from the spacing of its maxima on a ``points`` sample grid; the default
    duration spans 2.5 effective periods. The maximal ring population is
    taken on a separate grid that resolves the fast ring oscillation.
    """
    g_eff = effective_coupling_g(model)
    eps = model.epsilon
    if g_eff <= 0:
        raise AdiabaticFitError(f"no effective coupling to fit (epsilon={eps:.3g})")
    if duration is None:
        duration = 2.5 * 2 * math.pi / g_eff

    times = np.linspace(0.0, duration, points)
    pops = populations(model, times)
    p2 = pops["trap2"]
    span = float(p2.max() - p2.min())
    peaks, _ = find_peaks(p2, prominence=0.5 * span if span > 0 else None)
    if span < 0.1 or len(peaks) < 2:
        raise AdiabaticFitError(
            f"trap-to-trap oscillation not resolved (epsilon={eps:.3g}, "
            f"{len(peaks)} peaks over duration {duration:.4g})"
        )
    peak_times = np.array([_refine_peak(times, p2, i) for i in peaks])
    period = float(np.mean(np.diff(peak_times)))
    fitted = 2 * math.pi / period

    fast = max(model.omega_k1, model.omega_k2) + abs(g_eff)
    fine_points = int(min(400_000, max(points, math.ceil(duration * fast / (2 * math.pi) * 16))))
    ring_max = float(populations(model, np.linspace(0.0, duration, fine_points))["ring"].max())
    return AdiabaticReport(
        fitted_rabi_frequency=fitted,
        effective_g=g_eff,
        relative_error=abs(fitted - g_eff) / g_eff,
        max_ring_population=ring_max,
        epsilon=eps,
    )
