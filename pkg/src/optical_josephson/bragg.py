"""
First-order Bragg ladder and its reduction to an effective two-level coupling.

The pump (Omega) and probe (Omega') beams connect the condensate at rest,
g0, to the momentum-2k ground state g2k through the far-detuned excited
state e_k. In the interaction picture the single-atom amplitudes obey
i da/dt = H3 a with

        [ 0      Omega     0             ]
   H3 = [ Omega  delta_1   Omega'        ]
        [ 0      Omega'    delta_1 - delta_2 ]

and delta_1 - delta_2 = 4 omega_k - nu vanishes on the Bragg resonance.
For delta_1 >> Omega, Omega' the excited state follows adiabatically and g0,
g2k exchange population at the two-photon rate Omega Omega' / delta_1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

RTOL = 1e-10
ATOL = 1e-12


@dataclass(frozen=True)
class BraggLadderParams:
    omega_pump: float
    omega_probe: float
    detuning: float
    nu: float
    omega_k: float
    order: int = 1

    def __post_init__(self):
        if self.omega_k <= 0:
            raise ValueError("omega_k must be positive")
        if self.order < 1:
            raise ValueError("Bragg order M must be >= 1")

    @property
    def omega_2k(self) -> float:
        return 4 * self.omega_k

    @property
    def delta_1(self) -> float:
        return self.detuning + self.omega_k

    @property
    def delta_2(self) -> float:
        return self.detuning + self.omega_k - self.omega_2k + self.nu

    @property
    def adiabatic(self) -> bool:
        return self.delta_1 >= 10 * max(abs(self.omega_pump), abs(self.omega_probe))

    @classmethod
    def resonant(cls, omega_pump: float, omega_probe: float, delta_1: float, omega_k: float = 1.0, **kw):
        """Parameters on the Bragg resonance nu = 4 omega_k with the given delta_1."""
        return cls(omega_pump, omega_probe, delta_1 - omega_k, 4 * omega_k, omega_k, **kw)


@dataclass(frozen=True)
class AmplitudeTriple:
    a_g0: complex
    a_ek: complex
    a_g2k: complex

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.a_g0) ** 2 + abs(self.a_ek) ** 2 + abs(self.a_g2k) ** 2)


@dataclass(frozen=True)
class LadderTrajectory:
    """Amplitudes on a time grid; column order follows the ladder (g0, [e_k,] g2k)."""

    times: np.ndarray
    amplitudes: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def transfer(self) -> np.ndarray:
        """Population of the momentum-2k ground state."""
        return self.populations[:, -1]

    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.amplitudes, axis=1) - 1.0)))

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, i: int) -> AmplitudeTriple:
        row = self.amplitudes[i]
        if row.size != 3:
            raise TypeError("only three-level trajectories index as AmplitudeTriple")
        return AmplitudeTriple(complex(row[0]), complex(row[1]), complex(row[2]))


def ladder_hamiltonian(p: BraggLadderParams) -> np.ndarray:
    return np.array(
        [
            [0.0, p.omega_pump, 0.0],
            [p.omega_pump, p.delta_1, p.omega_probe],
            [0.0, p.omega_probe, resonance_detuning(p)],
        ],
        dtype=complex,
    )


def reduced_hamiltonian(p: BraggLadderParams) -> np.ndarray:
    """Two-level generator left after eliminating e_k; keeps the two-photon detuning on g2k."""
    if p.delta_1 == 0:
        raise ValueError("delta_1 = 0: the excited state cannot be eliminated")
    w, wp = p.omega_pump, p.omega_probe
    ham = -np.array([[w * w, w * wp], [w * wp, wp * wp]], dtype=complex) / p.delta_1
    ham[1, 1] += resonance_detuning(p)
    return ham


def _integrate(ham: np.ndarray, t_grid, initial) -> LadderTrajectory:
    times = np.asarray(t_grid, dtype=float)
    if times.size > 1 and np.any(np.diff(times) == 0):
        raise ValueError("t_grid must be strictly monotonic")
    y0 = np.asarray(initial, dtype=complex)
    if times.size == 1:
        return LadderTrajectory(times, y0[None, :].copy())
    gen = -1j * ham
    sol = solve_ivp(
        lambda _t, y: gen @ y,
        (times[0], times[-1]),
        y0,
        method="DOP853",
        t_eval=times,
        rtol=RTOL,
        atol=ATOL,
    )
    if not sol.success:
        raise ArithmeticError(f"ladder integration failed: {sol.message}")
    return LadderTrajectory(times, sol.y.T.copy())


def first_order_dynamics(p: BraggLadderParams, t_grid, initial=(1.0, 0.0, 0.0)) -> LadderTrajectory:
    """Integrate the three-level ladder (g0, e_k, g2k) over ``t_grid``."""
    return _integrate(ladder_hamiltonian(p), t_grid, initial)


def reduced_two_level_dynamics(p: BraggLadderParams, t_grid, initial=(1.0, 0.0)) -> LadderTrajectory:
    """Integrate the eliminated (g0, g2k) system over ``t_grid``."""
    return _integrate(reduced_hamiltonian(p), t_grid, initial)


def resonant_transfer(p: BraggLadderParams, t) -> np.ndarray:
    """sin^2(Omega Omega' t / delta_1), the g2k population on resonance when Omega = Omega'."""
    return np.sin(p.omega_pump * p.omega_probe * np.asarray(t) / p.delta_1) ** 2


def resonance_detuning(p: BraggLadderParams) -> float:
    """delta_1 - delta_2 = 4 omega_k - nu."""
    return p.omega_2k - p.nu


def effective_gamma(p: BraggLadderParams) -> float:
    """M-th order coupling |(Omega Omega'/Delta)^M / ([(M-1)!]^2 omega_2k^{M-1})|.

    Powers and factorials are combined in log space; for M = 1 the log
    factor is exactly zero so the result is exactly Omega Omega' / |Delta|.
    """
    if p.detuning == 0:
        raise ValueError("detuning Delta = 0: the effective coupling diverges")
    base = abs(p.omega_pump * p.omega_probe / p.detuning)
    if base == 0:
        return 0.0
    m = p.order
    log_factor = (m - 1) * math.log(base) - 2 * math.lgamma(m) - (m - 1) * math.log(p.omega_2k)
    return base * math.exp(log_factor)


def transfer_scan(p: BraggLadderParams, nus, t: float) -> np.ndarray:
    """g2k population of the full ladder at time ``t`` for each beam detuning nu.

    All scan points are integrated together as one block-diagonal system;
    each block is independent, so the result does not depend on the order
    of ``nus``.
    """
    nus = np.asarray(nus, dtype=float).reshape(-1)
    if nus.size == 0:
        return np.zeros(0)
    hams = np.stack(
        [
            ladder_hamiltonian(
                BraggLadderParams(p.omega_pump, p.omega_probe, p.detuning, nu, p.omega_k, p.order)
            )
            for nu in nus
        ]
    )
    gens = -1j * hams
    y0 = np.tile(np.array([1.0, 0.0, 0.0], dtype=complex), nus.size)

    def rhs(_t, y):
        return np.einsum("kij,kj->ki", gens, y.reshape(-1, 3)).reshape(-1)

    sol = solve_ivp(rhs, (0.0, t), y0, method="DOP853", t_eval=[t], rtol=RTOL, atol=ATOL)
    if not sol.success:
        raise ArithmeticError(f"ladder scan integration failed: {sol.message}")
    final = sol.y[:, -1].reshape(-1, 3)
    return np.abs(final[:, 2]) ** 2


def max_population_deviation(p: BraggLadderParams, t_grid) -> float:
    """Largest |P_full - P_reduced| over g0 and g2k on ``t_grid``."""
    full = first_order_dynamics(p, t_grid).populations[:, [0, 2]]
    reduced = reduced_two_level_dynamics(p, t_grid).populations
    return float(np.max(np.abs(full - reduced)))
