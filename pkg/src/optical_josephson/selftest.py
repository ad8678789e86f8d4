"""Invariant checks run by ``ojj selftest``."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bragg, fock, interference, protocol, ring


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float


def _su2(max_n: int = 64) -> float:
    worst = 0.0
    for n in range(max_n + 1):
        ops = fock.build_angular_ops(n)
        jx, jy, jz = ops.jx, ops.jy, ops.jz
        for a, b, c in ((jx, jy, jz), (jy, jz, jx), (jz, jx, jy)):
            worst = max(worst, float(np.abs(a @ b - b @ a - 1j * c).max()))
    return worst


def _casimir(max_n: int = 64) -> float:
    worst = 0.0
    for n in range(max_n + 1):
        ops = fock.build_angular_ops(n)
        cas = ops.jx @ ops.jx + ops.jy @ ops.jy + ops.jz @ ops.jz
        j = n / 2
        worst = max(worst, float(np.abs(cas - j * (j + 1) * np.eye(n + 1)).max()))
    return worst


def _random_cases(count: int = 20):
    rng = np.random.default_rng(20240611)
    for _ in range(count):
        n = int(rng.integers(1, 40))
        params = fock.TwoModeParams(
            n, kappa=float(rng.normal()), g=float(rng.normal() * 3), theta=float(rng.uniform(0, 2 * math.pi))
        )
        amps = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
        state = fock.FockStateVector(n, amps / np.linalg.norm(amps))
        yield params, state, float(rng.uniform(-5, 5))


def _hermiticity() -> float:
    return max(fock.hermiticity_residual(fock.build_two_mode_hamiltonian(p)) for p, _, _ in _random_cases())


def _unitarity() -> float:
    worst = 0.0
    for params, state, t in _random_cases():
        ham = fock.build_two_mode_hamiltonian(params)
        out = fock.evolve(state, ham, t)
        back = fock.evolve(out, ham, -t)
        worst = max(worst, abs(out.norm - 1.0), float(np.abs(back.amplitudes - state.amplitudes).max()))
    return worst


def _energy() -> float:
    worst = 0.0
    for params, state, t in _random_cases():
        ham = fock.build_two_mode_hamiltonian(params)
        before = fock.expectation(state, ham).real
        after = fock.expectation(fock.evolve(state, ham, t), ham).real
        worst = max(worst, abs(after - before) / max(1.0, float(np.abs(ham).max())))
    return worst


def _ring_number() -> float:
    model = ring.RingCouplingModel.symmetric(0.1, n_particles=3, ring_cutoff=3)
    pops = ring.populations(model, np.linspace(0, 500, 400))
    return float(np.abs(pops["total"] - 3).max())


def _ode_norm() -> float:
    p = bragg.BraggLadderParams.resonant(1.0, 1.0, 20.0)
    rabi_period = math.pi * p.delta_1 / (p.omega_pump * p.omega_probe)
    traj = bragg.first_order_dynamics(p, np.linspace(0, 10 * rabi_period, 500))
    return traj.norm_drift()


def _d_coefficients() -> float:
    worst = 0.0
    for n in (4, 8, 12):
        for phi in np.linspace(0, math.pi, 7):
            check = protocol.check_d_coefficients(n, float(phi))
            worst = max(worst, check.max_modulus_error if check.matched else math.inf)
    return worst


def _c_normalisation() -> float:
    return max(abs(float(np.sum(protocol.c_coefficients(n) ** 2)) - 1) for n in range(2, 65, 2))


def _antiperiodicity() -> float:
    state = protocol.run_protocol(8, protocol.PulseSchedule.single_pulse(math.pi / 4)).final_state
    taus = np.linspace(0, math.pi, 101)
    a = interference.intensity_trace(state, 1.0, taus).intensity
    b = interference.intensity_trace(state, 1.0, taus + math.pi).intensity
    return float(np.abs(a + b).max())


def _sweep_determinism() -> float:
    from .cli import run_sweep_table

    config = {
        "scenario": "protocol",
        "parameters": {"N": 4, "phi_points": 9},
        "sweep": {"parameter": "N", "values": [8, 2, 4]},
    }
    serial = run_sweep_table(config, parallel=False)
    threaded = run_sweep_table(config, parallel=True, workers=3)
    return 0.0 if serial == threaded else 1.0


CHECKS: list[tuple[str, Callable[[], float], float]] = [
    ("su2_algebra", _su2, 1e-12),
    ("casimir", _casimir, 1e-10),
    ("hermiticity", _hermiticity, 1e-12),
    ("unitarity_round_trip", _unitarity, 1e-9),
    ("energy_conservation", _energy, 1e-9),
    ("ring_number_conservation", _ring_number, 1e-10),
    ("ode_norm_conservation", _ode_norm, 1e-9),
    ("c_coefficient_normalisation", _c_normalisation, 1e-10),
    ("d_coefficients_vs_evolution", _d_coefficients, 1e-8),
    ("intensity_antiperiodicity", _antiperiodicity, 1e-8),
    ("sweep_determinism", _sweep_determinism, 0.0),
]


def run_selftest() -> tuple[list[CheckResult], float]:
    start = time.perf_counter()
    results = []
    for name, fn, tol in CHECKS:
        value = float(fn())
        results.append(CheckResult(name, bool(value <= tol), value, tol))
    return results, time.perf_counter() - start
