"""
Interference readout after the protocol.

A small fraction of each condensate is outcoupled and the fringe intensity
is proportional to <c1^dag c2 + c2^dag c1> after the system has been held
for a time tau under the self-interaction alone. The hold only imprints the
number-dependent phases exp(-i kappa [n^2 + (N-n)^2] tau / 2), so the
intensity is a sum of oscillations at frequencies kappa (2n + 1 - N).
Their dephasing gives the collapse; their common period pi/kappa (for even N,
up to a sign) gives the revival.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import argrelextrema

from .fock import FockStateVector, hopping_operator

IMAG_TOL = 1e-10


@dataclass(frozen=True)
class IntensityTrace:
    tau_grid: np.ndarray
    intensity: np.ndarray
    prefactor: float
    kappa: float
    total_atoms: int


@dataclass(frozen=True)
class CollapseReport:
    t_coll_estimate: Optional[float]
    t_coll_measured: Optional[float]
    t_revival_measured: Optional[float]
    envelope_threshold: float


def readout_prefactor(gamma_prime_1: float, gamma_prime_2: float, omega_k1: float, omega_k2: float) -> float:
    """Physical scale gamma'(k1) gamma'(k2) / (omega_k1 omega_k2) of the fringe intensity."""
    return gamma_prime_1 * gamma_prime_2 / (omega_k1 * omega_k2)


def default_tau_grid(kappa: float, points: int = 2000, span: float = 1.2) -> np.ndarray:
    """``points`` samples over [0, span * pi / kappa]."""
    if kappa <= 0:
        raise ValueError("kappa must be positive to define a revival period")
    return np.linspace(0.0, span * math.pi / kappa, points)


def _hold_phases(n_atoms: int, kappa: float, tau: float) -> np.ndarray:
    n = np.arange(n_atoms + 1)
    return np.exp(-0.5j * kappa * (n**2 + (n_atoms - n) ** 2) * tau)


def intensity_trace(
    state: FockStateVector, kappa: float, tau_grid, prefactor: float = 1.0
) -> IntensityTrace:
    """prefactor * <2 J_x> after holding ``state`` for each tau under kappa alone."""
    if abs(state.norm - 1.0) > 1e-6:
        raise ValueError(f"state is not normalized (norm {state.norm:.9f})")
    if not np.isfinite(kappa):
        raise ValueError("kappa must be finite")
    taus = np.asarray(tau_grid, dtype=float).reshape(-1)
    if taus.size == 0:
        raise ValueError("tau grid is empty")
    if taus.size > 1 and np.any(np.diff(taus) <= 0):
        raise ValueError("tau grid must be strictly increasing")

    n_atoms = state.total_atoms
    hop = hopping_operator(n_atoms)
    two_jx = hop + hop.conj().T
    values = np.empty(taus.size, dtype=complex)
    for i, tau in enumerate(taus):
        held = _hold_phases(n_atoms, kappa, tau) * state.amplitudes
        values[i] = held.conj() @ (two_jx @ held)
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue > IMAG_TOL:
        raise ArithmeticError(f"interference expectation has imaginary part {residue:.3e}")
    return IntensityTrace(taus, prefactor * values.real, prefactor, kappa, n_atoms)


def intensity_closed_form(amplitudes, n_atoms: int, kappa: float, tau: float) -> float:
    """Explicit two-term sum over neighbouring number states.

    sum_n a*_{n+1} a_n sqrt((n+1)(N-n)) e^{i kappa (2n+1-N) tau}
        + a*_{n-1} a_n sqrt(n(N-n+1)) e^{i kappa (N-2n+1) tau}

    with ``a`` the trap-basis amplitudes before the hold.
    """
    a = np.asarray(amplitudes, dtype=complex)
    if a.shape[0] != n_atoms + 1:
        raise ValueError("amplitude vector length must be N + 1")
    total = 0j
    for n in range(n_atoms + 1):
        if n + 1 <= n_atoms:
            total += (
                a[n + 1].conjugate() * a[n] * math.sqrt((n + 1) * (n_atoms - n))
                * np.exp(1j * kappa * (2 * n + 1 - n_atoms) * tau)
            )
        if n >= 1:
            total += (
                a[n - 1].conjugate() * a[n] * math.sqrt(n * (n_atoms - n + 1))
                * np.exp(1j * kappa * (n_atoms - 2 * n + 1) * tau)
            )
    return float(total.real)


def intensity_closed_form_first_term(amplitudes, n_atoms: int, kappa: float, tau: float) -> float:
    """2 Re of the first sum alone; equal to the full sum since the second term is its conjugate."""
    a = np.asarray(amplitudes, dtype=complex)
    n = np.arange(n_atoms)
    terms = a[1:].conj() * a[:-1] * np.sqrt((n + 1) * (n_atoms - n)) * np.exp(
        1j * kappa * (2 * n + 1 - n_atoms) * tau
    )
    return float(2 * terms.sum().real)


def collapse_time_estimate(kappa: float, delta_n: float) -> float:
    """pi / (2 kappa Delta n)."""
    if kappa == 0 or delta_n == 0:
        raise ValueError("collapse time needs kappa > 0 and delta_n > 0 (no dephasing scale)")
    if kappa < 0 or delta_n < 0:
        raise ValueError("kappa and delta_n must be positive")
    return math.pi / (2 * kappa * delta_n)


def envelope(values: np.ndarray, slow_gap: Optional[int] = None) -> np.ndarray:
    """Piecewise-linear interpolation through the local maxima of ``values``.

    Endpoints are always nodes. Between two nodes more than ``slow_gap``
    samples apart the signal is not oscillating on the envelope scale, and
    the envelope is the signal itself.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 3:
        return values.copy()
    nodes = _envelope_nodes(values)
    idx = np.arange(values.size)
    env = np.interp(idx, nodes, values[nodes])
    if slow_gap is not None:
        for left, right in zip(nodes[:-1], nodes[1:]):
            if right - left > slow_gap:
                env[left : right + 1] = values[left : right + 1]
    return env


def _envelope_nodes(values: np.ndarray) -> np.ndarray:
    peaks = argrelextrema(values, np.greater)[0]
    return np.unique(np.concatenate(([0], peaks, [values.size - 1])))


def _envelope_window(nodes: np.ndarray, slow_gap: int) -> int:
    """Median spacing, in samples, between successive fast envelope nodes."""
    gaps = np.diff(nodes)
    gaps = gaps[gaps <= slow_gap]
    return max(1, int(np.median(gaps))) if gaps.size else 1


def _stretches(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive index ranges of the True runs in ``mask``."""
    edges = np.diff(np.concatenate(([0], mask.astype(int), [0])))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), stops.tolist()))


def detect_collapse_revival(
    trace: IntensityTrace, threshold_fraction: float = 1 / math.e, delta_n: Optional[float] = None
) -> CollapseReport:
    """Locate collapse and revival of the fringe intensity.

    Collapse is the first time after the initial envelope peak, and before
    half the revival period pi/kappa, at which the envelope of |I| drops
    below ``threshold_fraction`` of the largest |I| and stays there for one
    envelope window. Revival is read off the stretch nearest pi/kappa where
    the envelope is back above 90 % of the maximum: its time is the midpoint
    of the first and last samples in that stretch with |I| itself above 90 %.
    The estimate pi / (2 kappa delta_n) is reported when ``delta_n`` is given.
    """
    if not 0 < threshold_fraction < 1:
        raise ValueError("threshold_fraction must lie in (0, 1)")
    kappa = trace.kappa
    if kappa <= 0:
        raise ValueError("collapse detection needs kappa > 0")
    taus = trace.tau_grid
    period = math.pi / kappa
    if taus[0] > 0 or taus[-1] < 1.2 * period * (1 - 1e-12):
        raise ValueError(
            f"tau grid must cover [0, 1.2*pi/kappa] = [0, {1.2 * period:.6g}], "
            f"got [{taus[0]:.6g}, {taus[-1]:.6g}]"
        )

    estimate = None
    if delta_n is not None and delta_n > 0:
        estimate = collapse_time_estimate(kappa, delta_n)

    magnitude = np.abs(trace.intensity)
    peak_value = float(magnitude.max())
    threshold = threshold_fraction * peak_value
    # an identically vanishing trace carries no coherence to collapse
    floor = 1e-9 * max(1, trace.total_atoms) * max(abs(trace.prefactor), 1e-300)
    if peak_value <= floor:
        return CollapseReport(estimate, None, None, threshold)

    step = float(np.median(np.diff(taus)))
    slow_gap = max(2, int(round(period / 8 / step)))
    env = envelope(magnitude, slow_gap)
    window = _envelope_window(_envelope_nodes(magnitude), slow_gap)
    start = int(np.argmax(np.where(taus < 0.5 * period, env, -np.inf)))

    collapse = None
    below = env < threshold
    for i in range(start + 1, taus.size):
        if taus[i] >= 0.5 * period:
            break
        if below[i : min(taus.size, i + window + 1)].all():
            collapse = float(taus[i])
            break

    revival = None
    dropped = np.flatnonzero(env[start:] < 0.9 * peak_value)
    if dropped.size:
        first_drop = start + int(dropped[0])
        high = env >= 0.9 * peak_value
        high[:first_drop] = False
        runs = _stretches(high)
        if runs:
            lo, hi = min(runs, key=lambda r: abs(0.5 * (taus[r[0]] + taus[r[1]]) - period))
            strong = lo + np.flatnonzero(magnitude[lo : hi + 1] >= 0.9 * peak_value)
            if strong.size:
                revival = float(0.5 * (taus[strong[0]] + taus[strong[-1]]))
    return CollapseReport(estimate, collapse, revival, threshold)
