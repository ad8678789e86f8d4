import math

import numpy as np
import pytest

from optical_josephson import bragg
from optical_josephson.bragg import BraggLadderParams


def test_resonance_detuning():
    p = BraggLadderParams.resonant(1.0, 1.0, 20.0, omega_k=2.5)
    assert p.nu == pytest.approx(10.0)
    assert bragg.resonance_detuning(p) == 0.0
    assert p.delta_1 == pytest.approx(20.0)
    assert p.delta_1 - p.delta_2 == pytest.approx(bragg.resonance_detuning(p))


def test_reduced_matches_analytic_transfer():
    p = BraggLadderParams.resonant(1.0, 1.0, 20.0)
    t = np.linspace(0, 100, 400)
    traj = bragg.reduced_two_level_dynamics(p, t)
    assert np.abs(traj.transfer - bragg.resonant_transfer(p, t)).max() < 1e-6


@pytest.mark.parametrize("delta_1, bound", [(20.0, 0.05), (40.0, 0.01)])
def test_full_vs_reduced(delta_1, bound):
    p = BraggLadderParams.resonant(1.0, 1.0, delta_1)
    t = np.linspace(0, 2 * math.pi * delta_1, 1000)
    assert bragg.max_population_deviation(p, t) <= bound


def test_deviation_shrinks_with_detuning():
    devs = []
    for d in (10.0, 20.0, 40.0):
        p = BraggLadderParams.resonant(1.0, 1.0, d)
        devs.append(bragg.max_population_deviation(p, np.linspace(0, 2 * math.pi * d, 600)))
    assert devs[0] > devs[1] > devs[2]


def test_norm_conserved():
    p = BraggLadderParams.resonant(1.3, 0.7, 15.0)
    traj = bragg.first_order_dynamics(p, np.linspace(0, 300, 300))
    assert traj.norm_drift() < 1e-9
    assert traj[0] == bragg.AmplitudeTriple(1, 0, 0)
    assert traj[-1].norm == pytest.approx(1.0, abs=1e-9)


def test_scan_peaks_on_resonance():
    p = BraggLadderParams.resonant(1.0, 1.0, 20.0)
    t = math.pi * p.delta_1 / 2
    nus = np.linspace(3.5, 4.5, 41)
    transfer = bragg.transfer_scan(p, nus, t)
    step = nus[1] - nus[0]
    assert abs(nus[np.argmax(transfer)] - 4.0) <= step


def test_scan_matches_single_runs():
    p = BraggLadderParams.resonant(1.0, 1.0, 20.0)
    nus = [3.9, 4.0, 4.05]
    t = 25.0
    scan = bragg.transfer_scan(p, nus, t)
    for nu, value in zip(nus, scan):
        q = BraggLadderParams(p.omega_pump, p.omega_probe, p.detuning, nu, p.omega_k)
        single = bragg.first_order_dynamics(q, [0.0, t]).transfer[-1]
        assert value == pytest.approx(single, abs=1e-8)


def test_scan_order_independent():
    p = BraggLadderParams.resonant(1.0, 1.0, 20.0)
    nus = np.array([3.7, 4.0, 4.3])
    a = bragg.transfer_scan(p, nus, 30.0)
    b = bragg.transfer_scan(p, nus[::-1], 30.0)[::-1]
    assert np.abs(a - b).max() < 1e-9


def test_gamma_first_order_exact():
    p = BraggLadderParams(1.7, 0.3, 12.5, 4.0, 1.0)
    assert bragg.effective_gamma(p) == 1.7 * 0.3 / 12.5


def test_gamma_higher_order():
    p = BraggLadderParams(1.0, 1.0, 10.0, 5.0, 1.25, order=2)
    # (0.1)^2 / (1!^2 * 5) = 0.002
    assert bragg.effective_gamma(p) == pytest.approx(0.002)
    p3 = BraggLadderParams(1.0, 1.0, 10.0, 5.0, 1.25, order=3)
    assert bragg.effective_gamma(p3) == pytest.approx(0.1**3 / (4 * 25))


def test_gamma_large_order_finite():
    p = BraggLadderParams(1.0, 1.0, 1e-3, 4.0, 1.0, order=60)
    assert math.isfinite(bragg.effective_gamma(p))


def test_errors():
    with pytest.raises(ValueError):
        bragg.effective_gamma(BraggLadderParams(1.0, 1.0, 0.0, 4.0, 1.0))
    with pytest.raises(ValueError):
        bragg.reduced_hamiltonian(BraggLadderParams(1.0, 1.0, -1.0, 4.0, 1.0))
    with pytest.raises(ValueError):
        BraggLadderParams(1.0, 1.0, 10.0, 4.0, 0.0)
    with pytest.raises(ValueError):
        BraggLadderParams(1.0, 1.0, 10.0, 4.0, 1.0, order=0)


def test_time_reversal():
    p = BraggLadderParams.resonant(1.0, 0.8, 12.0)
    forward = bragg.first_order_dynamics(p, np.linspace(0, 80, 50))
    back = bragg.first_order_dynamics(p, np.linspace(80, 0, 50), initial=forward.amplitudes[-1])
    assert np.abs(back.amplitudes[-1] - np.array([1, 0, 0])).max() < 1e-8


def test_gamma_ratio_between_orders():
    for m in range(1, 6):
        lo = BraggLadderParams(1.0, 2.0, 8.0, 4.0, 1.0, order=m)
        hi = BraggLadderParams(1.0, 2.0, 8.0, 4.0, 1.0, order=m + 1)
        ratio = bragg.effective_gamma(hi) / bragg.effective_gamma(lo)
        assert ratio == pytest.approx((2.0 / 8.0) / (m**2 * 4.0))
        assert ratio < 1
