import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optical_josephson import ring
from optical_josephson.fock import hermiticity_residual
from optical_josephson.ring import RingCouplingModel


def test_effective_coupling_formula():
    model = RingCouplingModel(0.1, 0.2, 2.0, 4.0)
    assert ring.effective_coupling_g(model) == pytest.approx(2 * (0.01 / 2 + 0.04 / 4))
    assert model.epsilon == pytest.approx(0.1)


def test_phase_from_geometry():
    assert ring.phase_from_geometry(1.0, 0.5) == pytest.approx(math.pi / 2)
    assert ring.phase_from_geometry(1.0, 2.0) == pytest.approx(0.0, abs=1e-15)
    assert ring.phase_from_geometry(-1.0, 0.5) == pytest.approx(3 * math.pi / 2)
    with pytest.raises(ValueError):
        ring.phase_from_geometry(math.inf, 1.0)


def test_basis_size_single_particle():
    basis = ring.ring_basis(1, 2)
    assert len(basis) == 4
    assert basis[0] == (1, 0, 0, 0)


def test_cutoff_must_allow_coupling():
    with pytest.raises(ValueError):
        ring.build_ring_hamiltonian(RingCouplingModel.symmetric(0.1, ring_cutoff=0))


@settings(max_examples=20, deadline=None)
@given(
    st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0.5, 3), st.floats(0.5, 3),
    st.floats(0, 2 * math.pi), st.integers(1, 3), st.integers(1, 3),
)
def test_hamiltonian_hermitian_and_conserving(g1, g2, w1, w2, theta, n, cutoff):
    model = RingCouplingModel(g1, g2, w1, w2, theta=theta, n_particles=n, ring_cutoff=cutoff)
    ham, basis = ring.build_ring_hamiltonian(model)
    assert hermiticity_residual(ham) == 0.0
    assert all(sum(s) == n for s in basis)
    pops = ring.populations(model, np.linspace(0, 50, 30))
    assert np.abs(pops["total"] - n).max() < 1e-10
    assert np.abs(pops["norm"] - 1).max() < 1e-10


def test_adiabatic_rabi_frequency():
    rep = ring.validate_adiabatic(RingCouplingModel.symmetric(0.02))
    assert rep.relative_error < 0.05
    assert rep.effective_g == pytest.approx(0.0016)


def test_adiabatic_error_grows_with_epsilon():
    errors = [ring.validate_adiabatic(RingCouplingModel.symmetric(e)).relative_error for e in (0.02, 0.05, 0.1)]
    assert errors == sorted(errors)


@pytest.mark.parametrize("eps", [0.01, 0.05, 0.1])
def test_ring_population_small(eps):
    rep = ring.validate_adiabatic(RingCouplingModel.symmetric(eps))
    assert rep.max_ring_population < 10 * eps**2


def test_theta_does_not_change_populations():
    times = np.linspace(0, 2000, 300)
    base = ring.populations(RingCouplingModel.symmetric(0.05, theta=0.0), times)
    for theta in (0.7, math.pi, 5.0):
        other = ring.populations(RingCouplingModel.symmetric(0.05, theta=theta), times)
        for key in ("trap1", "trap2", "ring"):
            assert np.abs(other[key] - base[key]).max() < 1e-10


def test_cutoff_doubling_single_particle():
    times = np.linspace(0, 2000, 200)
    a = ring.populations(RingCouplingModel.symmetric(0.05, ring_cutoff=2), times)
    b = ring.populations(RingCouplingModel.symmetric(0.05, ring_cutoff=4), times)
    for key in ("trap1", "trap2", "ring"):
        assert np.abs(a[key] - b[key]).max() < 1e-6


def test_cutoff_doubling_three_particles_small_coupling():
    times = np.linspace(0, 2000, 100)
    a = ring.populations(RingCouplingModel.symmetric(0.01, n_particles=3, ring_cutoff=2), times)
    b = ring.populations(RingCouplingModel.symmetric(0.01, n_particles=3, ring_cutoff=4), times)
    assert np.abs(a["trap2"] - b["trap2"]).max() < 1e-6


def test_fit_error_without_coupling():
    with pytest.raises(ring.AdiabaticFitError):
        ring.validate_adiabatic(RingCouplingModel(0.0, 0.0, 1.0, 1.0))


def test_fit_error_when_duration_too_short():
    model = RingCouplingModel.symmetric(0.02)
    with pytest.raises(ring.AdiabaticFitError, match="epsilon"):
        ring.validate_adiabatic(model, duration=10.0)


def test_theta_pi_over_three_single_particle():
    times = np.linspace(0, 3000, 500)
    a = ring.populations(RingCouplingModel.symmetric(0.03, theta=0.0), times)["trap2"]
    b = ring.populations(RingCouplingModel.symmetric(0.03, theta=math.pi / 3), times)["trap2"]
    assert np.abs(a - b).max() < 1e-10


def test_error_smaller_at_weak_coupling():
    small = ring.validate_adiabatic(RingCouplingModel.symmetric(0.02)).relative_error
    large = ring.validate_adiabatic(RingCouplingModel.symmetric(0.2)).relative_error
    assert small < large


def test_asymmetric_couplings_allowed():
    model = RingCouplingModel(0.02, 0.03, 1.0, 1.5)
    rep = ring.validate_adiabatic(model)
    assert rep.effective_g == pytest.approx(2 * (0.02**2 + 0.03**2 / 1.5))
    assert rep.relative_error < 0.05
