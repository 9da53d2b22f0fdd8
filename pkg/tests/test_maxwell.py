import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import maxwell_series
from scipy.integrate import solve_ivp

from qca.automata import SQRT3
from qca.maxwell import (
    TransverseField,
    circular_modes,
    evolve_mode,
    fields_from_F,
    light_speed,
    photon_dispersion,
    photon_omega,
    polarization_tilt,
    transverse_basis,
    continuum_axis,
    vacuum_rotation,
    write_surface_csv,
)

DIAG = np.ones(3) / SQRT3
K = np.array([0.31, -0.52, 0.77])


def transverse_field(k, chirality=-1, a=0.3 + 0.4j, b=-0.8 + 0.1j):
    mode = photon_dispersion(k, chirality)
    e1, e2 = transverse_basis(mode)
    return TransverseField(a * e1 + b * e2, mode)


def test_cone_tip():
    mode = photon_dispersion(np.zeros(3))
    assert mode.omega == 0
    field = TransverseField(np.array([1, 2j, 3]), mode)
    assert evolve_mode(field, 5.0) is field
    with pytest.raises(ValueError, match="k = 0"):
        light_speed(np.zeros(3))
    with pytest.raises(ValueError, match="k = 0"):
        polarization_tilt(np.zeros(3))
    with pytest.raises(ValueError, match="transverse plane"):
        transverse_basis(mode)


@pytest.mark.parametrize("chirality", [1, -1])
def test_small_k_series(chirality):
    rng = np.random.default_rng(14)
    for direction in rng.normal(size=(50, 3)):
        for scale in (1e-3, 1e-2):
            k = scale * direction / np.linalg.norm(direction)
            omega = photon_omega(k, chirality)
            assert abs(omega - maxwell_series(k, chirality)) / omega < 1e-5
    k = np.full(3, 1e-3)
    assert np.isclose(photon_omega(k), np.linalg.norm(k) / SQRT3, rtol=1e-3)


def test_axis_aligned_modes_are_exactly_on_the_cone():
    for axis in range(3):
        k = np.zeros(3)
        k[axis] = 0.8
        assert np.isclose(photon_dispersion(k).omega, 0.8 / SQRT3, rtol=1e-14)
        assert polarization_tilt(k) == 0


@pytest.mark.parametrize("chirality", [1, -1])
def test_diagonal_light_speed(chirality):
    kappa = 1e-2
    c = light_speed(kappa * DIAG, chirality)
    # derivative of the cubic term along the diagonal: 1 - chirality kappa / 9
    assert abs(c - (1 - chirality * kappa / 9)) < 2e-5


def test_light_speed_tends_to_one():
    for direction in (DIAG, np.array([1.0, 0, 0]), np.array([0.2, -0.9, 0.4])):
        d = direction / np.linalg.norm(direction)
        speeds = [abs(light_speed(s * d) - 1) for s in (1e-1, 1e-2, 1e-3, 1e-4)]
        assert speeds == sorted(speeds, reverse=True) or max(speeds) < 1e-8
        assert speeds[-1] < 2e-5


def test_light_speed_permutation_symmetry():
    k = np.array([0.05, -0.02, 0.11])
    speeds = [light_speed(k[list(p)]) for p in itertools.permutations(range(3))]
    assert np.ptp(speeds) < 1e-9


def test_evolution_solves_the_mode_equation():
    field = transverse_field(K)
    n_half = field.mode.n_half

    def rhs(_, y):
        F = y[:3] + 1j * y[3:]
        dF = 2 * np.cross(n_half, F)
        return np.concatenate([dF.real, dF.imag])

    y0 = np.concatenate([field.F.real, field.F.imag])
    sol = solve_ivp(rhs, (0, 7.3), y0, rtol=1e-12, atol=1e-14)
    F_ode = sol.y[:3, -1] + 1j * sol.y[3:, -1]
    assert np.abs(evolve_mode(field, 7.3).F - F_ode).max() < 1e-9


def test_identity_and_period():
    field = transverse_field(K)
    assert np.allclose(evolve_mode(field, 0.0).F, field.F)
    period = 2 * np.pi / field.mode.omega
    assert np.abs(evolve_mode(field, period).F - field.F).max() < 1e-10
    assert np.abs(evolve_mode(field, period / 2).F + field.F).max() < 1e-10


def test_helicity_phases():
    mode = photon_dispersion(K)
    e_plus, e_minus = circular_modes(mode)
    t = 1.7
    w = mode.omega
    assert np.allclose(evolve_mode(TransverseField(e_plus, mode), t).F, np.exp(-1j * w * t) * e_plus)
    assert np.allclose(evolve_mode(TransverseField(e_minus, mode), t).F, np.exp(1j * w * t) * e_minus)


@given(st.floats(0, 1e4))
def test_rotation_invariants(t):
    field = transverse_field(K)
    out = evolve_mode(field, t)
    assert out.transversality() < 1e-12
    assert abs(np.linalg.norm(out.F) - np.linalg.norm(field.F)) < 1e-12


def test_non_transverse_field_is_rejected():
    mode = photon_dispersion(K)
    with pytest.raises(ValueError, match="transverse"):
        evolve_mode(TransverseField(mode.axis, mode), 1.0)
    with pytest.raises(ValueError, match="3-vector"):
        TransverseField(np.zeros(2), mode)
    with pytest.raises(ValueError, match="3-vector"):
        photon_dispersion(np.zeros(2))


def test_electric_and_magnetic_parts():
    mode = photon_dispersion(K)
    e1, _ = transverse_basis(mode)
    E, B = fields_from_F(TransverseField(e1, mode))
    assert np.allclose(B, 0) and np.isclose(np.linalg.norm(E), mode.omega)
    e_plus, _ = circular_modes(mode)
    E, B = fields_from_F(TransverseField(e_plus, mode))
    assert np.isclose(np.linalg.norm(E), np.linalg.norm(B))
    assert abs(E @ mode.axis) < 1e-15 and abs(B @ mode.axis) < 1e-15


def test_tilt_is_linear_on_the_diagonal():
    ks = np.geomspace(1e-3, 1e-2, 10)
    tilts = np.array([polarization_tilt(s * np.array([1.0, 1.0, 0.5])) for s in ks])
    slope, intercept = np.polyfit(ks, tilts, 1)
    pred = slope * ks + intercept
    r2 = 1 - np.sum((tilts - pred) ** 2) / np.sum((tilts - tilts.mean()) ** 2)
    assert r2 > 0.999 and slope > 0


@pytest.mark.parametrize("chirality", [1, -1])
def test_tilt_vanishes_in_the_continuum_limit(chirality):
    direction = np.array([0.3, -0.7, 0.5])
    tilts = [polarization_tilt(s * direction, chirality) for s in (1e-2, 1e-3, 1e-4)]
    assert tilts[0] > tilts[1] > tilts[2]
    assert tilts[2] < 1e-4
    assert polarization_tilt(np.array([0.0, 0.8, 0.0]), chirality) < 1e-12


def test_diagonal_tilt_is_not_zero():
    # the cross terms of n-tilde are not cyclically symmetric
    assert polarization_tilt(1e-2 * DIAG) > 1e-3


def test_tilt_symmetries():
    k = np.array([0.03, 0.05, -0.02])
    base = polarization_tilt(k)
    assert np.isclose(polarization_tilt(k[[2, 1, 0]]), base, rtol=1e-12)
    for flips in ([-1, -1, 1], [-1, 1, -1], [1, -1, -1]):
        assert np.isclose(polarization_tilt(k * np.array(flips)), base, rtol=1e-12)
    diag = 1e-2 * DIAG
    assert all(np.isclose(polarization_tilt(np.roll(diag, s)), polarization_tilt(diag)) for s in range(3))


def test_continuum_axis():
    assert np.allclose(continuum_axis([1.0, 2.0, 2.0]), np.array([1, 2, 2]) / 3)
    assert np.allclose(continuum_axis([1.0, 2.0, 2.0], 1), np.array([1, -2, 2]) / 3)
    with pytest.raises(ValueError):
        continuum_axis(np.zeros(3))


@pytest.mark.parametrize("chirality", [1, -1])
def test_relativistic_limit_of_the_mode(chirality):
    rng = np.random.default_rng(15)
    for direction in rng.normal(size=(10, 3)):
        k = 1e-4 * direction / np.linalg.norm(direction)
        field = transverse_field(k, chirality)
        lattice = evolve_mode(field, 1.0).F
        continuum = vacuum_rotation(field.F, k, 1.0, chirality)
        assert np.linalg.norm(lattice - continuum) / np.linalg.norm(field.F) < 1e-6


def test_surface_csv(tmp_path):
    path = tmp_path / "surface.csv"
    write_surface_csv(path, [[0.1, 0.0, 0.0], [0.1, 0.1, 0.1]])
    lines = path.read_text().splitlines()
    assert lines[0] == "kx,ky,kz,omega,c,tilt" and len(lines) == 3
