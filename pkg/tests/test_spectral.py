import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from oracles import dirac1d_omega, weyl3d_series

from qca.automata import FUNDAMENTAL_PERIOD, SQRT3, AutomatonSpec
from qca.spectral import (
    DegeneracyError,
    branch_basis,
    branch_projectors,
    diffusion_tensor,
    dirac1d_diffusion,
    dirac1d_velocity,
    dispersion,
    dispersion_point,
    eigenbranches,
    group_velocity,
    interpolating_hamiltonian,
)

MODELS = [
    AutomatonSpec("weyl1d"),
    AutomatonSpec("weyl2d"),
    AutomatonSpec("weyl3d"),
    AutomatonSpec("dirac1d", 0.3),
    AutomatonSpec("dirac2d", 0.3),
    AutomatonSpec("dirac3d", 0.3),
]


@pytest.mark.parametrize("spec", MODELS, ids=lambda s: s.model.value)
def test_hamiltonian_reexponentiates(spec):
    rng = np.random.default_rng(4)
    period = FUNDAMENTAL_PERIOD[spec.dimension]
    shape = (1000,) if spec.dimension == 1 else (1000, spec.dimension)
    for k in rng.uniform(-period / 2, period / 2, size=shape):
        coin = spec.coin(k)
        h = interpolating_hamiltonian(coin)
        assert np.allclose(h, h.conj().T)
        assert np.abs(scipy.linalg.expm(-1j * h) - coin).max() < 1e-10


def test_hamiltonian_examples():
    assert np.allclose(interpolating_hamiltonian(np.eye(2)), 0)
    k = 1.3
    h = interpolating_hamiltonian(AutomatonSpec("weyl1d").coin(k))
    assert np.allclose(h, np.diag([k, -k]))
    vals = np.linalg.eigvalsh(interpolating_hamiltonian(AutomatonSpec("dirac1d", 0.15).coin(0.0)))
    assert np.allclose(vals, [-np.arcsin(0.15), np.arcsin(0.15)])


def test_hamiltonian_rejects_non_unitary():
    with pytest.raises(ValueError, match="unitary"):
        interpolating_hamiltonian(np.array([[1, 0], [0, 2]]))


@given(st.floats(0, 1), st.floats(-np.pi, np.pi))
def test_dirac1d_dispersion_closed_form(m, k):
    spec = AutomatonSpec("dirac1d", m)
    assert np.isclose(dispersion(spec, k), dirac1d_omega(m, k), atol=1e-7)
    phases = np.sort(np.abs(np.angle(np.linalg.eigvals(spec.coin(k)))))
    assert np.allclose(phases, dispersion(spec, k), atol=1e-7)


def test_dispersion_examples():
    assert np.isclose(dispersion(AutomatonSpec("dirac1d", 0.0), 0.3), 0.3)
    assert np.isclose(dispersion(AutomatonSpec("dirac1d", 0.15), 0.0) / np.pi, 0.047927, atol=1e-6)
    assert np.isclose(dispersion(AutomatonSpec("weyl3d"), np.array([SQRT3 * np.pi / 2, 0, 0])), np.pi / 2)


def test_relativistic_limit():
    ks, ms = np.meshgrid(np.linspace(-1e-2, 1e-2, 41), np.linspace(1e-4, 1e-2, 41))
    exact = np.sqrt(ks**2 + ms**2)
    omega = np.array([[dispersion(AutomatonSpec("dirac1d", m), k) for k, m in zip(kr, mr)] for kr, mr in zip(ks, ms)])
    assert np.max(np.abs(omega - exact) / exact) < 1e-3


@pytest.mark.parametrize("chirality", [1, -1])
def test_weyl3d_small_k_series(chirality):
    rng = np.random.default_rng(5)
    dirs = rng.normal(size=(200, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    spec = AutomatonSpec("weyl3d", chirality=chirality)
    for scale in (1e-3, 1e-4):
        k = scale * dirs
        omega = spec.omega(k)
        assert np.max(np.abs(omega - weyl3d_series(k, chirality)) / omega) < 1e-5
        # the cubic term is the whole first-order deviation from the cone
        assert np.max(np.abs(omega - scale / SQRT3) / (scale / SQRT3)) <= scale / 9 * (1 + 1e-3)


def test_weyl3d_cone_along_axes():
    for axis in range(3):
        k = np.zeros(3)
        k[axis] = 1e-3
        omega = AutomatonSpec("weyl3d").omega(k)
        assert abs(omega - 1e-3 / SQRT3) / (1e-3 / SQRT3) < 1e-5


@given(st.floats(0.05, 0.95), st.floats(-3.0, 3.0))
def test_velocity_and_diffusion_closed_forms(m, k):
    spec = AutomatonSpec("dirac1d", m)
    assert np.isclose(group_velocity(spec, k)[0], dirac1d_velocity(m, k), atol=1e-8)
    assert np.isclose(diffusion_tensor(spec, k)[0, 0], dirac1d_diffusion(m, k), atol=1e-6)


def test_velocity_examples():
    assert np.isclose(group_velocity(AutomatonSpec("dirac1d", 0.0), 0.5)[0], 1.0)
    assert np.isclose(dirac1d_velocity(0.4, 2.0), 0.90153, atol=1e-5)
    assert abs(group_velocity(AutomatonSpec("dirac1d", 0.15), 0.0)[0]) < 1e-12


def test_diffusion_examples():
    assert np.allclose(diffusion_tensor(AutomatonSpec("dirac1d", 1.0), 0.7), 0, atol=1e-8)
    point = dispersion_point(AutomatonSpec("dirac1d", 0.15), 0.0)
    assert np.isclose(point.D[0, 0], np.sqrt(1 - 0.15**2) / 0.15, rtol=1e-6)
    assert np.isclose(point.D[0, 0], 6.59124, atol=1e-5)
    anti = dispersion_point(AutomatonSpec("dirac1d", 0.15), 0.3, branch=-1)
    assert anti.branch == "antiparticle" and anti.v[0] < 0


def test_weyl3d_cone_hessian_has_flat_radial_direction():
    k = 1e-2 * np.ones(3) / SQRT3
    hess = diffusion_tensor(AutomatonSpec("weyl3d"), k, h=1e-4)
    assert np.allclose(hess, hess.T)
    radial = k / np.linalg.norm(k)
    transverse = np.linalg.eigvalsh(hess)
    assert abs(radial @ hess @ radial) < 1e-2 * transverse.max()


def test_degeneracy_is_reported():
    with pytest.raises(DegeneracyError):
        group_velocity(AutomatonSpec("weyl3d"), np.zeros(3))
    with pytest.raises(DegeneracyError):
        diffusion_tensor(AutomatonSpec("weyl1d"), 0.0)
    with pytest.raises(DegeneracyError):
        branch_projectors(np.eye(2))


@pytest.mark.parametrize("spec", MODELS, ids=lambda s: s.model.value)
def test_projector_algebra(spec):
    rng = np.random.default_rng(6)
    period = FUNDAMENTAL_PERIOD[spec.dimension]
    shape = (200,) if spec.dimension == 1 else (200, spec.dimension)
    k = rng.uniform(-period / 2, period / 2, size=shape)
    coin = spec.coin(k)
    p_plus, p_minus = branch_projectors(coin)
    eye = np.eye(spec.internal_dim)
    assert np.abs(p_plus + p_minus - eye).max() < 1e-12
    assert np.abs(p_plus @ p_plus - p_plus).max() < 1e-12
    w = spec.omega(k)[..., None, None]
    assert np.abs(coin @ p_plus - np.exp(-1j * w) * p_plus).max() < 1e-10
    assert np.abs(coin @ p_minus - np.exp(1j * w) * p_minus).max() < 1e-10
    assert np.allclose(np.trace(p_plus, axis1=-2, axis2=-1), spec.internal_dim // 2)


def test_weyl1d_projector():
    p_plus, _ = branch_projectors(AutomatonSpec("weyl1d").coin(0.4))
    assert np.allclose(p_plus, np.diag([1, 0]))


def test_dirac1d_rest_eigenvectors():
    coin = AutomatonSpec("dirac1d", 0.6).coin(0.0)
    p_plus, p_minus = branch_projectors(coin)
    # the coin at rest is 0.8 I + 0.6 i sigma_x, so the branches are sigma_x eigenvectors
    assert np.allclose(p_plus, 0.5 * np.array([[1, -1], [-1, 1]]))
    assert np.allclose(p_minus, 0.5 * np.array([[1, 1], [1, 1]]))
    branches = eigenbranches(coin)
    assert np.isclose(branches[0].frequency, np.arccos(0.8))
    v = branches[0].vector.ravel()
    assert np.isclose(abs(np.vdot(v, np.array([1, -1]) / np.sqrt(2))), 1)


def test_dirac3d_double_degeneracy():
    rng = np.random.default_rng(7)
    spec = AutomatonSpec("dirac3d", 0.3)
    for k in rng.uniform(-2, 2, size=(20, 3)):
        branches = eigenbranches(spec.coin(k))
        assert [b.degeneracy for b in branches] == [2, 2, 2, 2]
        freqs = [b.frequency for b in branches]
        assert np.allclose(freqs, [spec.omega(k)] * 2 + [-spec.omega(k)] * 2)
        vectors = np.stack([b.vector for b in branches], axis=1)
        assert np.allclose(vectors.conj().T @ vectors, np.eye(4), atol=1e-10)


def test_weyl1d_eigenbranches():
    branches = eigenbranches(AutomatonSpec("weyl1d").coin(0.5))
    assert np.isclose(branches[0].frequency, 0.5)
    assert np.allclose(np.abs(branches[0].vector.ravel()), [1, 0])


def test_branch_basis_gauge():
    spec = AutomatonSpec("dirac3d", 0.3)
    p_plus, _ = branch_projectors(spec.coin(np.array([0.3, -0.2, 0.5])))
    basis = branch_basis(p_plus)
    assert np.allclose(basis.conj().T @ basis, np.eye(2), atol=1e-12)
    assert np.allclose(basis @ basis.conj().T, p_plus, atol=1e-12)
    assert np.allclose(branch_basis(p_plus), basis)
