import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import PAULI, su2_exp

from qca.automata import (
    FUNDAMENTAL_PERIOD,
    SQRT3,
    AutomatonSpec,
    n_vector,
    unitarity_residual,
    weyl_coin,
    weyl_vectors,
)

MODELS = [
    AutomatonSpec("weyl1d"),
    AutomatonSpec("weyl2d"),
    AutomatonSpec("weyl3d", chirality=-1),
    AutomatonSpec("weyl3d", chirality=1),
    AutomatonSpec("dirac1d", 0.3),
    AutomatonSpec("dirac2d", 0.3),
    AutomatonSpec("dirac3d", 0.3, chirality=1),
]

angle = st.floats(-20, 20, allow_nan=False)


def random_k(spec, rng, count):
    period = FUNDAMENTAL_PERIOD[spec.dimension]
    shape = (count,) if spec.dimension == 1 else (count, spec.dimension)
    return rng.uniform(-period / 2, period / 2, size=shape)


@pytest.mark.parametrize("spec", MODELS, ids=lambda s: f"{s.model.value}{s.chirality:+d}")
def test_unitarity_on_random_wavevectors(spec):
    rng = np.random.default_rng(1)
    coins = spec.coin(random_k(spec, rng, 10_000))
    assert coins.shape == (10_000, spec.internal_dim, spec.internal_dim)
    assert unitarity_residual(coins).max() < 1e-12


@pytest.mark.parametrize("chirality", [1, -1])
def test_weyl3d_normalization(chirality):
    k = random_k(AutomatonSpec("weyl3d"), np.random.default_rng(2), 10_000)
    n_tilde, d = weyl_vectors(k, 3, chirality)
    assert np.max(np.abs(d**2 + np.sum(n_tilde**2, axis=-1) - 1)) < 1e-12


@pytest.mark.parametrize("chirality", [1, -1])
def test_weyl3d_coin_is_exponential_of_n(chirality):
    spec = AutomatonSpec("weyl3d", chirality=chirality)
    rng = np.random.default_rng(3)
    for k in random_k(spec, rng, 50):
        nv = n_vector(k, chirality)
        assert np.allclose(spec.coin(k), su2_exp(nv.n), atol=1e-12)
        assert np.isclose(np.linalg.norm(nv.n), nv.lam)


@pytest.mark.parametrize("chirality", [1, -1])
def test_weyl3d_origin(chirality):
    nv = n_vector(np.zeros(3), chirality)
    assert np.allclose(nv.n_tilde, 0) and nv.d == 1 and nv.lam == 0
    assert np.allclose(AutomatonSpec("weyl3d", chirality=chirality).coin(np.zeros(3)), np.eye(2))


def test_weyl3d_axis_point():
    nv = n_vector(np.array([SQRT3 * np.pi / 2, 0, 0]), -1)
    assert np.allclose(nv.n_tilde, [1, 0, 0], atol=1e-15)
    assert abs(nv.d) < 1e-15
    assert np.isclose(nv.lam, np.pi / 2)


def test_weyl3d_corner_where_coin_is_minus_identity():
    k = np.array([SQRT3 * np.pi, 0, 0])
    nv = n_vector(k, -1)
    assert np.isclose(nv.lam, np.pi)
    assert np.allclose(su2_exp(nv.n), -np.eye(2), atol=1e-12)


def test_weyl2d_diagonal_point():
    coin = AutomatonSpec("weyl2d").coin(np.array([np.pi / 2, np.pi / 2]))
    assert np.allclose(coin, -1j * PAULI[0], atol=1e-15)


def test_weyl1d_diagonal_phases():
    k = 0.7
    assert np.allclose(AutomatonSpec("weyl1d").coin(k), np.diag([np.exp(-1j * k), np.exp(1j * k)]))
    assert np.allclose(AutomatonSpec("weyl1d").coin(0.0), np.eye(2))


def test_dirac1d_entries():
    coin = AutomatonSpec("dirac1d", 0.6).coin(np.pi / 3)
    expected = np.array([[0.8 * np.exp(-1j * np.pi / 3), 0.6j], [0.6j, 0.8 * np.exp(1j * np.pi / 3)]])
    assert np.allclose(coin, expected, atol=1e-15)
    assert unitarity_residual(coin) < 1e-12


def test_dirac1d_pure_mass():
    for k in (0.0, 1.0, -2.5):
        assert np.allclose(AutomatonSpec("dirac1d", 1.0).coin(k), [[0, 1j], [1j, 0]])


@pytest.mark.parametrize("model", ["dirac2d", "dirac3d"])
def test_massless_dirac_decouples(model):
    spec = AutomatonSpec(model, 0.0)
    k = np.array([0.3, -0.4, 1.1][: spec.dimension])
    a = weyl_coin(k, spec)
    coin = spec.coin(k)
    assert np.allclose(coin[:2, :2], a) and np.allclose(coin[2:, 2:], a.conj().T)
    assert np.allclose(coin[:2, 2:], 0) and np.allclose(coin[2:, :2], 0)
    assert np.allclose(spec.coin(np.zeros(spec.dimension)), np.eye(4))


def test_dirac_blocks():
    spec = AutomatonSpec("dirac3d", 0.6)
    k = np.array([0.2, 0.5, -0.9])
    coin = spec.coin(k)
    a = weyl_coin(k, spec)
    assert np.allclose(coin[:2, :2], 0.8 * a)
    assert np.allclose(coin[:2, 2:], 0.6j * np.eye(2))


@given(angle, angle, angle)
def test_su2_determinant_and_periodicity(a, b, c):
    for spec, k in ((AutomatonSpec("weyl3d"), np.array([a, b, c])), (AutomatonSpec("weyl2d"), np.array([a, b]))):
        coin = spec.coin(k)
        assert np.isclose(np.linalg.det(coin), 1.0, atol=1e-12)
        period = FUNDAMENTAL_PERIOD[spec.dimension]
        for axis in range(spec.dimension):
            shifted = k.copy()
            shifted[axis] += period
            assert np.allclose(spec.coin(shifted), coin, atol=1e-12)


@given(angle, angle, angle, st.sampled_from([1, -1]))
def test_chiralities_are_distinct_unitaries(a, b, c, chirality):
    k = np.array([a, b, c])
    n_tilde, d = weyl_vectors(k, 3, chirality)
    assert np.isclose(d**2 + n_tilde @ n_tilde, 1.0, atol=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError, match="mass"):
        AutomatonSpec("dirac1d", 1.5)
    with pytest.raises(ValueError, match="massless"):
        AutomatonSpec("weyl3d", 0.2)
    with pytest.raises(ValueError, match="chirality"):
        AutomatonSpec("weyl3d", chirality=0)
    with pytest.raises(ValueError):
        AutomatonSpec("weyl4d")


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="components"):
        AutomatonSpec("weyl3d").coin(np.array([0.1, 0.2]))
    with pytest.raises(ValueError, match="not a Dirac"):
        from qca.automata import dirac_coin

        dirac_coin(0.1, AutomatonSpec("weyl1d"))


def test_spec_properties():
    spec = AutomatonSpec("dirac3d", 0.6)
    assert spec.internal_dim == 4 and spec.dimension == 3
    assert np.isclose(spec.n_coupling, 0.8)
    assert AutomatonSpec("dirac1d", 0.6).internal_dim == 2
