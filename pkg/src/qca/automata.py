"""Coin operators of the Weyl and Dirac automata.

Wave-vectors are plain numpy arrays in dimensionless Planck units. For 1D
models a wave-vector is a scalar, so an array of shape ``(...)`` is a batch
of points. For 2D and 3D models the last axis holds the components:
``(k1, k2)`` on the square lattice and ``(kx, ky, kz)`` on the BCC lattice.
Every coin function is vectorized over the leading batch axes and returns
matrices of shape ``(..., s, s)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# Period of the coin along each coordinate axis. The 3D cell is a cube of
# side 2*sqrt(3)*pi (period of cos(k/sqrt(3))), not the exact BCC zone.
FUNDAMENTAL_PERIOD = {1: 2 * np.pi, 2: 2 * np.pi, 3: 2 * SQRT3 * np.pi}


class Model(str, enum.Enum):
    WEYL1D = "weyl1d"
    WEYL2D = "weyl2d"
    WEYL3D = "weyl3d"
    DIRAC1D = "dirac1d"
    DIRAC2D = "dirac2d"
    DIRAC3D = "dirac3d"

    @property
    def dimension(self) -> int:
        return int(self.value[-2])

    @property
    def is_dirac(self) -> bool:
        return self.value.startswith("dirac")


def _check_chirality(chirality: int) -> int:
    if chirality not in (1, -1):
        raise ValueError(f"chirality must be +1 or -1, got {chirality!r}")
    return chirality


@dataclass(frozen=True)
class AutomatonSpec:
    """Which automaton to run: model, mass (Dirac only) and Weyl chirality.

    The default chirality is -1, i.e. the ``A^-`` Weyl automaton.
    """

    model: Model
    mass: float = 0.0
    chirality: int = -1

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "mass", float(self.mass))
        _check_chirality(self.chirality)
        if not 0.0 <= self.mass <= 1.0:
            raise ValueError(f"mass must lie in [0, 1], got {self.mass}")
        if not self.model.is_dirac and self.mass != 0.0:
            raise ValueError(f"{self.model.value} is massless; got mass={self.mass}")

    @property
    def n_coupling(self) -> float:
        """Hopping weight n = sqrt(1 - m^2)."""
        return float(np.sqrt((1.0 - self.mass) * (1.0 + self.mass)))

    @property
    def dimension(self) -> int:
        return self.model.dimension

    @property
    def internal_dim(self) -> int:
        return 4 if self.model.is_dirac and self.dimension > 1 else 2

    def coin(self, k) -> np.ndarray:
        if self.model.is_dirac:
            return dirac_coin(k, self)
        return weyl_coin(k, self)

    def omega(self, k) -> np.ndarray:
        """Positive frequency branch omega(k) in [0, pi]."""
        n_tilde, d = weyl_vectors(k, self.dimension, self.chirality)
        sin_w = np.linalg.norm(n_tilde, axis=-1)
        if self.model.is_dirac:
            n = self.n_coupling
            return np.arctan2(np.hypot(self.mass, n * sin_w), n * d)
        return np.arctan2(sin_w, d)


def as_wavevector(k, dimension: int) -> np.ndarray:
    """Return ``k`` as a float array with a trailing component axis."""
    k = np.asarray(k, dtype=float)
    if dimension == 1:
        return k[..., None]
    if k.ndim == 0 or k.shape[-1] != dimension:
        raise ValueError(
            f"expected wave-vectors with {dimension} components, got shape {k.shape}"
        )
    return k


def reduce_wavevector(k, dimension: int) -> np.ndarray:
    """Map ``k`` into the centred periodic cell [-P/2, P/2) per axis."""
    period = FUNDAMENTAL_PERIOD[dimension]
    k = np.asarray(k, dtype=float)
    return (k + period / 2) % period - period / 2


def weyl_vectors(k, dimension: int, chirality: int = -1):
    """Return ``(n_tilde, d)`` with the Weyl coin ``A = d I - i n_tilde . sigma``.

    ``n_tilde`` has shape ``(..., 3)`` and ``d`` shape ``(...)``; the pair
    always satisfies ``d**2 + |n_tilde|**2 == 1``.
    """
    kv = as_wavevector(k, dimension)
    if dimension == 1:
        k1 = kv[..., 0]
        zero = np.zeros_like(k1)
        return np.stack([zero, zero, np.sin(k1)], axis=-1), np.cos(k1)
    if dimension == 2:
        # rotated coordinates kx = (k1+k2)/sqrt2, ky = (k1-k2)/sqrt2 enter as k/sqrt2
        hx = (kv[..., 0] + kv[..., 1]) / 2
        hy = (kv[..., 0] - kv[..., 1]) / 2
        cx, sx, cy, sy = np.cos(hx), np.sin(hx), np.cos(hy), np.sin(hy)
        return np.stack([sx * cy, cx * sy, sx * sy], axis=-1), cx * cy
    if dimension == 3:
        nv = n_vector(kv, chirality)
        return nv.n_tilde, nv.d
    raise ValueError(f"unsupported dimension {dimension}")


@dataclass(frozen=True)
class NVector:
    """Auxiliary vectors of the 3D Weyl automaton at one or more wave-vectors."""

    n_tilde: np.ndarray
    d: np.ndarray
    lam: np.ndarray
    n: np.ndarray
    chirality: int


def n_vector(k, chirality: int = -1) -> NVector:
    """Evaluate n~, d, lambda = arccos(d) and n = lambda n~ / sin(lambda).

    ``k`` has shape ``(..., 3)``.
    """
    _check_chirality(chirality)
    kv = as_wavevector(k, 3)
    c = np.cos(kv / SQRT3)
    s = np.sin(kv / SQRT3)
    cx, cy, cz = c[..., 0], c[..., 1], c[..., 2]
    sx, sy, sz = s[..., 0], s[..., 1], s[..., 2]
    # the "-/+" of the upper/lower chirality
    mp = -float(chirality)
    n_tilde = np.stack(
        [
            sx * cy * cz + mp * cx * sy * sz,
            mp * cx * sy * cz - sx * cy * sz,
            cx * cy * sz + mp * sx * sy * cz,
        ],
        axis=-1,
    )
    d = cx * cy * cz - mp * sx * sy * sz
    sin_lam = np.linalg.norm(n_tilde, axis=-1)
    # atan2 is arccos(d) with d clamped, but accurate near d = +-1
    lam = np.arctan2(sin_lam, d)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(sin_lam > 0, lam / np.where(sin_lam > 0, sin_lam, 1.0), 1.0)
    n = n_tilde * scale[..., None]
    # at lambda = pi (A = -I) any |n| = pi works; pick the z axis
    at_pi = (sin_lam == 0) & (d < 0)
    if np.any(at_pi):
        n = np.where(at_pi[..., None], np.array([0.0, 0.0, np.pi]), n)
    return NVector(n_tilde=n_tilde, d=d, lam=lam, n=n, chirality=chirality)


def _su2(n_tilde: np.ndarray, d: np.ndarray) -> np.ndarray:
    return d[..., None, None] * np.eye(2) - 1j * np.einsum("...j,jab->...ab", n_tilde, PAULI)


def weyl_coin(k, spec: AutomatonSpec) -> np.ndarray:
    """2x2 Weyl coin ``A_k`` for the 1D, 2D or 3D Weyl automaton.

    For 1D this is ``diag(exp(-ik), exp(ik))``; in 2D and 3D it is the SU(2)
    matrix ``d I - i n~ . sigma`` (the sign that makes it ``exp(-i n . sigma)``).
    Dirac specs are accepted and yield the Weyl block they are built from.
    """
    n_tilde, d = weyl_vectors(k, spec.dimension, spec.chirality)
    return _su2(n_tilde, d)


def dirac_coin(k, spec: AutomatonSpec) -> np.ndarray:
    """Dirac coin ``[[n A, i m I], [i m I, n A^dagger]]``.

    1D gives the 2x2 ``[[n e^{-ik}, i m], [i m, n e^{ik}]]``; 2D and 3D give 4x4.
    """
    if not spec.model.is_dirac:
        raise ValueError(f"{spec.model.value} is not a Dirac model")
    m, n = spec.mass, spec.n_coupling
    if spec.dimension == 1:
        kk = np.asarray(k, dtype=float)
        out = np.empty(kk.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = n * np.exp(-1j * kk)
        out[..., 1, 1] = n * np.exp(1j * kk)
        out[..., 0, 1] = out[..., 1, 0] = 1j * m
        return out
    a = weyl_coin(k, spec)
    out = np.zeros(a.shape[:-2] + (4, 4), dtype=complex)
    eye = np.eye(2)
    out[..., :2, :2] = n * a
    out[..., 2:, 2:] = n * np.conj(np.swapaxes(a, -1, -2))
    out[..., :2, 2:] = 1j * m * eye
    out[..., 2:, :2] = 1j * m * eye
    return out


def unitarity_residual(coin: np.ndarray) -> np.ndarray:
    """Spectral norm of ``M M^dagger - I`` (batched)."""
    coin = np.asarray(coin)
    gram = coin @ np.conj(np.swapaxes(coin, -1, -2))
    return np.linalg.norm(gram - np.eye(coin.shape[-1]), ord=2, axis=(-2, -1))
