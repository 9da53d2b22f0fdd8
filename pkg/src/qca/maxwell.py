"""Single-mode classical dynamics of the Maxwell automaton.

A photon mode at wave-vector ``k`` is governed by the 3D Weyl vector
``n_half = n(k/2)``. Its frequency is ``2 |n_half|`` and the transverse field
``F`` obeys ``dF/dt = 2 n_half x F``, a rigid rotation about ``n_half``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from qca.automata import SQRT3, n_vector

GRADIENT_STEP = 1e-6
RELATIVE_STEP = 1e-5
TRANSVERSE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PhotonMode:
    k: np.ndarray
    n_half: np.ndarray
    omega: float
    chirality: int = -1

    @property
    def axis(self) -> np.ndarray:
        """Unit vector along ``n_half`` (zero at the cone tip)."""
        norm = np.linalg.norm(self.n_half)
        return self.n_half / norm if norm > 0 else np.zeros(3)


@dataclass(frozen=True, eq=False)
class TransverseField:
    F: np.ndarray
    mode: PhotonMode

    def __post_init__(self):
        F = np.asarray(self.F, dtype=complex)
        if F.shape != (3,):
            raise ValueError(f"F must be a complex 3-vector, got shape {F.shape}")
        object.__setattr__(self, "F", F)

    def transversality(self) -> float:
        return float(abs(np.dot(self.mode.axis, self.F)))


def photon_dispersion(k, chirality: int = -1) -> PhotonMode:
    """Mode data at ``k``: ``n_half = n(k/2)`` and ``omega = 2 |n_half|``."""
    k = np.asarray(k, dtype=float)
    if k.shape != (3,):
        raise ValueError(f"k must be a 3-vector, got shape {k.shape}")
    n_half = n_vector(k / 2, chirality).n
    return PhotonMode(k, n_half, float(2 * np.linalg.norm(n_half)), chirality)


def photon_omega(k, chirality: int = -1) -> np.ndarray:
    """Batched ``omega(k)`` for ``k`` of shape ``(..., 3)``."""
    n_half = n_vector(np.asarray(k, dtype=float) / 2, chirality).n
    return 2 * np.linalg.norm(n_half, axis=-1)


def _gradient(k, chirality, h):
    k = np.asarray(k, dtype=float)
    shifts = h * np.eye(3)
    plus = photon_omega(k + shifts, chirality)
    minus = photon_omega(k - shifts, chirality)
    return (plus - minus) / (2 * h)


def light_speed(k, chirality: int = -1, h: float = GRADIENT_STEP) -> float:
    """Group speed ``|grad omega|`` in units where it tends to 1 at small ``k``.

    On the BCC lattice ``omega ~ |k| / sqrt(3)``, so the raw gradient is
    rescaled by sqrt(3).
    """
    k = np.asarray(k, dtype=float)
    norm = np.linalg.norm(k)
    if norm == 0:
        raise ValueError("light speed is undefined at k = 0 (cone tip)")
    # the stencil must not straddle the cone tip
    h = min(h, RELATIVE_STEP * norm)
    return float(SQRT3 * np.linalg.norm(_gradient(k, chirality, h)))


def transverse_basis(mode: PhotonMode):
    """Real orthonormal pair ``(e1, e2)`` spanning the plane normal to ``n_half``."""
    axis = mode.axis
    if not np.any(axis):
        raise ValueError("no transverse plane at k = 0")
    ref = np.eye(3)[int(np.argmin(np.abs(axis)))]
    e1 = ref - np.dot(ref, axis) * axis
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return e1, e2


def circular_modes(mode: PhotonMode):
    """Helicity vectors ``e_plus, e_minus`` with ``evolve_mode`` phases ``e^{-+i omega t}``."""
    e1, e2 = transverse_basis(mode)
    e_plus = (e1 + 1j * e2) / np.sqrt(2)
    e_minus = (e1 - 1j * e2) / np.sqrt(2)
    return e_plus, e_minus


def _rotate(v, axis, angle):
    cos, sin = np.cos(angle), np.sin(angle)
    return v * cos + np.cross(axis, v) * sin + axis * np.dot(axis, v) * (1 - cos)


def evolve_mode(field: TransverseField, t: float) -> TransverseField:
    """Exact solution of ``dF/dt = 2 n_half x F`` for real ``t``.

    A rotation about ``n_half`` by ``omega * t`` in the right-handed sense,
    applied to real and imaginary parts separately (Rodrigues formula).
    """
    mode = field.mode
    if mode.omega == 0:
        return field
    if field.transversality() > TRANSVERSE_TOL * max(1.0, np.linalg.norm(field.F)):
        raise ValueError("field is not transverse to n_half")
    angle = mode.omega * t
    axis = mode.axis
    F = _rotate(field.F.real, axis, angle) + 1j * _rotate(field.F.imag, axis, angle)
    return TransverseField(F, mode)


def fields_from_F(field: TransverseField):
    """Classical single-mode fields ``E = 2 |n| Re F`` and ``B = 2 |n| Im F``."""
    scale = 2 * np.linalg.norm(field.mode.n_half)
    return scale * field.F.real, scale * field.F.imag


def continuum_axis(k, chirality: int = -1) -> np.ndarray:
    """Unit direction that ``n_half`` approaches as ``k -> 0``.

    For chirality -1 this is ``k`` itself; the other chirality flips the sign
    of the leading y term, so its limit is ``k`` reflected in the xz plane.
    """
    k = np.asarray(k, dtype=float)
    norm = np.linalg.norm(k)
    if norm == 0:
        raise ValueError("no continuum axis at k = 0")
    image = k * np.array([1.0, -1.0, 1.0]) if chirality == 1 else k
    return image / norm


def polarization_tilt(k, chirality: int = -1) -> float:
    """Angle (radians) between ``n_half`` and its continuum direction ``continuum_axis(k)``."""
    k = np.asarray(k, dtype=float)
    if np.linalg.norm(k) == 0:
        raise ValueError("polarization tilt is undefined at k = 0")
    axis = photon_dispersion(k, chirality).axis
    khat = continuum_axis(k, chirality)
    # atan2 keeps precision for tiny angles where arccos does not
    return float(np.arctan2(np.linalg.norm(np.cross(axis, khat)), np.dot(axis, khat)))


def vacuum_rotation(F, k, t, chirality: int = -1) -> np.ndarray:
    """Continuum reference: rotation of ``F`` about ``continuum_axis(k)`` at frequency ``|k| / sqrt(3)``."""
    k = np.asarray(k, dtype=float)
    axis = continuum_axis(k, chirality)
    angle = np.linalg.norm(k) / SQRT3 * t
    F = np.asarray(F, dtype=complex)
    return _rotate(F.real, axis, angle) + 1j * _rotate(F.imag, axis, angle)


def write_surface_csv(path, wavevectors, chirality: int = -1) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kx", "ky", "kz", "omega", "c", "tilt"])
        for k in np.asarray(wavevectors, dtype=float):
            mode = photon_dispersion(k, chirality)
            row = list(k) + [mode.omega, light_speed(k, chirality), polarization_tilt(k, chirality)]
            writer.writerow([repr(float(v)) for v in row])
