"""Finite periodic lattices, wavepackets and exact automaton evolution.

The discrete Fourier convention is ``psi(x) = N^{-d/2} sum_k e^{i k.x} psi(k)``,
matching ``|k> = sum_x e^{i k.x} |x>``. A momentum-space factor ``e^{-ik}``
therefore translates a component by +1 site.

Anything with ``coin(k)``, ``omega(k)``, ``dimension`` and ``internal_dim``
can act as the automaton here (``AutomatonSpec`` or the position-space
scattering walk).
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import hermite

from qca.automata import FUNDAMENTAL_PERIOD
from qca.spectral import branch_basis, branch_projectors

NORM_TOL = 1e-10
LEAKAGE_TOL = 1e-12
DEFAULT_POINTS = {1: 2**14, 2: 2**9, 3: 2**5}


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform periodic wave-vector grid, ``points_per_axis**dimension`` points."""

    dimension: int
    points_per_axis: int

    @classmethod
    def default(cls, dimension: int) -> "MomentumGrid":
        return cls(dimension, DEFAULT_POINTS[dimension])

    @property
    def period(self) -> float:
        return FUNDAMENTAL_PERIOD[self.dimension]

    @property
    def spacing(self) -> float:
        return self.period / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dimension

    def axis(self) -> np.ndarray:
        """Wave-vector values along one axis, in FFT order."""
        n = self.points_per_axis
        return self.period * np.fft.fftfreq(n)

    def wavevectors(self) -> np.ndarray:
        """Grid wave-vectors: ``(N,)`` in 1D, ``(N,)*d + (d,)`` otherwise."""
        ax = self.axis()
        if self.dimension == 1:
            return ax
        mesh = np.meshgrid(*([ax] * self.dimension), indexing="ij")
        return np.stack(mesh, axis=-1)

    def sites(self) -> np.ndarray:
        return np.arange(self.points_per_axis)


@dataclass(frozen=True, eq=False)
class LatticeState:
    """One-particle state on a periodic lattice, shape ``grid.shape + (s,)``."""

    amplitudes: np.ndarray
    grid: MomentumGrid
    representation: str = "momentum"
    step: int = 0

    def __post_init__(self):
        if self.representation not in ("momentum", "position"):
            raise ValueError(f"unknown representation {self.representation!r}")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape[:-1] != self.grid.shape:
            raise ValueError(f"amplitudes {amps.shape} do not fit grid {self.grid.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def internal_dim(self) -> int:
        return self.amplitudes.shape[-1]

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def with_amplitudes(self, amplitudes, **changes) -> "LatticeState":
        return replace(self, amplitudes=amplitudes, **changes)


def _fft_axes(grid):
    return tuple(range(grid.dimension))


def to_position(state: LatticeState) -> LatticeState:
    if state.representation == "position":
        return state
    if state.grid.dimension == 3:
        raise ValueError("3D states live on the BCC lattice; only momentum scans are supported")
    amps = np.fft.ifftn(state.amplitudes, axes=_fft_axes(state.grid), norm="ortho")
    return state.with_amplitudes(amps, representation="position")


def to_momentum(state: LatticeState) -> LatticeState:
    if state.representation == "momentum":
        return state
    amps = np.fft.fftn(state.amplitudes, axes=_fft_axes(state.grid), norm="ortho")
    return state.with_amplitudes(amps, representation="momentum")


@dataclass(frozen=True)
class PacketSpec:
    """Wavepacket ``g(k) (c+ u+(k) + c- u-(k))`` around carrier ``k0``.

    ``sigma`` is the standard deviation of the amplitude ``g`` in wave-vector
    space, so the position-space amplitude has width ~ ``1/sigma``. ``x0``
    places the packet centre on the lattice. A ``hermite`` list switches the
    envelope to ``sum_j h_j H_j((k-k0)/sigma) exp(-(k-k0)^2 / 2 sigma^2)``
    (1D only). ``spin`` picks the basis vector inside a degenerate branch.
    """

    k0: object
    sigma: float
    c_plus: complex = 1.0
    c_minus: complex = 0.0
    x0: object = 0.0
    hermite: tuple[float, ...] | None = None
    spin: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        weight = abs(self.c_plus) ** 2 + abs(self.c_minus) ** 2
        if abs(weight - 1.0) > 1e-9:
            raise ValueError(f"|c+|^2 + |c-|^2 must be 1, got {weight}")
        if self.hermite is not None:
            object.__setattr__(self, "hermite", tuple(float(h) for h in self.hermite))


def _wrap(dk, period):
    return (dk + period / 2) % period - period / 2


def _as_components(value, dimension):
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.shape != (dimension,):
        raise ValueError(f"expected {dimension} components, got {arr.tolist()}")
    return arr


def envelope(spec: PacketSpec, grid: MomentumGrid) -> np.ndarray:
    """Unnormalized envelope ``g(k)`` on the grid (without the x0 phase)."""
    k = grid.wavevectors()
    k0 = _as_components(spec.k0, grid.dimension)
    if grid.dimension == 1:
        delta = _wrap(k - k0[0], grid.period)[..., None]
    else:
        delta = _wrap(k - k0, grid.period)
    r2 = np.sum(delta**2, axis=-1)
    g = np.exp(-r2 / (2 * spec.sigma**2))
    if spec.hermite is not None:
        if grid.dimension != 1:
            raise ValueError("Hermite envelopes are only defined in 1D")
        g = g * hermite.hermval(delta[..., 0] / spec.sigma, spec.hermite)
    return g


def _check_leakage(g, grid):
    # envelope must have died out at the cell boundary
    mag = np.abs(g)
    edge = np.zeros(grid.shape, dtype=bool)
    for axis in range(grid.dimension):
        idx = [slice(None)] * grid.dimension
        idx[axis] = grid.points_per_axis // 2
        edge[tuple(idx)] = True
    leak = mag[edge].max() / mag.max()
    if leak > LEAKAGE_TOL:
        raise ValueError(
            f"sigma too large for the cell: envelope {leak:.2e} of peak at the boundary"
        )


@functools.lru_cache(maxsize=8)
def grid_spectrum(automaton, grid: MomentumGrid):
    """``(omega, P_plus, P_minus)`` of ``automaton`` on every grid mode (cached)."""
    k = grid.wavevectors()
    omega = np.asarray(automaton.omega(k), dtype=float)
    p_plus, p_minus = branch_projectors(automaton.coin(k), strict=False)
    for arr in (omega, p_plus, p_minus):
        arr.setflags(write=False)
    return omega, p_plus, p_minus


def smooth_branch_basis(projectors: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Basis of each ``range(P)`` closest to ``reference`` (Loewdin orthonormalization).

    ``P B (B^dagger P B)^{-1/2}`` varies smoothly with ``P``, so a packet
    built on it stays localized; Gram-Schmidt against fixed unit vectors
    would switch reference vector somewhere in k and leave a long tail.
    """
    cand = projectors @ reference
    gram = np.conj(reference.T) @ cand
    vals, vecs = np.linalg.eigh(gram)
    if vals.min() < 1e-8:
        raise ValueError("branch gauge is singular on the packet support; narrow the packet")
    inv_sqrt = np.einsum("...ij,...j,...kj->...ik", vecs, vals**-0.5, np.conj(vecs))
    return cand @ inv_sqrt


def make_packet(spec: PacketSpec, grid: MomentumGrid, automaton) -> LatticeState:
    """Momentum-space packet ``g(k) [c+ u+(k) + c- u-(k)]``, normalized on the grid.

    The eigenvector phases follow the branch basis at the carrier ``k0``
    and vary smoothly with ``k`` (see ``smooth_branch_basis``).
    """
    if grid.dimension != automaton.dimension:
        raise ValueError("grid and automaton dimensions differ")
    g = envelope(spec, grid)
    _check_leakage(g, grid)
    # a scalar zero is the default placement in any dimension
    x0 = np.zeros(grid.dimension) if np.ndim(spec.x0) == 0 and spec.x0 == 0 else _as_components(spec.x0, grid.dimension)
    k = grid.wavevectors()
    phase = np.exp(-1j * (k * x0[0] if grid.dimension == 1 else k @ x0))
    g = g * phase

    omega, p_plus, p_minus = grid_spectrum(automaton, grid)
    weight = np.abs(g) ** 2
    degenerate = (omega < 1e-10) | (np.pi - omega < 1e-10)
    if weight[degenerate].sum() > LEAKAGE_TOL * weight.sum():
        raise ValueError("packet has weight on a band-degeneracy point (omega = 0 or pi)")
    g = np.where(degenerate, 0.0, g)

    s = automaton.internal_dim
    rank = s // 2
    if not 0 <= spec.spin < rank:
        raise ValueError(f"spin index {spec.spin} out of range for {rank}-fold branches")
    live = weight > LEAKAGE_TOL * weight.max()
    k0 = _as_components(spec.k0, grid.dimension)
    carrier = branch_projectors(automaton.coin(k0[0] if grid.dimension == 1 else k0))
    amps = np.zeros(grid.shape + (s,), dtype=complex)
    for c, proj, ref in zip((spec.c_plus, spec.c_minus), (p_plus, p_minus), carrier):
        if c == 0:
            continue
        basis = smooth_branch_basis(proj[live], branch_basis(ref, rank=rank))[..., spec.spin]
        amps[live] += c * g[live][..., None] * basis
    amps /= np.linalg.norm(amps)
    return LatticeState(amps, grid, "momentum", 0)


def apply_phases(state: LatticeState, omega, p_plus, p_minus, t) -> np.ndarray:
    """Momentum amplitudes after ``t`` steps: ``(e^{-iwt} P+ + e^{iwt} P-) psi``."""
    psi = state.amplitudes
    plus = np.einsum("...ij,...j->...i", p_plus, psi)
    minus = psi - plus
    return plus * np.exp(-1j * omega * t)[..., None] + minus * np.exp(1j * omega * t)[..., None]


def evolve_exact(state: LatticeState, t: int, automaton) -> LatticeState:
    """Apply the automaton ``t`` times (any integer, negative allowed)."""
    t = int(t)
    back = state.representation
    mom = to_momentum(state)
    omega, p_plus, p_minus = grid_spectrum(automaton, mom.grid)
    out = mom.with_amplitudes(apply_phases(mom, omega, p_plus, p_minus, t), step=mom.step + t)
    return to_position(out) if back == "position" else out


def project_branch(state: LatticeState, automaton, branch: int = 1) -> LatticeState:
    """Positive (``branch=+1``) or negative frequency component of ``state``."""
    mom = to_momentum(state)
    _, p_plus, p_minus = grid_spectrum(automaton, mom.grid)
    proj = p_plus if branch > 0 else p_minus
    return mom.with_amplitudes(np.einsum("...ij,...j->...i", proj, mom.amplitudes))


def translate(state: LatticeState, shift) -> LatticeState:
    """Shift a state by an integer lattice vector."""
    pos = to_position(state)
    shift = np.atleast_1d(np.asarray(shift, dtype=int))
    amps = np.roll(pos.amplitudes, tuple(shift), axis=_fft_axes(pos.grid))
    out = pos.with_amplitudes(amps)
    return out if state.representation == "position" else to_momentum(out)


def unwrapped_coordinates(prob_axis: np.ndarray) -> tuple[np.ndarray, float]:
    """Site coordinates unwrapped around the circular centroid of ``prob_axis``.

    Returns ``(coords, centre)``; ``centre`` lies in ``[-N/2, N/2)`` and
    coords in ``[centre - N/2, centre + N/2)``.
    """
    n = prob_axis.shape[-1]
    x = np.arange(n)
    phase = np.sum(prob_axis * np.exp(2j * np.pi * x / n), axis=-1)
    centre = np.round(np.angle(phase) * n / (2 * np.pi))
    centre = (np.asarray(centre) + n // 2) % n - n // 2
    coords = centre[..., None] + (x - centre[..., None] + n // 2) % n - n // 2
    return coords, centre


def _marginals(prob: np.ndarray, dimension: int):
    axes = tuple(range(dimension))
    return [prob.sum(axis=tuple(a for a in axes if a != i)) for i in axes]


def _check_width(marginal, coords, centre, n):
    outside = marginal[np.abs(coords - centre) >= n / 4].sum() / marginal.sum()
    if outside > 1e-6:
        raise ValueError(
            f"packet too wide for the lattice: {outside:.2e} of the mass is beyond N/4"
        )


def position_mean(state: LatticeState) -> np.ndarray:
    """<X> per axis, in coordinates unwrapped around the packet."""
    pos = to_position(state)
    prob = np.sum(np.abs(pos.amplitudes) ** 2, axis=-1)
    total = prob.sum()
    out = []
    for marginal in _marginals(prob, pos.grid.dimension):
        coords, centre = unwrapped_coordinates(marginal)
        _check_width(marginal, coords, centre, marginal.size)
        out.append(np.sum(marginal * coords) / total)
    return np.array(out)


def position_variance(state: LatticeState) -> float:
    """<X^2> - <X>^2 summed over axes."""
    pos = to_position(state)
    prob = np.sum(np.abs(pos.amplitudes) ** 2, axis=-1)
    total = prob.sum()
    var = 0.0
    for marginal in _marginals(prob, pos.grid.dimension):
        coords, centre = unwrapped_coordinates(marginal)
        _check_width(marginal, coords, centre, marginal.size)
        mean = np.sum(marginal * coords) / total
        var += np.sum(marginal * (coords - mean) ** 2) / total
    return float(var)


@dataclass
class Snapshot:
    """Helper for exporting a state as CSV rows plus a JSON header."""

    state: LatticeState
    meta: dict = field(default_factory=dict)

    def header(self) -> dict:
        return {
            "grid": {"dimension": self.state.grid.dimension, "points_per_axis": self.state.grid.points_per_axis},
            "representation": "position",
            "step": self.state.step,
            **self.meta,
        }

    def columns(self) -> list[str]:
        d = self.state.grid.dimension
        cols = [f"x{i + 1}" for i in range(d)] if d > 1 else ["x"]
        for c in range(self.state.internal_dim):
            cols += [f"re{c}", f"im{c}"]
        return cols

    def rows(self):
        pos = to_position(self.state)
        amps = pos.amplitudes
        for idx in np.ndindex(*pos.grid.shape):
            row = list(idx)
            for c in range(amps.shape[-1]):
                a = amps[idx + (c,)]
                row += [a.real, a.imag]
            yield row

    def header_json(self) -> str:
        return json.dumps(self.header(), sort_keys=True)
