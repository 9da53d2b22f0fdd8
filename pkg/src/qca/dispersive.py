"""Second-order (narrowband) dispersive approximation of automaton evolution.

Around the carrier ``k0`` the phase ``omega(k)`` is replaced by its Taylor
polynomial ``omega0 + v.dk + dk.D.dk / 2``. The approximate evolution is
applied as a phase in momentum space, which solves the corresponding
drift-diffusion Schroedinger equation exactly on the grid.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from qca.automata import as_wavevector
from qca.packets import (
    LatticeState,
    MomentumGrid,
    PacketSpec,
    _wrap,
    evolve_exact,
    grid_spectrum,
    make_packet,
    to_momentum,
)
from qca.spectral import diffusion_tensor, group_velocity

NARROWBAND_RADIUS = 4.0
NARROWBAND_MASS = 1 - 1e-6
BRANCH_PURITY_TOL = 1e-8


@dataclass(frozen=True)
class DispersiveModel:
    """Taylor data of the chosen branch at ``k0``."""

    k0: np.ndarray
    omega0: float
    v: np.ndarray
    D: np.ndarray
    branch: int = 1
    sigma: float | None = None

    @classmethod
    def from_automaton(cls, automaton, k0, branch: int = 1, sigma=None) -> "DispersiveModel":
        kv = np.atleast_1d(np.asarray(k0, dtype=float))
        omega0 = float(automaton.omega(kv[0] if automaton.dimension == 1 else kv))
        return cls(
            k0=kv,
            omega0=omega0,
            v=group_velocity(automaton, kv),
            D=diffusion_tensor(automaton, kv),
            branch=1 if branch > 0 else -1,
            sigma=sigma,
        )

    def phase(self, k: np.ndarray, period: float) -> np.ndarray:
        """Approximate positive frequency on grid points ``k``."""
        kv = as_wavevector(k, len(self.k0))
        dk = _wrap(kv - self.k0, period)
        return self.omega0 + dk @ self.v + 0.5 * np.einsum("...i,ij,...j->...", dk, self.D, dk)


def _check_narrowband(state: LatticeState, model: DispersiveModel):
    if model.sigma is None:
        return
    grid = state.grid
    k = as_wavevector(grid.wavevectors(), grid.dimension)
    dist = np.linalg.norm(_wrap(k - model.k0, grid.period), axis=-1)
    weight = np.sum(np.abs(state.amplitudes) ** 2, axis=-1)
    inside = weight[dist <= NARROWBAND_RADIUS * model.sigma].sum() / weight.sum()
    if inside < NARROWBAND_MASS:
        raise ValueError(
            f"state is not narrowband: only {inside:.8f} of the mass within "
            f"{NARROWBAND_RADIUS:g} sigma of k0"
        )


def _check_single_branch(state: LatticeState, model: DispersiveModel, automaton):
    if automaton is None:
        return
    _, p_plus, p_minus = grid_spectrum(automaton, state.grid)
    other = p_minus if model.branch > 0 else p_plus
    leak = np.linalg.norm(np.einsum("...ij,...j->...i", other, state.amplitudes))
    if leak > BRANCH_PURITY_TOL:
        raise ValueError(f"state mixes branches (off-branch norm {leak:.2e})")


def dispersive_evolve(state: LatticeState, t, model: DispersiveModel, automaton=None) -> LatticeState:
    """Evolve ``state`` for ``t`` steps with the quadratic dispersion of ``model``.

    Passing ``automaton`` enables the single-branch check; giving the model a
    ``sigma`` enables the narrowband check.
    """
    mom = to_momentum(state)
    _check_narrowband(mom, model)
    _check_single_branch(mom, model, automaton)
    phase = model.phase(mom.grid.wavevectors(), mom.grid.period)
    amps = mom.amplitudes * np.exp(-1j * model.branch * phase * t)[..., None]
    return mom.with_amplitudes(amps, step=mom.step + int(t))


@dataclass(frozen=True)
class Comparison:
    t: int
    l2_error: float
    overlap: float


def compare_evolutions(automaton, spec: PacketSpec, t, grid: MomentumGrid | None = None):
    """Distance between exact and dispersive evolution of the same packet.

    The packet must sit on one branch (``c_minus == 0`` or ``c_plus == 0``).
    ``t`` may be an int (returns one ``Comparison``) or a sequence of times
    (returns a list).
    """
    grid = grid or MomentumGrid.default(automaton.dimension)
    if spec.c_minus == 0:
        branch = 1
    elif spec.c_plus == 0:
        branch = -1
    else:
        raise ValueError("the dispersive approximation is defined per branch; got a mixed packet")
    state = make_packet(spec, grid, automaton)
    sigma = spec.sigma if spec.hermite is None else None
    model = DispersiveModel.from_automaton(automaton, spec.k0, branch, sigma=sigma)
    times = [t] if np.isscalar(t) else list(t)
    out = []
    for tt in times:
        exact = evolve_exact(state, tt, automaton).amplitudes
        approx = dispersive_evolve(state, tt, model).amplitudes
        out.append(
            Comparison(
                t=int(tt),
                l2_error=float(np.linalg.norm(exact - approx)),
                overlap=float(min(1.0, abs(np.vdot(exact, approx)))),
            )
        )
    return out[0] if np.isscalar(t) else out


def write_trace(path, comparisons) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "l2_error", "overlap"])
        for c in comparisons:
            writer.writerow([c.t, repr(c.l2_error), repr(c.overlap)])
