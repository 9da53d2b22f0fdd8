"""1D Dirac walk in position space with a site-dependent phase potential.

One step of the walk is

    c1'(y) = e^{-i phi(y)} [n c1(y+1) - i m c2(y)]
    c2'(y) = e^{-i phi(y)} [-i m c1(y) + n c2(y-1)]

whose momentum-space coin ``[[n e^{ik}, -im], [-im, n e^{-ik}]]`` is the
``AutomatonSpec`` coin at ``-k`` conjugated by sigma_z. The two share the
dispersion, so only packet construction needs the walk's own eigenvectors.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from qca.packets import LatticeState, MomentumGrid, PacketSpec, make_packet, to_position

TWO_PI = 2 * np.pi
BUFFER_WIDTHS = 4.0
SEPARATION_WIDTHS = 6.0
CLEAR_TOL = 1e-4
DEFAULT_MAX_STEPS = 10000
CHUNK_STEPS = 250


@dataclass(frozen=True)
class ScatteringWalk:
    """Automaton-like view of the position-space walk (for packet building)."""

    mass: float

    dimension = 1
    internal_dim = 2

    def __post_init__(self):
        if not 0.0 < self.mass < 1.0:
            raise ValueError(f"mass must lie in (0, 1), got {self.mass}")

    @property
    def n_coupling(self) -> float:
        return math.sqrt(1 - self.mass * self.mass)

    def coin(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        n, m = self.n_coupling, self.mass
        out = np.empty(k.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = n * np.exp(1j * k)
        out[..., 1, 1] = n * np.exp(-1j * k)
        out[..., 0, 1] = out[..., 1, 0] = -1j * m
        return out

    def omega(self, k) -> np.ndarray:
        n = self.n_coupling
        k = np.asarray(k, dtype=float)
        return np.arctan2(np.hypot(self.mass, n * np.sin(k)), n * np.cos(k))

    def velocity(self, k) -> np.ndarray:
        n = self.n_coupling
        return n * np.sin(k) / np.hypot(self.mass, n * np.sin(k))


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """Phase potential ``phi(x)``: a step ``height * theta(x - edge)`` or explicit values."""

    kind: str = "step"
    height: float = 0.0
    edge: int = 0
    values: np.ndarray | None = None

    @classmethod
    def step(cls, height: float, edge: int) -> "PotentialProfile":
        return cls("step", float(height) % TWO_PI, int(edge))

    @classmethod
    def custom(cls, values) -> "PotentialProfile":
        vals = np.mod(np.asarray(values, dtype=float), TWO_PI)
        vals.setflags(write=False)
        return cls("custom", values=vals)

    def phases(self, size: int) -> np.ndarray:
        if self.kind == "step":
            return np.where(np.arange(size) >= self.edge, self.height, 0.0)
        if self.kind == "custom":
            if self.values.shape != (size,):
                raise ValueError(f"profile has {self.values.shape} sites, lattice has {size}")
            return np.array(self.values)
        raise ValueError(f"unknown profile kind {self.kind!r}")


def _walk(c1, c2, n, m, phase):
    up = np.empty_like(c1)
    up[:-1] = c1[1:]
    up[-1] = c1[0]
    down = np.empty_like(c2)
    down[1:] = c2[:-1]
    down[0] = c2[-1]
    new1 = n * up - 1j * m * c2
    new2 = n * down - 1j * m * c1
    return new1 * phase, new2 * phase


def step_with_potential(state: LatticeState, profile: PotentialProfile, mass: float) -> LatticeState:
    """One step of the potential walk on a 1D position-space state."""
    if state.grid.dimension != 1:
        raise ValueError("the potential walk is one-dimensional")
    pos = to_position(state)
    n = math.sqrt(1 - mass * mass)
    phase = np.exp(-1j * profile.phases(pos.grid.points_per_axis))
    c1, c2 = _walk(pos.amplitudes[:, 0], pos.amplitudes[:, 1], n, mass, phase)
    return pos.with_amplitudes(np.stack([c1, c2], axis=-1), step=pos.step + 1)


@dataclass(frozen=True)
class Transmission:
    k_prime: float | None
    regime: str
    v_transmitted: float
    omega_shifted: float


def transmitted_wavevector(m: float, k0: float, phi: float) -> Transmission:
    """Carrier of the transmitted packet from ``omega(k') = omega(k0) - phi``.

    The shifted frequency is taken modulo 2 pi into (-pi, pi]. A negative
    value lands on the lower band (Klein regime); there the right-moving
    solution has ``k' < 0``. Frequencies inside a band gap give no solution.
    """
    if not 0.0 < m < 1.0:
        raise ValueError(f"mass must lie in (0, 1), got {m}")
    n = math.sqrt(1 - m * m)
    omega0 = math.atan2(math.hypot(m, n * math.sin(k0)), n * math.cos(k0))
    w = omega0 - phi
    w = w - TWO_PI * math.floor((w + math.pi) / TWO_PI)
    omega_min = math.acos(n)
    if abs(w) < omega_min or abs(w) > math.pi - omega_min:
        return Transmission(None, "gap", 0.0, w)
    kp = math.acos(max(-1.0, min(1.0, math.cos(w) / n)))
    v = n * math.sin(kp) / math.sin(abs(w))
    if w > 0:
        return Transmission(kp, "transmitting", v, w)
    return Transmission(-kp, "klein", v, w)


@dataclass(frozen=True)
class ScatteringResult:
    phi: float
    R: float
    T: float
    k_prime: float | None
    v_transmitted: float
    regime: str
    v_measured: float = float("nan")
    middle: float = 0.0
    steps: int = 0
    cleared: bool = True


@dataclass(frozen=True)
class Geometry:
    """Lattice layout; ``None`` fields are derived from sigma and the step cap."""

    sites: int | None = None
    edge: int | None = None
    separation: float | None = None
    buffer: float | None = None
    max_steps: int = DEFAULT_MAX_STEPS


def _resolve_geometry(geometry: Geometry, sigma: float):
    buffer = geometry.buffer if geometry.buffer is not None else BUFFER_WIDTHS / sigma
    separation = geometry.separation if geometry.separation is not None else SEPARATION_WIDTHS / sigma + buffer
    if geometry.sites is None:
        # no part of the state may reach the periodic seam within the cap
        # plus the velocity-measurement tail
        need = 2 * (geometry.max_steps * 5 // 4 + separation + 8 / sigma) + 64
        sites = 1 << int(math.ceil(math.log2(need)))
    else:
        sites = int(geometry.sites)
    edge = sites // 2 if geometry.edge is None else int(geometry.edge)
    return sites, edge, separation, buffer


def _centroid(prob, x, mask):
    w = prob[mask]
    total = w.sum()
    return float((w * x[mask]).sum() / total) if total > 0 else float("nan")


def run_scattering(m, k0, sigma, phi, geometry: Geometry | None = None) -> ScatteringResult:
    """Send a positive-frequency packet into a phase step and count what comes back.

    The packet starts ``separation`` sites left of the edge. After
    ``ceil(1.5 * distance / v(k0))`` steps the walk continues in chunks until
    less than ``CLEAR_TOL`` of the mass is within ``buffer`` of the edge, or
    the step cap is hit (``cleared=False``, partial masses reported).
    """
    geometry = geometry or Geometry()
    walk = ScatteringWalk(m)
    v0 = float(walk.velocity(k0))
    if v0 <= 0:
        raise ValueError(f"packet must move right; v(k0)={v0:.3f}")
    sites, edge, separation, buffer = _resolve_geometry(geometry, sigma)
    start = edge - int(round(separation))
    if start - 8 / sigma < 0:
        raise ValueError("lattice too small for the requested separation")
    grid = MomentumGrid(1, sites)
    state = to_position(make_packet(PacketSpec(k0, sigma, x0=start), grid, walk))
    trans = transmitted_wavevector(m, k0, phi)

    n = walk.n_coupling
    profile = PotentialProfile.step(phi, edge)
    phase = np.exp(-1j * profile.phases(sites))
    c1 = np.array(state.amplitudes[:, 0])
    c2 = np.array(state.amplitudes[:, 1])
    x = np.arange(sites)
    left = x < edge - buffer
    right = x >= edge + buffer
    middle = ~(left | right)

    distance = separation + buffer + BUFFER_WIDTHS / sigma
    t_first = min(int(math.ceil(1.5 * distance / v0)), geometry.max_steps)
    t = 0
    target = t_first
    while True:
        while t < target:
            c1, c2 = _walk(c1, c2, n, m, phase)
            t += 1
        prob = np.abs(c1) ** 2 + np.abs(c2) ** 2
        mid = float(prob[middle].sum())
        if mid < CLEAR_TOL or t >= geometry.max_steps:
            break
        target = min(t + CHUNK_STEPS, geometry.max_steps)

    cleared = mid < CLEAR_TOL
    if not cleared:
        warnings.warn(
            f"phi={phi:.4f}: {mid:.2e} of the mass still near the edge after {t} steps",
            RuntimeWarning,
            stacklevel=2,
        )
    R = float(prob[left].sum())
    T = float(prob[right].sum())
    v_meas = _transmitted_speed(c1, c2, n, m, phase, t, x, right, T) if T > 1e-3 else float("nan")
    return ScatteringResult(
        phi=float(phi),
        R=R,
        T=T,
        k_prime=trans.k_prime,
        v_transmitted=trans.v_transmitted,
        regime=trans.regime,
        v_measured=v_meas,
        middle=mid,
        steps=t,
        cleared=cleared,
    )


def _transmitted_speed(c1, c2, n, m, phase, t_end, x, right, T):
    # centroid drift of the transmitted packet over a further quarter of the run
    prob = np.abs(c1) ** 2 + np.abs(c2) ** 2
    x_start = _centroid(prob, x, right)
    extra = max(1, t_end // 4)
    for _ in range(extra):
        c1, c2 = _walk(c1, c2, n, m, phase)
    prob = np.abs(c1) ** 2 + np.abs(c2) ** 2
    return (_centroid(prob, x, right) - x_start) / extra


def klein_scan(m, k0, sigma, phi_grid, geometry: Geometry | None = None, executor=None):
    """``run_scattering`` over barrier heights; ``executor.map`` parallelizes in order."""
    args = [(m, k0, sigma, float(phi), geometry) for phi in phi_grid]
    if executor is None:
        return [run_scattering(*a) for a in args]
    return list(executor.map(_run_args, args))


def _run_args(args):
    return run_scattering(*args)


def plateau_width(phis, reflections, level: float = 0.99) -> float:
    """Width of the widest run of ``R >= level``, edges linearly interpolated."""
    phis = np.asarray(phis, dtype=float)
    r = np.asarray(reflections, dtype=float)
    order = np.argsort(phis)
    phis, r = phis[order], r[order]
    above = r >= level
    best = 0.0
    i = 0
    while i < phis.size:
        if not above[i]:
            i += 1
            continue
        j = i
        while j + 1 < phis.size and above[j + 1]:
            j += 1
        lo = phis[i]
        if i > 0:
            lo = np.interp(level, [r[i - 1], r[i]], [phis[i - 1], phis[i]])
        hi = phis[j]
        if j + 1 < phis.size:
            hi = np.interp(level, [r[j + 1], r[j]], [phis[j + 1], phis[j]])
        best = max(best, hi - lo)
        i = j + 1
    return float(best)


def write_scan_csv(path, results) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phi", "R", "T", "k_prime", "v_transmitted", "regime"])
        for r in results:
            kp = "" if r.k_prime is None else repr(r.k_prime)
            writer.writerow([repr(r.phi), repr(r.R), repr(r.T), kp, repr(r.v_transmitted), r.regime])
