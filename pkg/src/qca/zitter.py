"""Zitterbewegung of 1D Dirac packets.

The mean position of a packet with weight on both frequency branches splits
into the two branch means plus an interference term that oscillates at
``omega(k0)/pi`` cycles per step and dies out as the packet spreads.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.fft
from scipy.signal import find_peaks

from qca.packets import MomentumGrid, PacketSpec, grid_spectrum, make_packet, unwrapped_coordinates

PURE_BRANCH_TOL = 1e-12
MIN_SNR = 3.0
ENVELOPE_FLOOR = 1e-6
CHUNK = 256


@dataclass
class TrajectoryDecomposition:
    times: np.ndarray
    x_total: np.ndarray
    x_plus: np.ndarray
    x_minus: np.ndarray
    x_int: np.ndarray
    pure_branch: bool = False

    def residual(self) -> float:
        return float(np.max(np.abs(self.x_total - self.x_plus - self.x_minus - self.x_int)))

    def drift_velocity(self) -> float:
        """Slope of the branch-averaged position ``x_plus + x_minus``."""
        mean = self.x_plus + self.x_minus
        return float(np.polyfit(self.times, mean, 1)[0])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "x_total", "x_plus", "x_minus", "x_int"])
            for row in zip(self.times, self.x_total, self.x_plus, self.x_minus, self.x_int):
                writer.writerow([int(row[0])] + [repr(float(v)) for v in row[1:]])


@dataclass
class OscillationFit:
    frequency: float
    amplitude: float
    decay_exponent: float
    shift: float
    snr: float = field(default=float("nan"))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def decompose_trajectory(
    spec: PacketSpec, automaton, t_max: int, grid: MomentumGrid | None = None
) -> TrajectoryDecomposition:
    """Position means of the full packet and of each branch for t = 0..t_max."""
    if automaton.dimension != 1 or not automaton.model.is_dirac:
        raise ValueError("zitterbewegung analysis needs a 1D Dirac automaton")
    grid = grid or MomentumGrid.default(1)
    state = make_packet(spec, grid, automaton)
    omega, p_plus, _ = grid_spectrum(automaton, grid)
    psi = state.amplitudes
    plus = np.einsum("kij,kj->ki", p_plus, psi)
    minus = psi - plus
    pure = min(np.linalg.norm(plus), np.linalg.norm(minus)) < PURE_BRANCH_TOL

    times = np.arange(int(t_max) + 1)
    n = grid.points_per_axis
    # modes on the last axis keeps the FFTs contiguous; dead modes are skipped
    live = np.flatnonzero(np.any(psi != 0, axis=-1))
    plus_t = np.ascontiguousarray(plus[live].T)
    minus_t = np.ascontiguousarray(minus[live].T)
    omega_live = omega[live]
    out = {key: np.empty(times.size) for key in ("total", "plus", "minus")}
    for start in range(0, times.size, CHUNK):
        tt = times[start : start + CHUNK]
        ph = np.exp(-1j * np.outer(tt, omega_live))[:, None, :]
        a = np.zeros((tt.size, 2, n), dtype=complex)
        b = np.zeros((tt.size, 2, n), dtype=complex)
        a[..., live] = plus_t[None] * ph
        b[..., live] = minus_t[None] * np.conj(ph)
        a = scipy.fft.ifft(a, axis=-1, norm="ortho")
        b = scipy.fft.ifft(b, axis=-1, norm="ortho")
        pa = np.sum(np.abs(a) ** 2, axis=1)
        pb = np.sum(np.abs(b) ** 2, axis=1)
        cross = 2 * np.sum(np.real(np.conj(a) * b), axis=1)
        marginal = pa + pb + cross
        # one coordinate frame per time for all three means
        coords, centre = unwrapped_coordinates(marginal)
        outside = np.sum(marginal * (np.abs(coords - centre[:, None]) >= n / 4), axis=-1)
        if np.max(outside) > 1e-6:
            raise ValueError("packet spread past a quarter of the lattice; increase the grid")
        sl = slice(start, start + tt.size)
        out["total"][sl] = np.sum(marginal * coords, axis=-1)
        out["plus"][sl] = np.sum(pa * coords, axis=-1)
        out["minus"][sl] = np.sum(pb * coords, axis=-1)
    x_int = out["total"] - out["plus"] - out["minus"]
    return TrajectoryDecomposition(times, out["total"], out["plus"], out["minus"], x_int, pure)


def _spectral_peak(signal: np.ndarray, pad: int = 8):
    n = signal.size
    spec = np.abs(np.fft.rfft(signal, n=pad * n))
    freqs = np.fft.rfftfreq(pad * n)
    i = int(np.argmax(spec[1:])) + 1
    # parabolic refinement of the peak on the log spectrum
    if 0 < i < spec.size - 1:
        y0, y1, y2 = np.log(spec[i - 1 : i + 2])
        denom = y0 - 2 * y1 + y2
        delta = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    else:
        delta = 0.0
    freq = (i + delta) / (pad * n)
    # dominance: main peak over the strongest other peak well away from it
    others, _ = find_peaks(spec)
    others = others[np.abs(freqs[others] - freq) > 4.0 / n]
    rival = max(spec[others].max() if others.size else 0.0, spec[0])
    snr = spec[i] / rival if rival > 0 else np.inf
    return float(freq), float(snr)


def fit_oscillation(decomp: TrajectoryDecomposition) -> OscillationFit:
    """Frequency, early amplitude, envelope decay exponent and asymptotic shift of ``x_int``.

    The decay exponent is NaN when the second half of the trace holds fewer
    than three envelope maxima above round-off (moving packets whose two
    branches have separated).
    """
    t = np.asarray(decomp.times, dtype=float)
    x = np.asarray(decomp.x_int, dtype=float)
    if decomp.pure_branch or np.max(np.abs(x)) < 1e-9:
        raise ValueError("x_int vanishes: no interference between branches")
    half = t.size // 2
    shift = float(np.mean(x[half:]))
    centred = x - shift
    freq, snr = _spectral_peak(centred)
    if snr < MIN_SNR:
        raise ValueError(f"no dominant spectral peak (signal-to-noise {snr:.2f})")
    period = 1.0 / freq
    if t[-1] - t[0] < 20 * period:
        raise ValueError(f"trace covers fewer than 20 periods ({(t[-1] - t[0]) / period:.1f})")
    early = t <= t[0] + 2 * period
    amplitude = float(np.max(np.abs(x[early])))
    peaks, _ = find_peaks(np.abs(centred), distance=max(1, int(0.3 * period)))
    peaks = peaks[(peaks >= half) & (t[peaks] > 0)]
    # a packet whose branches separate leaves only round-off in the tail
    peaks = peaks[np.abs(centred[peaks]) > ENVELOPE_FLOOR * np.max(np.abs(centred))]
    if peaks.size < 3:
        slope = float("nan")
    else:
        slope = float(np.polyfit(np.log(t[peaks]), np.log(np.abs(centred[peaks])), 1)[0])
    return OscillationFit(freq, amplitude, slope, shift, snr)
