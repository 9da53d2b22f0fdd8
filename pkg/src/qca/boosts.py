"""Nonlinear boosts that preserve the 1D Dirac automaton dispersion.

A deformation map ``D`` sends the automaton shell ``cos w = n cos k`` onto
the relativistic shell ``W^2 - K^2 = m^2``. Conjugating an ordinary Lorentz
boost by ``D`` gives a boost that keeps automaton states on their shell.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

ONSHELL_TOL = 1e-12


class DomainError(ValueError):
    """A point falls outside the region where the deformation is invertible."""


@dataclass(frozen=True)
class EnergyMomentum:
    omega: float
    k: float
    mass: float

    def shell_residual(self) -> float:
        n = math.sqrt(1 - self.mass * self.mass)
        return abs(math.cos(self.omega) - n * math.cos(self.k))

    @property
    def on_shell(self) -> bool:
        return self.shell_residual() < ONSHELL_TOL

    @classmethod
    def on_shell_at(cls, k: float, mass: float) -> "EnergyMomentum":
        n = math.sqrt(1 - mass * mass)
        omega = math.atan2(math.hypot(mass, n * math.sin(k)), n * math.cos(k))
        return cls(omega, float(k), float(mass))


@dataclass(frozen=True)
class DeformationMap:
    """Pluggable ``(omega, k) <-> (Omega, K)`` map with a description of its domain."""

    forward: Callable[[float, float], tuple[float, float]]
    inverse: Callable[[float, float], tuple[float, float]]
    domain: str
    mass: float


def default_deformation(m: float) -> DeformationMap:
    """``(omega, k) -> (sin omega, n sin k)``, invertible for omega in [0, pi/2], |k| <= pi/2."""
    if not 0.0 < m < 1.0:
        raise ValueError(f"mass must lie in (0, 1), got {m}")
    n = math.sqrt(1 - m * m)

    def forward(omega, k):
        if not (0.0 <= omega <= math.pi / 2 and abs(k) <= math.pi / 2):
            raise DomainError(f"(omega, k) = ({omega:.6g}, {k:.6g}) is outside the invertible quadrant")
        return math.sin(omega), n * math.sin(k)

    def inverse(big_omega, big_k):
        if not (0.0 <= big_omega <= 1.0 and abs(big_k) <= n):
            raise DomainError(
                f"(Omega, K) = ({big_omega:.6g}, {big_k:.6g}) has no preimage in the quadrant"
            )
        return math.asin(big_omega), math.asin(big_k / n)

    return DeformationMap(forward, inverse, "omega in [0, pi/2], k in [-pi/2, pi/2]", m)


def lorentz_boost(beta: float, big_omega: float, big_k: float) -> tuple[float, float]:
    if not -1.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (-1, 1), got {beta}")
    gamma = 1.0 / math.sqrt((1 - beta) * (1 + beta))
    return gamma * (big_omega - beta * big_k), gamma * (big_k - beta * big_omega)


def deformed_boost(beta: float, p: EnergyMomentum, mapping: DeformationMap | None = None) -> EnergyMomentum:
    """``D^-1 o L_beta o D`` applied to ``p``."""
    mapping = mapping or default_deformation(p.mass)
    if not p.on_shell:
        raise ValueError(f"point is off shell (residual {p.shell_residual():.2e})")
    big = mapping.forward(p.omega, p.k)
    boosted = lorentz_boost(beta, *big)
    try:
        omega, k = mapping.inverse(*boosted)
    except DomainError as exc:
        raise DomainError(f"boost by beta={beta} leaves the domain: {exc}") from None
    return EnergyMomentum(omega, k, p.mass)


def compose_velocities(beta1: float, beta2: float) -> float:
    return (beta1 + beta2) / (1 + beta1 * beta2)


def rapidity_sample(rng: np.random.Generator, mass: float, count: int, betas) -> list[EnergyMomentum]:
    """Random on-shell points whose images under every ``beta`` stay in the domain.

    Points are drawn uniformly in rapidity on the relativistic shell, within
    the range that the largest boost cannot push past ``|K| = n``.
    """
    n = math.sqrt(1 - mass * mass)
    eta_edge = math.asinh(n / mass)
    eta_boost = max(abs(math.atanh(b)) for b in betas)
    half = eta_edge - eta_boost
    if half <= 0:
        raise ValueError("boosts too large for this mass: no point stays in the domain")
    out = []
    for eta in rng.uniform(-half, half, size=count):
        k = math.asin(mass * math.sinh(eta) / n)
        out.append(EnergyMomentum.on_shell_at(k, mass))
    return out


def write_orbit_csv(path, p: EnergyMomentum, betas, mapping: DeformationMap | None = None) -> None:
    mapping = mapping or default_deformation(p.mass)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["beta", "omega", "k", "Omega", "K", "onshell_residual"])
        for beta in betas:
            q = deformed_boost(beta, p, mapping)
            big = mapping.forward(q.omega, q.k)
            writer.writerow([repr(float(v)) for v in (beta, q.omega, q.k, big[0], big[1], q.shell_residual())])
