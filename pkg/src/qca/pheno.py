"""Planck-unit conversions and order-of-magnitude phenomenology estimates."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from qca.maxwell import light_speed

# SI value of one Planck unit, per dimension; the only place these live
PLANCK_SI = {
    "length": 1.616255e-35,  # m
    "time": 5.391247e-44,  # s
    "mass": 2.176434e-8,  # kg
    "wavevector": 1 / 1.616255e-35,  # 1/m
}
SI_UNITS = {"length": "m", "time": "s", "mass": "kg", "wavevector": "1/m"}
FEMTOMETRE = 1e-15


@dataclass(frozen=True)
class PlanckQuantity:
    value: float
    dimension: str
    system: str = "planck"

    def __post_init__(self):
        if self.dimension not in PLANCK_SI:
            raise ValueError(f"unknown dimension {self.dimension!r}")
        if self.system not in ("planck", "SI"):
            raise ValueError(f"unknown unit system {self.system!r}")

    def to(self, system: str) -> "PlanckQuantity":
        return unit_convert(self, system)

    @property
    def planck(self) -> float:
        return unit_convert(self, "planck").value

    @property
    def si(self) -> float:
        return unit_convert(self, "SI").value


def unit_convert(q: PlanckQuantity, target: str) -> PlanckQuantity:
    if target not in ("planck", "SI"):
        raise ValueError(f"unknown unit system {target!r}")
    if q.system == target:
        return q
    scale = PLANCK_SI[q.dimension]
    value = q.value * scale if target == "SI" else q.value / scale
    return PlanckQuantity(value, q.dimension, target)


def travel_time_separation(mass: PlanckQuantity, packet_width: PlanckQuantity) -> PlanckQuantity:
    """Flight time ``6 w / m^2`` after which automaton and Dirac packets separate by their width."""
    if mass.dimension != "mass" or packet_width.dimension != "length":
        raise ValueError("expected a mass and a length")
    m = mass.planck
    width = packet_width.planck
    if m <= 0:
        raise ValueError("mass must be positive")
    if width <= 0:
        raise ValueError("packet width must be positive")
    return PlanckQuantity(6 * width / (m * m), "time")


def grb_time_lag(distance: PlanckQuantity, k1, k2, chirality: int = -1) -> PlanckQuantity:
    """Arrival-time difference ``L |1/c(k1) - 1/c(k2)|`` of two photon modes."""
    if distance.dimension != "length":
        raise ValueError("distance must be a length")
    c1 = light_speed(np.asarray(k1, dtype=float), chirality)
    c2 = light_speed(np.asarray(k2, dtype=float), chirality)
    return PlanckQuantity(distance.planck * abs(1 / c1 - 1 / c2), "time")


@dataclass
class Report:
    calculator: str
    inputs: dict
    planck: float
    si: float
    si_unit: str

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def travel_time_report(mass_planck: float = 1e-19, width_fm: float = 100.0) -> Report:
    width = PlanckQuantity(width_fm * FEMTOMETRE, "length", "SI")
    t = travel_time_separation(PlanckQuantity(mass_planck, "mass"), width)
    return Report(
        "travel_time_separation",
        {"mass_planck": mass_planck, "width_fm": width_fm, "width_planck": width.planck},
        t.value,
        t.si,
        "s",
    )
