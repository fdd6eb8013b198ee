"""Initial-condition generation: equally spaced points on the admissible arc
of the state-A equi-energy ellipse, with quasi-classical shell placement of
the electronic oscillators (occupations exactly 1 and 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import ModelParams, mapping_state, adiabatic_state

__all__ = [
    "SamplingSpec",
    "NuclearPoint",
    "EmptyArcError",
    "InvalidEnergyError",
    "sample_nuclear",
    "init_mapping_state",
    "init_adiabatic_state",
    "below_seam",
]

DEFAULT_SEED = 7


class EmptyArcError(ValueError):
    """No point of the equi-energy ellipse lies below the crossing seam."""


class InvalidEnergyError(ValueError):
    """Sampling energy does not exceed the bottom of well A."""


@dataclass(frozen=True)
class SamplingSpec:
    e0: float = 28.0
    n_samples: int = 40
    seed: int = DEFAULT_SEED
    phase_mode: str = "random"

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.phase_mode not in ("zero", "random"):
            raise ValueError(f"unknown phase_mode {self.phase_mode!r}")


class NuclearPoint(NamedTuple):
    x: float
    y: float
    px: float
    py: float
    phi: float
    index: int


def below_seam(x, y, params: ModelParams) -> bool:
    """Strictly below the crossing seam y = x tan(theta) + a / cos(theta)."""
    return y * math.cos(params.theta) - x * math.sin(params.theta) < params.a


def sample_nuclear(spec: SamplingSpec, params: ModelParams) -> list[NuclearPoint]:
    """Points with zero momentum on V_A = e0, strictly below the seam.

    The ellipse is parametrized as (r_x cos(phi), r_y sin(phi)); the seam
    constraint excludes at most one arc, and the samples are placed at the
    midpoints of an equal partition of what remains (reducing to a plain
    equal spacing over [0, 2pi) when nothing is excluded).
    """
    if spec.e0 <= params.eps_a:
        raise InvalidEnergyError(
            f"sampling energy {spec.e0} must exceed eps_a = {params.eps_a}"
        )
    rx = math.sqrt(2.0 * (spec.e0 - params.eps_a)) / params.omega_x
    ry = math.sqrt(2.0 * (spec.e0 - params.eps_a)) / params.omega_y

    # seam constraint on the ellipse parameter:
    #   ry cos(theta) sin(phi) - rx sin(theta) cos(phi) < a
    # i.e.  amp * sin(phi - delta) < a
    amp = math.hypot(ry * math.cos(params.theta), rx * math.sin(params.theta))
    delta = math.atan2(rx * math.sin(params.theta), ry * math.cos(params.theta))

    n = spec.n_samples
    if params.a >= amp:
        phis = [2.0 * math.pi * k / n for k in range(n)]
    else:
        half = math.asin(params.a / amp)
        start = math.pi - half           # admissible arc in psi = phi - delta
        length = math.pi + 2.0 * half
        if not length > 0.0:
            raise EmptyArcError("the seam excludes the whole equi-energy curve")
        phis = [
            math.fmod(delta + start + (k + 0.5) * length / n, 2.0 * math.pi)
            for k in range(n)
        ]

    return [
        NuclearPoint(rx * math.cos(phi), ry * math.sin(phi), 0.0, 0.0, phi, k)
        for k, phi in enumerate(phis)
    ]


def init_mapping_state(point: NuclearPoint, params: ModelParams,
                       spec: SamplingSpec) -> np.ndarray:
    """Mapping state for a nuclear sample: oscillators on the N_A = 1 and
    N_B = 0 shells, phases zero or drawn per-sample from the spec seed."""
    ra = math.sqrt(2.0 + 2.0 * params.gamma)
    rb = math.sqrt(2.0 * params.gamma)
    if spec.phase_mode == "zero":
        xa, pa, xb, pb = ra, 0.0, rb, 0.0
    else:
        rng = np.random.default_rng([spec.seed, point.index, 0])
        phi_a, phi_b = rng.uniform(0.0, 2.0 * math.pi, size=2)
        xa, pa = ra * math.cos(phi_a), ra * math.sin(phi_a)
        xb, pb = rb * math.cos(phi_b), rb * math.sin(phi_b)
    return mapping_state(point.x, point.y, point.px, point.py, xa, pa, xb, pb)


def init_adiabatic_state(point: NuclearPoint) -> np.ndarray:
    return adiabatic_state(point.x, point.y, 0.0, 0.0)
