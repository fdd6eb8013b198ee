"""Two-mode two-state vibronic model: diabatic wells, mapping Hamiltonian,
lower adiabatic surface, and their analytic gradients and vector fields.

Phase-space conventions used throughout the package:

* mapping state  -- ndarray of length 8, ordered
  ``(x, y, p_x, p_y, x_A, p_A, x_B, p_B)``; the last four are the
  coordinates of the two electronic mapping oscillators.
* adiabatic state -- ndarray of length 4, ordered ``(x, y, p_x, p_y)``.

Everything in this module is a pure function of its inputs; ``ModelParams``
is immutable and can be shared freely across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "SingularityError",
    "displaced_coords",
    "potential_a",
    "potential_b",
    "grad_potential_a",
    "grad_potential_b",
    "occupation",
    "mapping_state",
    "adiabatic_state",
    "mapping_energy",
    "mapping_vector_field",
    "adiabatic_lower_potential",
    "grad_adiabatic_lower",
    "adiabatic_energy",
    "adiabatic_vector_field",
]


class SingularityError(ValueError):
    """Degenerate point of the lower adiabatic force (J = 0 and V_A = V_B)."""


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the two-well model and its mapping.

    The well frequencies and separation are not fixed by the study that the
    default coupling/angle values come from; the defaults below are the
    documented reference configuration of this package (incommensurate
    frequencies, wells well separated on the sampling-energy scale).
    Only the offset difference ``eps_b - eps_a`` is physical; ``eps_a = 0``
    by convention.
    """

    omega_x: float = 1.0
    omega_y: float = math.sqrt(2.0)
    a: float = 2.0
    theta: float = math.pi / 3.0
    J: float = 1.5
    eps_a: float = 0.0
    eps_b: float = 0.173
    gamma: float = 0.5

    def __post_init__(self):
        if not (self.omega_x > 0.0 and self.omega_y > 0.0):
            raise ValueError("omega_x and omega_y must be positive")
        if self.a < 0.0:
            raise ValueError("well half-distance a must be >= 0")
        if not 0.0 <= self.theta < math.pi / 2.0:
            raise ValueError("theta must lie in [0, pi/2)")
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive")

    @property
    def delta_eps(self) -> float:
        return self.eps_b - self.eps_a

    def kernel_coeffs(self) -> np.ndarray:
        """Precomputed coefficient vector consumed by the integration kernels.

        Layout: (wx2, wy2, cos2t, sin2t, 2a*sin t, -2a*cos t, J, eps_a,
        eps_b, gamma).
        """
        return np.array(
            [
                self.omega_x**2,
                self.omega_y**2,
                math.cos(2.0 * self.theta),
                math.sin(2.0 * self.theta),
                2.0 * self.a * math.sin(self.theta),
                -2.0 * self.a * math.cos(self.theta),
                self.J,
                self.eps_a,
                self.eps_b,
                self.gamma,
            ],
            dtype=np.float64,
        )


def mapping_state(x, y, p_x, p_y, x_a, p_a, x_b, p_b) -> np.ndarray:
    return np.array([x, y, p_x, p_y, x_a, p_a, x_b, p_b], dtype=np.float64)


def adiabatic_state(x, y, p_x, p_y) -> np.ndarray:
    return np.array([x, y, p_x, p_y], dtype=np.float64)


def displaced_coords(x, y, params: ModelParams):
    """Coordinates relative to the B well: shift to its minimum, rotate by 2*theta."""
    u = x + 2.0 * params.a * math.sin(params.theta)
    v = y - 2.0 * params.a * math.cos(params.theta)
    c2 = math.cos(2.0 * params.theta)
    s2 = math.sin(2.0 * params.theta)
    xi = u * c2 + v * s2
    eta = -u * s2 + v * c2
    return xi, eta


def potential_a(x, y, params: ModelParams):
    return 0.5 * (params.omega_x**2 * x * x + params.omega_y**2 * y * y) + params.eps_a


def potential_b(x, y, params: ModelParams):
    xi, eta = displaced_coords(x, y, params)
    return 0.5 * (params.omega_x**2 * xi * xi + params.omega_y**2 * eta * eta) + params.eps_b


def grad_potential_a(x, y, params: ModelParams):
    return params.omega_x**2 * x, params.omega_y**2 * y


def grad_potential_b(x, y, params: ModelParams):
    # chain rule through the displaced/rotated frame:
    # d(xi)/dx = cos2t, d(eta)/dx = -sin2t, d(xi)/dy = sin2t, d(eta)/dy = cos2t
    xi, eta = displaced_coords(x, y, params)
    c2 = math.cos(2.0 * params.theta)
    s2 = math.sin(2.0 * params.theta)
    wx2 = params.omega_x**2
    wy2 = params.omega_y**2
    dvdx = wx2 * xi * c2 - wy2 * eta * s2
    dvdy = wx2 * xi * s2 + wy2 * eta * c2
    return dvdx, dvdy


def occupation(x_i, p_i, gamma):
    """Mapping-oscillator occupation; stays in (-gamma, 1 + gamma) along trajectories."""
    return 0.5 * (x_i * x_i + p_i * p_i) - gamma


def mapping_energy(state, params: ModelParams) -> float:
    x, y, px, py, xa, pa, xb, pb = state
    na = occupation(xa, pa, params.gamma)
    nb = occupation(xb, pb, params.gamma)
    t_kin = 0.5 * (px * px + py * py)
    return (
        t_kin
        + na * potential_a(x, y, params)
        + nb * potential_b(x, y, params)
        + params.J * (xa * xb + pa * pb)
    )


def mapping_vector_field(state, params: ModelParams) -> np.ndarray:
    """Time derivative of the 8-D mapping state.

    The electronic pair (x_A, p_A) rotates at rate V_A and couples to the B
    oscillator through J; the nuclear momenta feel each diabatic force
    weighted by the corresponding occupation.
    """
    x, y, px, py, xa, pa, xb, pb = state
    va = potential_a(x, y, params)
    vb = potential_b(x, y, params)
    na = occupation(xa, pa, params.gamma)
    nb = occupation(xb, pb, params.gamma)
    dax, day = grad_potential_a(x, y, params)
    dbx, dby = grad_potential_b(x, y, params)
    J = params.J
    return np.array(
        [
            px,
            py,
            -dax * na - dbx * nb,
            -day * na - dby * nb,
            va * pa + J * pb,
            -va * xa - J * xb,
            vb * pb + J * pa,
            -vb * xb - J * xa,
        ],
        dtype=np.float64,
    )


def adiabatic_lower_potential(x, y, params: ModelParams):
    """Lower eigenvalue of the 2x2 diabatic potential matrix [[V_A, J], [J, V_B]]."""
    va = potential_a(x, y, params)
    vb = potential_b(x, y, params)
    half_gap = 0.5 * (va - vb)
    return 0.5 * (va + vb) - np.sqrt(half_gap * half_gap + params.J**2)


def grad_adiabatic_lower(x, y, params: ModelParams):
    """Gradient of the lower adiabatic surface.

    Singular only where the root vanishes, i.e. J = 0 together with
    V_A = V_B (a conical intersection); that configuration is rejected.
    """
    va = potential_a(x, y, params)
    vb = potential_b(x, y, params)
    half_gap = 0.5 * (va - vb)
    root = math.sqrt(half_gap * half_gap + params.J**2)
    if root == 0.0:
        raise SingularityError(
            f"degenerate adiabatic point at (x={x}, y={y}): J = 0 and V_A = V_B"
        )
    dax, day = grad_potential_a(x, y, params)
    dbx, dby = grad_potential_b(x, y, params)
    fac = half_gap / root
    dvdx = 0.5 * (dax + dbx) - 0.5 * fac * (dax - dbx)
    dvdy = 0.5 * (day + dby) - 0.5 * fac * (day - dby)
    return dvdx, dvdy


def adiabatic_energy(state, params: ModelParams) -> float:
    x, y, px, py = state
    return 0.5 * (px * px + py * py) + adiabatic_lower_potential(x, y, params)


def adiabatic_vector_field(state, params: ModelParams) -> np.ndarray:
    x, y, px, py = state
    dvdx, dvdy = grad_adiabatic_lower(x, y, params)
    return np.array([px, py, -dvdx, -dvdy], dtype=np.float64)
