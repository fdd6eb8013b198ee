"""Invariant suite behind ``mapchaos check``.

Every check returns a CheckResult; the CLI prints one line per result and
the acceptance tests assert on the same objects.  Tolerances here are the
package's acceptance tolerances, not development slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import model
from .dynamics import MappingSystem, AdiabaticSystem, reverse_momenta
from .ensemble import SamplingSpec, init_mapping_state, init_adiabatic_state, sample_nuclear
from .experiments import ADIABATIC_DT, MAPPING_DT
from .model import ModelParams

__all__ = ["CheckResult", "run_invariant_suite", "x_energy_drift", "conservation_drifts"]

FD_STEP = 1e-6
GRAD_TOL = 1e-6
EIG_TOL = 1e-12
NSUM_TOL = 1e-9
ENERGY_TOL = 1e-6
REVERSE_TOL = 1e-6
EX_TOL = 1e-6

SWEEP_J = (0.3, 1.5, 7.5)
SWEEP_THETA = (0.0, math.pi / 6, math.pi / 3)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rel(err, ref) -> float:
    return abs(err) / max(1.0, abs(ref))


def _random_params(rng) -> ModelParams:
    return ModelParams(
        omega_x=rng.uniform(0.5, 2.0),
        omega_y=rng.uniform(0.5, 2.0),
        a=rng.uniform(0.0, 3.0),
        theta=rng.uniform(0.0, math.pi / 2 * 0.95),
        J=rng.uniform(0.1, 8.0),
        eps_a=0.0,
        eps_b=rng.uniform(-0.5, 0.5),
        gamma=0.5,
    )


def check_potential_gradients(n_points=120, seed=42) -> CheckResult:
    """Analytic gradients of V_A, V_B, V_ad- against central differences."""
    rng = np.random.default_rng(seed)
    h = FD_STEP
    worst = 0.0
    for _ in range(n_points):
        p = _random_params(rng)
        x, y = rng.uniform(-6.0, 6.0, size=2)
        for fn, grad in (
            (model.potential_a, model.grad_potential_a),
            (model.potential_b, model.grad_potential_b),
            (model.adiabatic_lower_potential, model.grad_adiabatic_lower),
        ):
            gx, gy = grad(x, y, p)
            fx = (fn(x + h, y, p) - fn(x - h, y, p)) / (2.0 * h)
            fy = (fn(x, y + h, p) - fn(x, y - h, p)) / (2.0 * h)
            worst = max(worst, _rel(gx - fx, gx), _rel(gy - fy, gy))
    return CheckResult(
        "potential gradients vs finite differences",
        worst < GRAD_TOL,
        f"worst rel err {worst:.2e} (tol {GRAD_TOL:g}, {n_points} random points)",
    )


def check_mapping_symplectic_gradient(n_points=120, seed=43) -> CheckResult:
    """The mapping vector field is the symplectic gradient of its energy."""
    rng = np.random.default_rng(seed)
    h = FD_STEP
    # (position, conjugate momentum) index pairs of the 8-D layout
    pairs = ((0, 2), (1, 3), (4, 5), (6, 7))
    worst = 0.0
    for _ in range(n_points):
        p = _random_params(rng)
        s = rng.uniform(-3.0, 3.0, size=8)
        field = model.mapping_vector_field(s, p)

        def dh(i):
            sp, sm = s.copy(), s.copy()
            sp[i] += h
            sm[i] -= h
            return (model.mapping_energy(sp, p) - model.mapping_energy(sm, p)) / (2.0 * h)

        for q, mom in pairs:
            worst = max(worst, _rel(field[q] - dh(mom), field[q]))
            worst = max(worst, _rel(field[mom] + dh(q), field[mom]))
    return CheckResult(
        "mapping field vs symplectic gradient of H",
        worst < GRAD_TOL,
        f"worst rel err {worst:.2e} (tol {GRAD_TOL:g}, {n_points} random states)",
    )


def check_adiabatic_eigenvalue(n_points=300, seed=44) -> CheckResult:
    """V_ad- equals the lower eigenvalue of [[V_A, J], [J, V_B]]."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        p = _random_params(rng)
        x, y = rng.uniform(-6.0, 6.0, size=2)
        va = model.potential_a(x, y, p)
        vb = model.potential_b(x, y, p)
        lo = float(np.linalg.eigvalsh(np.array([[va, p.J], [p.J, vb]]))[0])
        worst = max(worst, _rel(model.adiabatic_lower_potential(x, y, p) - lo, lo))
    return CheckResult(
        "lower adiabatic surface vs 2x2 eigenvalue",
        worst < EIG_TOL,
        f"worst rel err {worst:.2e} (tol {EIG_TOL:g}, {n_points} random points)",
    )


def _acceptance_cells():
    cells = [(j, math.pi / 3) for j in SWEEP_J]
    cells += [(1.5, th) for th in SWEEP_THETA if th != math.pi / 3]
    return cells


def _mapping_states(params, spec):
    points = sample_nuclear(spec, params)
    return points, [init_mapping_state(p, params, spec) for p in points]


def conservation_drifts(params: ModelParams, state, t_final=24.0, dt=MAPPING_DT,
                        stride=40):
    """(energy drift, occupation-sum drift) of one mapping trajectory."""
    system = MappingSystem(params)
    y = np.array(state, dtype=np.float64)
    e0 = system.energy(y)
    n_steps = int(round(t_final / dt))
    recorded = np.empty((n_steps // stride, 8), dtype=np.float64)
    status, _, e_drift = system.record(y, dt, n_steps, e0, stride, recorded)
    if status != 0:
        return math.inf, math.inf
    n_sum = 0.5 * np.sum(recorded[:, 4:] ** 2, axis=1) - 2.0 * params.gamma
    n0 = 0.5 * np.sum(np.asarray(state[4:]) ** 2) - 2.0 * params.gamma
    return float(e_drift), float(np.max(np.abs(n_sum - n0)))


def check_mapping_conservation(n_samples=40, seed=None) -> list[CheckResult]:
    spec = SamplingSpec(n_samples=n_samples) if seed is None else \
        SamplingSpec(n_samples=n_samples, seed=seed)
    worst_e = 0.0
    worst_n = 0.0
    for j, th in _acceptance_cells():
        params = ModelParams(J=j, theta=th)
        _, states = _mapping_states(params, spec)
        for s in states:
            de, dn = conservation_drifts(params, s)
            worst_e = max(worst_e, de)
            worst_n = max(worst_n, dn)
    n_traj = len(_acceptance_cells()) * n_samples
    return [
        CheckResult(
            "occupation sum N_A + N_B conserved over T=24",
            worst_n < NSUM_TOL,
            f"worst drift {worst_n:.2e} (tol {NSUM_TOL:g}, {n_traj} trajectories)",
        ),
        CheckResult(
            "mapping energy conserved over T=24",
            worst_e < ENERGY_TOL,
            f"worst rel drift {worst_e:.2e} (tol {ENERGY_TOL:g}, {n_traj} trajectories)",
        ),
    ]


def check_adiabatic_conservation(n_samples=40, seed=None) -> CheckResult:
    spec = SamplingSpec(n_samples=n_samples) if seed is None else \
        SamplingSpec(n_samples=n_samples, seed=seed)
    worst = 0.0
    n_steps = int(round(24.0 / ADIABATIC_DT))
    for j in SWEEP_J:
        params = ModelParams(J=j)
        system = AdiabaticSystem(params)
        for p in sample_nuclear(spec, params):
            y = init_adiabatic_state(p)
            e0 = system.energy(y)
            status, _, drift = system.advance(y, ADIABATIC_DT, n_steps, e0)
            worst = max(worst, drift if status == 0 else math.inf)
    return CheckResult(
        "adiabatic energy conserved over T=24",
        worst < ENERGY_TOL,
        f"worst rel drift {worst:.2e} (tol {ENERGY_TOL:g}, {3 * n_samples} trajectories)",
    )


def check_reversibility(n_samples=40, seed=None) -> CheckResult:
    """Forward T=24, momentum flip, forward T=24 recovers the start.

    Runs on the integrable J=0 configuration: on chaotic trajectories the
    forward-backward error is amplified by exp(2 lambda T), which exceeds
    double precision at T=24, so regular motion is the only regime where
    this oracle is informative at full horizon.
    """
    spec = SamplingSpec(n_samples=n_samples) if seed is None else \
        SamplingSpec(n_samples=n_samples, seed=seed)
    params = ModelParams(J=0.0)
    system = MappingSystem(params)
    n_steps = int(round(24.0 / MAPPING_DT))
    worst = 0.0
    _, states = _mapping_states(params, spec)
    for s in states:
        e0 = system.energy(s)
        w = system.metric_weights(e0)
        y = np.array(s)
        system.advance(y, MAPPING_DT, n_steps, e0)
        y = reverse_momenta(y)
        system.advance(y, MAPPING_DT, n_steps, e0)
        y = reverse_momenta(y)
        worst = max(worst, float(np.max(np.abs((y - s) * w))))
    return CheckResult(
        "forward-backward reversibility over T=24 (J=0)",
        worst < REVERSE_TOL,
        f"worst normalized component err {worst:.2e} "
        f"(tol {REVERSE_TOL:g}, {n_samples} trajectories)",
    )


def x_energy_drift(params: ModelParams, state, t_final=24.0, dt=MAPPING_DT,
                   stride=40) -> float:
    """Relative drift of the x-mode energy (p_x^2 + wx^2 x^2)/2 over t_final."""
    system = MappingSystem(params)
    y = np.array(state, dtype=np.float64)
    n_steps = int(round(t_final / dt))
    recorded = np.empty((n_steps // stride, 8), dtype=np.float64)
    status, _, _ = system.record(y, dt, n_steps, system.energy(y), stride, recorded)
    if status != 0:
        return math.inf
    wx2 = params.omega_x**2
    ex = 0.5 * (recorded[:, 2] ** 2 + wx2 * recorded[:, 0] ** 2)
    ex0 = 0.5 * (state[2] ** 2 + wx2 * state[0] ** 2)
    return float(np.max(np.abs(ex - ex0)) / max(1.0, ex0))


def check_x_energy_theta0(n_samples=40, seed=None) -> CheckResult:
    """At theta=0 the x mode decouples exactly, so its energy is conserved."""
    spec = SamplingSpec(n_samples=n_samples) if seed is None else \
        SamplingSpec(n_samples=n_samples, seed=seed)
    params = ModelParams(J=1.5, theta=0.0)
    worst = 0.0
    _, states = _mapping_states(params, spec)
    for s in states:
        worst = max(worst, x_energy_drift(params, s))
    return CheckResult(
        "x-mode energy conserved at theta=0 over T=24",
        worst < EX_TOL,
        f"worst rel drift {worst:.2e} (tol {EX_TOL:g}, {n_samples} trajectories)",
    )


def run_invariant_suite(quick=False) -> list[CheckResult]:
    n_pts = 40 if quick else 120
    n_samples = 6 if quick else 40
    results = [
        check_potential_gradients(n_points=n_pts),
        check_mapping_symplectic_gradient(n_points=n_pts),
        check_adiabatic_eigenvalue(n_points=3 * n_pts),
    ]
    results += check_mapping_conservation(n_samples=n_samples)
    results.append(check_adiabatic_conservation(n_samples=n_samples))
    results.append(check_reversibility(n_samples=n_samples))
    results.append(check_x_energy_theta0(n_samples=n_samples))
    return results
