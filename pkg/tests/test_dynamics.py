import math

import numpy as np
import pytest

from mapchaos import model
from mapchaos.dynamics import (
    AdiabaticSystem,
    CallableSystem,
    DivergenceError,
    EnergyDriftError,
    IntegratorConfig,
    MappingSystem,
    SingularityError,
    integrate,
    make_system,
    reverse_momenta,
    rk4_step,
)
from mapchaos.ensemble import SamplingSpec, init_mapping_state, sample_nuclear
from mapchaos.model import ModelParams


def harmonic_field(y):
    return np.array([y[1], -y[0]])


class TestRk4Step:
    def test_zero_field(self):
        s = np.array([1.0, -2.0, 3.0])
        out = rk4_step(s, 0.1, lambda y: np.zeros(3))
        assert np.array_equal(out, s)

    def test_harmonic_period(self):
        dt = 1e-3
        n = round(2 * math.pi / dt)
        y = np.array([1.0, 0.0])
        for _ in range(n):
            y = rk4_step(y, dt, harmonic_field)
        # one full period lands 2*pi - n*dt short; compare to the analytic flow
        t = n * dt
        exact = np.array([math.cos(t), -math.sin(t)])
        assert np.max(np.abs(y - exact)) < 1e-10

    def test_local_order_is_five(self):
        dts = [1e-2, 5e-3, 2.5e-3]
        errs = []
        for dt in dts:
            y = rk4_step(np.array([1.0, 0.0]), dt, harmonic_field)
            exact = np.array([math.cos(dt), -math.sin(dt)])
            errs.append(np.max(np.abs(y - exact)))
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert slope == pytest.approx(5.0, abs=0.2)

    def test_nonfinite_raises(self):
        with np.errstate(over="ignore"), pytest.raises(DivergenceError):
            rk4_step(np.array([1e200, 0.0]), 1.0, lambda y: y * y)


class TestIntegratorConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            IntegratorConfig(dt=0.0)
        with pytest.raises(ValueError):
            IntegratorConfig(t_final=-1.0)
        with pytest.raises(ValueError):
            IntegratorConfig(energy_tol=0.0)

    def test_step_count_exact_and_partial(self):
        n, rem = IntegratorConfig(dt=1e-3, t_final=1.0).step_count()
        assert n == 1000 and rem == 0.0
        n, rem = IntegratorConfig(dt=0.3, t_final=1.0).step_count()
        assert n == 3 and rem == pytest.approx(0.1)


class TestIntegrate:
    def test_j_zero_keeps_occupation(self):
        params = ModelParams(J=0.0)
        spec = SamplingSpec(n_samples=3)
        pts = sample_nuclear(spec, params)
        s0 = init_mapping_state(pts[0], params, spec)
        cfg = IntegratorConfig(dt=1e-4, t_final=24.0)
        traj = integrate(s0, params, cfg, "mapping")
        xa, pa, xb, pb = traj.states[-1][4:]
        na = model.occupation(xa, pa, params.gamma)
        assert abs(na - 1.0) < 1e-9

    def test_forward_backward_recovers_start(self):
        params = ModelParams(J=0.0)
        spec = SamplingSpec(n_samples=2)
        pts = sample_nuclear(spec, params)
        s0 = init_mapping_state(pts[1], params, spec)
        cfg = IntegratorConfig(dt=1e-4, t_final=24.0)
        fwd = integrate(s0, params, cfg, "mapping")
        back = integrate(reverse_momenta(fwd.states[-1]), params, cfg, "mapping")
        recovered = reverse_momenta(back.states[-1])
        system = MappingSystem(params)
        w = system.metric_weights(system.energy(s0))
        assert np.max(np.abs((recovered - s0) * w)) < 1e-6

    def test_theta_zero_x_energy(self):
        params = ModelParams(theta=0.0)
        spec = SamplingSpec(n_samples=3)
        pts = sample_nuclear(spec, params)
        s0 = init_mapping_state(pts[0], params, spec)
        cfg = IntegratorConfig(dt=5e-5, t_final=24.0, record_stride=100)
        traj = integrate(s0, params, cfg, "mapping")
        wx2 = params.omega_x**2
        ex = 0.5 * (traj.states[:, 2] ** 2 + wx2 * traj.states[:, 0] ** 2)
        assert np.max(np.abs(ex - ex[0])) / max(1.0, ex[0]) < 1e-6

    def test_occupations_stay_in_open_range(self):
        # N_A + N_B = 1 plus non-negative shell radii pins each N_i to
        # (-gamma, 1 + gamma)
        params = ModelParams(J=7.5)
        spec = SamplingSpec(n_samples=2)
        pts = sample_nuclear(spec, params)
        s0 = init_mapping_state(pts[0], params, spec)
        cfg = IntegratorConfig(dt=5e-5, t_final=24.0, record_stride=200)
        traj = integrate(s0, params, cfg, "mapping")
        g = params.gamma
        for xa, pa, xb, pb in traj.states[:, 4:]:
            na = model.occupation(xa, pa, g)
            nb = model.occupation(xb, pb, g)
            assert -g - 1e-9 < na < 1 + g + 1e-9
            assert -g - 1e-9 < nb < 1 + g + 1e-9

    def test_determinism_bit_identical(self):
        params = ModelParams()
        spec = SamplingSpec(n_samples=1)
        s0 = init_mapping_state(sample_nuclear(spec, params)[0], params, spec)
        cfg = IntegratorConfig(dt=1e-4, t_final=2.0, record_stride=500)
        t1 = integrate(s0, params, cfg, "mapping")
        t2 = integrate(s0, params, cfg, "mapping")
        assert np.array_equal(t1.states, t2.states)
        assert np.array_equal(t1.times, t2.times)

    def test_recording_layout(self):
        params = ModelParams()
        spec = SamplingSpec(n_samples=1)
        s0 = init_mapping_state(sample_nuclear(spec, params)[0], params, spec)
        cfg = IntegratorConfig(dt=1e-4, t_final=1.0, record_stride=2500)
        traj = integrate(s0, params, cfg, "mapping")
        assert np.all(np.diff(traj.times) > 0)
        assert traj.states.shape[0] == traj.times.shape[0] == 5
        assert traj.times[0] == 0.0 and traj.times[-1] == 1.0
        assert np.array_equal(traj.states[0], s0)
        # endpoints only
        cfg0 = IntegratorConfig(dt=1e-4, t_final=1.0, record_stride=0)
        traj0 = integrate(s0, params, cfg0, "mapping")
        assert traj0.states.shape[0] == 2
        assert np.array_equal(traj0.states[-1], traj.states[-1])

    def test_partial_final_step_flagged(self):
        params = ModelParams()
        spec = SamplingSpec(n_samples=1)
        s0 = init_mapping_state(sample_nuclear(spec, params)[0], params, spec)
        cfg = IntegratorConfig(dt=3e-4, t_final=1.0)
        traj = integrate(s0, params, cfg, "mapping")
        assert traj.partial_final_step
        assert traj.max_energy_drift < 1e-6

    def test_energy_drift_abort(self):
        params = ModelParams()
        spec = SamplingSpec(n_samples=1)
        s0 = init_mapping_state(sample_nuclear(spec, params)[0], params, spec)
        # dt coarse enough that drift blows through an absurdly tight budget
        cfg = IntegratorConfig(dt=1e-3, t_final=24.0, energy_tol=1e-12)
        with pytest.raises(EnergyDriftError) as exc:
            integrate(s0, params, cfg, "mapping")
        assert exc.value.drift > 1e-12

    def test_divergence_detected(self):
        params = ModelParams()
        bad = np.array([1e160, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0])
        cfg = IntegratorConfig(dt=1e-3, t_final=1.0)
        with pytest.raises(DivergenceError):
            integrate(bad, params, cfg, "mapping")

    def test_adiabatic_singularity_rejected(self):
        p = ModelParams(omega_x=1.0, omega_y=1.0, a=0.0, theta=0.0,
                        J=0.0, eps_b=0.0)
        with pytest.raises(SingularityError):
            integrate(np.array([1.0, 1.0, 0.0, 0.0]), p, IntegratorConfig(), "adiabatic")

    def test_adiabatic_energy_conserved(self):
        params = ModelParams(J=1.5)
        spec = SamplingSpec(n_samples=2)
        pts = sample_nuclear(spec, params)
        cfg = IntegratorConfig(dt=5e-4, t_final=24.0)
        traj = integrate(np.array([pts[0].x, pts[0].y, 0.0, 0.0]), params, cfg, "adiabatic")
        assert traj.max_energy_drift < 1e-6
        assert abs(traj.final_energy - traj.initial_energy) < 1e-6 * max(
            1.0, abs(traj.initial_energy)
        )


class TestSystems:
    def test_make_system(self):
        p = ModelParams()
        assert isinstance(make_system("mapping", p), MappingSystem)
        assert isinstance(make_system("adiabatic", p), AdiabaticSystem)
        custom = CallableSystem(lambda y: -y, dim=2)
        assert make_system(custom, p) is custom
        with pytest.raises(ValueError):
            make_system("nope", p)

    def test_callable_system_integrates_with_recording(self):
        # exponential decay through the generic path, energy hook included
        system = CallableSystem(lambda y: -y, dim=2,
                                energy=lambda y: float(y[0] + y[1]))
        cfg = IntegratorConfig(dt=1e-2, t_final=1.0, record_stride=25,
                               energy_tol=10.0)
        traj = integrate(np.array([1.0, 2.0]), ModelParams(), cfg, system)
        # rows at t = 0, 0.25, 0.5, 0.75, 1.0
        assert traj.states.shape == (5, 2)
        np.testing.assert_allclose(traj.states[-1], np.exp(-1.0) * np.array([1.0, 2.0]),
                                   rtol=1e-9)

    def test_kernel_rhs_matches_reference(self):
        rng = np.random.default_rng(11)
        p = ModelParams()
        ms = MappingSystem(p)
        ads = AdiabaticSystem(p)
        for _ in range(50):
            s8 = rng.uniform(-3, 3, 8)
            np.testing.assert_allclose(
                ms.rhs(s8), model.mapping_vector_field(s8, p), rtol=1e-14, atol=1e-14
            )
            assert ms.energy(s8) == pytest.approx(model.mapping_energy(s8, p), rel=1e-14)
            s4 = rng.uniform(-3, 3, 4)
            np.testing.assert_allclose(
                ads.rhs(s4), model.adiabatic_vector_field(s4, p), rtol=1e-13, atol=1e-13
            )
            assert ads.energy(s4) == pytest.approx(model.adiabatic_energy(s4, p), rel=1e-13)

    def test_halved_step_reduces_drift(self):
        params = ModelParams()
        spec = SamplingSpec(n_samples=1)
        s0 = init_mapping_state(sample_nuclear(spec, params)[0], params, spec)
        system = MappingSystem(params)
        drifts = []
        for dt in (4e-4, 2e-4):
            y = s0.copy()
            _, _, drift = system.advance(y, dt, int(round(4.0 / dt)), system.energy(y))
            drifts.append(drift)
        assert drifts[1] < drifts[0] / 8

    def test_default_step_drift_budget(self):
        # spec'd example budget: relative drift < 1e-8 at the default step
        params = ModelParams()
        spec = SamplingSpec(n_samples=1)
        s0 = init_mapping_state(sample_nuclear(spec, params)[0], params, spec)
        traj = integrate(s0, params, IntegratorConfig(), "mapping")
        assert traj.max_energy_drift < 1e-8

    def test_reverse_momenta(self):
        s = np.arange(8.0)
        r = reverse_momenta(s)
        assert np.array_equal(r[[0, 1, 4, 6]], s[[0, 1, 4, 6]])
        assert np.array_equal(r[[2, 3, 5, 7]], -s[[2, 3, 5, 7]])
        s4 = np.arange(4.0)
        r4 = reverse_momenta(s4)
        assert np.array_equal(r4, [0.0, 1.0, -2.0, -3.0])
