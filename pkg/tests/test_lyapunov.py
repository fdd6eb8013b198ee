import math

import numpy as np
import pytest

from mapchaos.dynamics import CallableSystem, DivergenceError, IntegratorConfig
from mapchaos.ensemble import SamplingSpec, init_mapping_state, sample_nuclear
from mapchaos.lyapunov import (
    LyapunovConfig,
    benettin_lambda,
    normalized_distance,
    perturb,
)
from mapchaos.model import ModelParams


class TestNormalizedDistance:
    def test_identity(self):
        p = ModelParams()
        s = np.arange(8.0)
        assert normalized_distance(s, s, p, 28.0) == 0.0

    def test_tilde_scaling_factors(self):
        # gamma = 1/2, E = 1/2, unit frequencies: electronic A pair scales by
        # 1/sqrt(3), everything else by 1
        p = ModelParams(omega_x=1.0, omega_y=1.0, gamma=0.5)
        e = 0.5
        expected = {4: 1 / math.sqrt(3.0), 5: 1 / math.sqrt(3.0),
                    6: 1.0, 7: 1.0, 0: 1.0, 1: 1.0, 2: 1.0, 3: 1.0}
        base = np.zeros(8)
        for idx, w in expected.items():
            other = base.copy()
            other[idx] = 1.0
            assert normalized_distance(base, other, p, e) == pytest.approx(w, rel=1e-14)

    def test_metric_axioms(self):
        p = ModelParams()
        rng = np.random.default_rng(21)
        for _ in range(50):
            s1, s2, s3 = rng.uniform(-3, 3, (3, 8))
            d12 = normalized_distance(s1, s2, p, 28.0)
            d21 = normalized_distance(s2, s1, p, 28.0)
            d13 = normalized_distance(s1, s3, p, 28.0)
            d23 = normalized_distance(s2, s3, p, 28.0)
            assert d12 == d21
            assert d13 <= d12 + d23 + 1e-12

    def test_adiabatic_uses_four_components(self):
        p = ModelParams()
        s1 = np.array([1.0, 0.0, 0.0, 0.0])
        s2 = np.array([0.0, 0.0, 0.0, 0.0])
        d = normalized_distance(s1, s2, p, 0.5)
        assert d == pytest.approx(p.omega_x / math.sqrt(1.0), rel=1e-14)

    def test_literal_metric_drops_b_pair(self):
        p = ModelParams()
        s1 = np.zeros(8)
        s2 = np.zeros(8)
        s2[6] = 1.0  # x_B difference invisible to the literal form
        assert normalized_distance(s1, s2, p, 28.0, metric="literal") == 0.0
        s3 = np.zeros(8)
        s3[4] = 1.0  # x_A difference carries both shell weights
        expected = math.sqrt(1 / (2 + 2 * p.gamma) + 1 / (2 * p.gamma))
        assert normalized_distance(s1, s3, p, 28.0, metric="literal") == pytest.approx(
            expected, rel=1e-14
        )


class TestPerturb:
    def test_offset_norm_is_d0(self):
        p = ModelParams()
        rng = np.random.default_rng(22)
        for seed in (0, 1, 12345):
            s = rng.uniform(-3, 3, 8)
            for d0 in (1e-7, 1e-5):
                q = perturb(s, d0, seed, p, 28.0)
                assert normalized_distance(s, q, p, 28.0) == pytest.approx(d0, abs=1e-12)

    def test_seed_determinism(self):
        p = ModelParams()
        s = np.arange(8.0)
        q1 = perturb(s, 1e-7, 99, p, 28.0)
        q2 = perturb(s, 1e-7, 99, p, 28.0)
        q3 = perturb(s, 1e-7, 100, p, 28.0)
        assert np.array_equal(q1, q2)
        assert not np.array_equal(q1, q3)

    def test_renormalization_restores_offset_norm(self):
        # the pull-back step rescales the raw offset linearly, so the tilde
        # norm comes back to d0 exactly up to rounding
        p = ModelParams()
        rng = np.random.default_rng(23)
        d0 = 1e-7
        for _ in range(20):
            ref, aux = rng.uniform(-3, 3, (2, 8))
            d = normalized_distance(ref, aux, p, 28.0)
            pulled = ref + (aux - ref) * (d0 / d)
            assert normalized_distance(ref, pulled, p, 28.0) == pytest.approx(
                d0, abs=1e-12
            )

    def test_occupation_sum_shift_is_order_d0(self):
        p = ModelParams()
        spec = SamplingSpec(n_samples=1)
        s = init_mapping_state(sample_nuclear(spec, p)[0], p, spec)
        d0 = 1e-7
        q = perturb(s, d0, 5, p, 28.0)

        def nsum(state):
            return 0.5 * np.sum(state[4:] ** 2) - 2 * p.gamma

        assert abs(nsum(q) - nsum(s)) < 100 * d0


class TestBenettinLinearOracle:
    def test_recovers_positive_exponent(self):
        lam = 0.7
        system = CallableSystem(lambda y: lam * y, dim=2)
        rec = benettin_lambda(
            np.array([1.0, 1.0]), ModelParams(), IntegratorConfig(dt=1e-3),
            LyapunovConfig(segment_time=12.0, n_segments=4, seed=3,
                           averaging="restarts"),
            system,
        )
        assert rec.lambda_max == pytest.approx(lam, abs=1e-4)
        assert len(rec.segment_exponents) == 4
        assert rec.lambda_max == pytest.approx(np.mean(rec.segment_exponents), rel=1e-15)

    def test_negative_exponent_not_clamped(self):
        lam = -0.3
        system = CallableSystem(lambda y: lam * y, dim=2)
        rec = benettin_lambda(
            np.array([1.0, 1.0]), ModelParams(), IntegratorConfig(dt=1e-3),
            LyapunovConfig(segment_time=12.0, n_segments=3, seed=4,
                           averaging="restarts"),
            system,
        )
        assert rec.lambda_max == pytest.approx(lam, abs=1e-4)
        assert rec.lambda_max < 0

    def test_consecutive_mode_underflows_on_unbounded_flow(self):
        # growing reference + absolute-size offset eventually quantizes to
        # zero separation; the driver must report it rather than return junk
        system = CallableSystem(lambda y: 0.7 * y, dim=2)
        with pytest.raises(DivergenceError) as exc:
            benettin_lambda(
                np.array([1.0, 1.0]), ModelParams(), IntegratorConfig(dt=1e-3),
                LyapunovConfig(segment_time=24.0, n_segments=10, seed=3), system,
            )
        assert exc.value.record.status == "divergence"
        assert exc.value.record.failed_segment is not None


class TestBenettinMapping:
    def test_j_zero_exponent_decreases_with_horizon(self):
        params = ModelParams(J=0.0)
        spec = SamplingSpec(n_samples=3)
        cfg = IntegratorConfig(dt=1e-4)
        for p in sample_nuclear(spec, params):
            s = init_mapping_state(p, params, spec)
            l24 = benettin_lambda(
                s, params, cfg, LyapunovConfig(segment_time=24.0, n_segments=2, seed=11)
            ).lambda_max
            l48 = benettin_lambda(
                s, params, cfg, LyapunovConfig(segment_time=48.0, n_segments=2, seed=11)
            ).lambda_max
            assert l48 < l24

    def test_rescaling_exactness_and_record_shape(self):
        params = ModelParams()
        spec = SamplingSpec(n_samples=1)
        s = init_mapping_state(sample_nuclear(spec, params)[0], params, spec)
        cfg = LyapunovConfig(segment_time=2.0, n_segments=4, seed=8)
        rec = benettin_lambda(s, params, IntegratorConfig(dt=1e-4), cfg, "mapping",
                              sample_index=17)
        assert rec.sample_index == 17
        assert rec.status == "ok"
        assert len(rec.segment_exponents) == 4
        assert rec.lambda_max == pytest.approx(np.mean(rec.segment_exponents), rel=1e-15)
        assert rec.energy_drift < 1e-6

    def test_determinism(self):
        params = ModelParams()
        spec = SamplingSpec(n_samples=1)
        s = init_mapping_state(sample_nuclear(spec, params)[0], params, spec)
        cfg = LyapunovConfig(segment_time=2.0, n_segments=3, seed=8)
        r1 = benettin_lambda(s, params, IntegratorConfig(dt=1e-4), cfg, "mapping")
        r2 = benettin_lambda(s, params, IntegratorConfig(dt=1e-4), cfg, "mapping")
        assert r1.segment_exponents == r2.segment_exponents

    def test_segment_time_must_fit_grid(self):
        params = ModelParams()
        spec = SamplingSpec(n_samples=1)
        s = init_mapping_state(sample_nuclear(spec, params)[0], params, spec)
        with pytest.raises(ValueError):
            benettin_lambda(s, params, IntegratorConfig(dt=1e-4),
                            LyapunovConfig(segment_time=1.00003), "mapping")

    def test_literal_metric_variant_runs(self):
        params = ModelParams()
        spec = SamplingSpec(n_samples=1)
        s = init_mapping_state(sample_nuclear(spec, params)[0], params, spec)
        cfg = LyapunovConfig(segment_time=2.0, n_segments=2, seed=8, metric="literal")
        rec = benettin_lambda(s, params, IntegratorConfig(dt=1e-4), cfg, "mapping")
        assert rec.status == "ok"
        std = benettin_lambda(s, params, IntegratorConfig(dt=1e-4),
                              LyapunovConfig(segment_time=2.0, n_segments=2, seed=8),
                              "mapping")
        # sensitivity switch: same machinery, different metric, nearby values
        assert rec.lambda_max != std.lambda_max

    def test_dt_halving_keeps_sharp_cell_median(self):
        # integrator-convergence probe on the sharp-peak cell; broad cells
        # have n-sample median noise above 1% by construction (see ledger)
        params = ModelParams(J=1.5)
        spec = SamplingSpec(n_samples=16)
        medians = []
        for dt in (5e-5, 2.5e-5):
            lams = []
            for p in sample_nuclear(spec, params):
                s = init_mapping_state(p, params, spec)
                rec = benettin_lambda(s, params, IntegratorConfig(dt=dt),
                                      LyapunovConfig(seed=7), "mapping")
                lams.append(rec.lambda_max)
            medians.append(float(np.median(lams)))
        assert abs(medians[1] - medians[0]) / abs(medians[0]) < 0.01


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(segment_time=0.0),
            dict(n_segments=0),
            dict(d0=0.0),
            dict(d0=2.0),
            dict(metric="weird"),
            dict(averaging="sometimes"),
            dict(metric_energy=-1.0),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            LyapunovConfig(**kwargs)
