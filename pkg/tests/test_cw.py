"""Unit tests for the continuous-wave cost estimator."""

import pytest

from qmf import cw
from qmf.errors import ValidationError

DEFAULTS = cw.CwSearchSpec()


class TestTemplateCounts:
    def test_default_totals(self):
        assert cw.n_total(DEFAULTS) == pytest.approx(2e28)
        assert cw.n_sky_f1(DEFAULTS) == pytest.approx(1e20)
        assert cw.n_f0(DEFAULTS) == pytest.approx(2e8)

    @pytest.mark.parametrize("field,factor,expected_ratio", [
        ("f_khz", 2.0, 4.0),          # quadratic
        ("t_obs_yr", 2.0, 8.0),       # cubic
        ("delta_f_hz", 2.0, 2.0),     # linear
        ("delta_f1_hz_s", 2.0, 2.0),  # linear
    ])
    def test_total_scaling_laws(self, field, factor, expected_ratio):
        scaled = cw.CwSearchSpec(**{field: getattr(DEFAULTS, field) * factor})
        assert cw.n_total(scaled) / cw.n_total(DEFAULTS) == pytest.approx(expected_ratio)

    def test_half_frequency_quarters_total(self):
        assert cw.n_total(cw.CwSearchSpec(f_khz=0.5)) == pytest.approx(2e28 / 4)

    @pytest.mark.parametrize("field,factor,expected_ratio", [
        ("f_khz", 2.0, 4.0),
        ("t_obs_yr", 2.0, 4.0),
        ("delta_f1_hz_s", 2.0, 2.0),
    ])
    def test_sky_f1_scaling_laws(self, field, factor, expected_ratio):
        scaled = cw.CwSearchSpec(**{field: getattr(DEFAULTS, field) * factor})
        assert cw.n_sky_f1(scaled) / cw.n_sky_f1(DEFAULTS) == pytest.approx(expected_ratio)

    def test_f0_count_linear_in_span(self):
        assert cw.n_f0(cw.CwSearchSpec(t_obs_yr=0.5)) == pytest.approx(1e8)
        assert cw.n_f0(cw.CwSearchSpec(t_obs_yr=10.0)) == pytest.approx(2e9)

    def test_validation(self):
        with pytest.raises(ValidationError):
            cw.CwSearchSpec(t_obs_yr=-1.0)
        with pytest.raises(ValidationError):
            cw.CwSearchSpec(delta_target=1.5)
        with pytest.raises(ValidationError):
            cw.CwSearchSpec.from_config({"bogus": 1.0})


class TestQuantumCost:
    def test_default_report(self):
        report = cw.quantum_cost(DEFAULTS)
        assert report["ell"] == 6
        assert report["iterations"] == pytest.approx(2e11, rel=0.10)
        assert report["gate_factor"] == 6
        assert report["classical_ops"] == pytest.approx(1e20)
        assert report["quantum_ops"] == pytest.approx(1e12, rel=0.30)
        assert 0.5e8 <= report["speedup"] <= 2e8

    def test_loose_target_needs_one_run(self):
        report = cw.quantum_cost(cw.CwSearchSpec(delta_target=0.09))
        assert report["ell"] == 1

    def test_billion_target_needs_nine(self):
        report = cw.quantum_cost(cw.CwSearchSpec(delta_target=1e-9))
        assert report["ell"] == 9

    def test_speedup_above_crossover(self):
        # quantum_ops < 12 pi ell sqrt(N): the advantage clears 10x once
        # sqrt(N) dominates that prefactor, and 1x well before
        for f_khz in (1e-7, 3e-7, 1e-6, 1e-4, 1e-2, 1.0):
            report = cw.quantum_cost(cw.CwSearchSpec(f_khz=f_khz, delta_target=1e-9))
            if report["n_sky_f1"] >= 1e8:
                assert report["speedup"] > 10.0
            if report["n_sky_f1"] >= 1e6:
                assert report["speedup"] > 1.0
