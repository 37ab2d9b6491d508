"""Closed-form optima, sweeps, and the verification harness."""

import dataclasses
import math

import numpy as np
import pytest

from msi_optomech import (
    ImaginaryEta,
    MirrorSpec,
    Topology,
    VerificationFailed,
    epsilon_max,
    epsilon_opt,
)
from msi_optomech.optimize import (
    DEFAULT_GAMMA0_SWEEP,
    SweepSpec,
    build_model,
    cooling_sweep,
    find_dip,
    grid_argmax_epsilon,
    verify_closed_forms,
)

TWO_PI = 2.0 * math.pi


class TestEpsilonClosedForms:
    def test_fully_reflective_low_linewidth_limits(self):
        mirror = MirrorSpec(1.0, 0.0)
        assert epsilon_opt(mirror, 1e-12) == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-6)
        assert epsilon_max(mirror, 1e-12) == pytest.approx(1.0, rel=1e-6)

    def test_table_top_optimum_near_0p7(self):
        # r_m^2 = 0.98 with gamma0 tau ~ 2.1e-4
        mirror = MirrorSpec.from_power_reflectivity(0.98)
        assert epsilon_opt(mirror, 2.1e-4) == pytest.approx(0.7, abs=0.005)

    def test_opt_below_max(self, rng):
        for _ in range(100):
            mirror = MirrorSpec.from_power_reflectivity(rng.uniform(0.1, 0.99))
            g0t = 10.0 ** rng.uniform(-6.0, -0.5)
            assert epsilon_opt(mirror, g0t) < epsilon_max(mirror, g0t)

    def test_domain_validation(self):
        mirror = MirrorSpec(1.0, 0.0)
        with pytest.raises(ValueError):
            epsilon_opt(mirror, 0.0)
        with pytest.raises(ValueError):
            epsilon_max(mirror, 1.5)


class TestGridArgmaxOracle:
    def test_argmax_matches_closed_form(self, default_params, rng):
        base = dataclasses.replace(
            default_params, topology=Topology.SRM, epsilon_mode="fixed", epsilon=0.0
        )
        for _ in range(5):
            r_sq = rng.uniform(0.3, 0.98)
            g0t = 10.0 ** rng.uniform(-4.0, -2.3)
            p = dataclasses.replace(base, mirror_power_reflectivity=r_sq)
            mirror = MirrorSpec.from_power_reflectivity(r_sq)
            eps_grid = grid_argmax_epsilon(p, g0t / p.tau)
            assert abs(eps_grid - epsilon_opt(mirror, g0t)) <= 1e-3

    def test_kappa_decreases_beyond_optimum(self, default_params):
        # single-peak structure: damping falls monotonically past the optimum
        p = dataclasses.replace(
            default_params, topology=Topology.SRM, epsilon_mode="fixed", epsilon=0.0
        )
        mirror = MirrorSpec.from_power_reflectivity(p.mirror_power_reflectivity)
        g0t = p.gamma0 * p.tau
        eo, em = epsilon_opt(mirror, g0t), epsilon_max(mirror, g0t)
        eps_grid = np.linspace(eo + 1e-3, em - 1e-3, 60)
        kappas = [
            build_model(p, epsilon=float(e)).mod.kappa_M for e in eps_grid
        ]
        assert np.all(np.diff(kappas) < 0.0)

    def test_eta_real_up_to_max_imaginary_beyond(self, default_params):
        p = dataclasses.replace(
            default_params, topology=Topology.SRM, epsilon_mode="fixed", epsilon=0.0
        )
        mirror = MirrorSpec.from_power_reflectivity(p.mirror_power_reflectivity)
        em = epsilon_max(mirror, p.gamma0 * p.tau)
        model = build_model(p, epsilon=em)
        assert model.couplings.eta == 0.0
        for frac in (0.3, 0.7, 0.95):
            assert build_model(p, epsilon=frac * em).couplings.eta > 0.0
        with pytest.raises(ImaginaryEta):
            build_model(p, epsilon=em + 1e-5)


class TestCoolingSweep:
    def test_ordered_and_flagged(self, default_params):
        curve = cooling_sweep(
            default_params, SweepSpec("gamma0", 1e4, 3e6, 40, "log"), "opt"
        )
        assert np.all(np.diff(curve.gamma0) > 0.0)
        assert curve.stable.dtype == bool
        assert curve.n_t.shape == curve.gamma0.shape

    def test_unsolvable_points_flagged_not_dropped(self, default_params):
        # drive gamma0 tau past 1: those points must be retained as gaps
        huge = SweepSpec("gamma0", 1e4, 1e12, 30, "log")
        curve = cooling_sweep(default_params, huge, "opt")
        assert curve.gamma0.size == 30
        assert not curve.stable.all()
        assert np.isnan(curve.n_t[~curve.stable]).all()

    def test_optimal_beats_balanced_everywhere(self, default_params):
        sweep = SweepSpec("gamma0", 1e4, 3e6, 60, "log")
        balanced = dataclasses.replace(
            default_params,
            mirror_power_reflectivity=0.5,
            epsilon_mode="fixed",
            epsilon=0.0,
        )
        for top in (Topology.SRM, Topology.PRM):
            opt = cooling_sweep(
                dataclasses.replace(default_params, topology=top), sweep, "opt"
            )
            bal = cooling_sweep(
                dataclasses.replace(balanced, topology=top), sweep, "fixed"
            )
            both = opt.stable & bal.stable
            assert both.any()
            assert np.all(opt.n_t[both] < bal.n_t[both])

    def test_rejects_non_gamma0_sweeps(self, default_params):
        with pytest.raises(ValueError):
            cooling_sweep(default_params, SweepSpec("W_in", 0.01, 1.0, 5, "log"))


class TestFindDip:
    def test_recovers_global_minimum_of_bimodal_function(self):
        # local dip at 2.0 (value 0.5), global dip at 6.0 (value 0.2), peak between
        def fn(x):
            x = np.asarray(x, dtype=float)
            return (
                1.0
                - 0.5 * np.exp(-((x - 2.0) ** 2) / 0.1)
                - 0.8 * np.exp(-((x - 6.0) ** 2) / 0.1)
                + 2.0 * np.exp(-((x - 4.0) ** 2) / 0.1)
            )

        x, val = find_dip(fn, 1.0, 10.0, xtol=1e-6)
        assert x == pytest.approx(6.0, abs=1e-4)
        assert val == pytest.approx(0.2, abs=1e-4)


class TestVerifyHarness:
    def test_reports_known_dip_deviation_only(self, default_params):
        # every closed form agrees with its oracle except the dip position of
        # the power-recycled demonstration point, where dip and resonance
        # overlap (separation < 1) and the closed form is ~Gamma_sq/2.8
        # accurate; the harness must surface exactly that entry
        with pytest.raises(VerificationFailed) as exc_info:
            verify_closed_forms(default_params, sample_count=60)
        report = exc_info.value.report
        failed = [e.name for e in report.entries if not e.passed]
        assert failed == ["dip_frequency_closed_form_vs_spectrum_minimum_PRM"]
        passed = [e.name for e in report.entries if e.passed]
        assert "couplings_closed_form_vs_finite_difference" in passed
        assert "epsilon_opt_vs_grid_argmax" in passed
        assert "dip_frequency_closed_form_vs_spectrum_minimum_SRM" in passed
        assert "qrpn_closed_form_vs_displacement_row" in passed
        assert "degenerate_operating_point_guard" in passed

    def test_sample_count_validation(self, default_params):
        with pytest.raises(ValueError):
            verify_closed_forms(default_params, sample_count=0)
