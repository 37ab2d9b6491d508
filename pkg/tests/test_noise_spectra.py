"""Transfer rows, homodyne budgets, occupancy, and squeezing features."""

import dataclasses
import math

import numpy as np
import pytest

from msi_optomech import (
    InputNoise,
    MechanicalOscillator,
    NormalizedCouplings,
    Topology,
    ba_to_thermal_ratio,
    displacement_transfer,
    homodyne_spectrum,
    output_quadrature_transfer,
    qrpn_psd,
    squeeze_features,
    thermal_occupation,
)
from msi_optomech.cavity_dynamics import CavityRates, ModifiedOscillator
from msi_optomech.noise_spectra import (
    back_action_quadrature_angle,
    bracket_force_psd,
    c_port_coefficient_closed_form,
    dispersive_phase_spectrum_terms,
    optimal_homodyne_angle,
)
from msi_optomech.optimize import build_model, c_port_spectrum_fn, find_dip

TWO_PI = 2.0 * math.pi
TAU = 2.0 * 0.1 / 299792458.0
MECH = MechanicalOscillator(m=5e-11, omega_m=TWO_PI * 3.5e5, Q=1e6, T0=20.0)
BARE = ModifiedOscillator(
    omega_os_sq=0j, omega_m_eff=MECH.omega_m, kappa_m_eff=MECH.kappa_m
)
ZERO_NC = NormalizedCouplings(x=0.0, h=0.0)
RATES = CavityRates(gamma0=TWO_PI * 1e5, gamma1=TWO_PI * 1e6, tau=TAU)


class TestShotFloor:
    def test_unity_floor_both_topologies_three_angles(self):
        grid = np.geomspace(1e4, 1e8, 50)
        for top in (Topology.SRM, Topology.PRM):
            for theta in (0.0, 0.7, math.pi / 2):
                budget = homodyne_spectrum(
                    top, theta, RATES, ZERO_NC, MECH, BARE, grid
                )
                assert np.max(np.abs(budget.total - 1.0)) < 1e-12

    def test_zero_coupling_row_unitarity(self):
        # |reflection|^2 + |transmission|^2 = 1 pointwise for the optical row
        for top in (Topology.SRM, Topology.PRM):
            row = output_quadrature_transfer(
                top, 0.3, RATES, ZERO_NC, MECH, BARE, 2.0e6
            )
            total = (
                abs(row.c_a) ** 2
                + abs(row.c_phi) ** 2
                + abs(row.b_a) ** 2
                + abs(row.b_phi) ** 2
            )
            assert total == pytest.approx(1.0, abs=1e-12)


class TestDisplacementTransfer:
    def test_bare_oscillator_row(self):
        from scipy.constants import hbar

        omega = 1.5e6
        row = displacement_transfer(Topology.SRM, RATES, ZERO_NC, MECH, BARE, omega)
        assert row.b_a == 0.0 and row.b_phi == 0.0
        assert row.c_a == 0.0 and row.c_phi == 0.0
        z = BARE.impedance(omega)
        expected = math.sqrt(2.0 * hbar * MECH.m * MECH.omega_m) / (MECH.m * z)
        assert row.f_t == pytest.approx(expected, rel=1e-12)

    def test_resonance_location_of_impedance(self):
        mod = ModifiedOscillator(
            omega_os_sq=0j, omega_m_eff=MECH.omega_m, kappa_m_eff=0.05 * MECH.omega_m
        )
        grid = np.linspace(0.9 * MECH.omega_m, 1.1 * MECH.omega_m, 200001)
        mags = np.abs(mod.impedance(grid))
        peak = grid[np.argmin(mags)]
        expected = mod.omega_M * math.sqrt(1.0 - mod.kappa_M**2 / (2.0 * mod.omega_M**2))
        assert peak == pytest.approx(expected, rel=1e-6)

    def test_pure_dispersive_regime_drives_amplitude_only(self, fig4_params):
        # at the maximum imbalance eta = 0: back action enters through the
        # amplitude quadratures only
        model = build_model(fig4_params)
        assert model.couplings.eta == 0.0
        row = displacement_transfer(
            model.topology, model.rates, model.nc, model.mech, model.mod, 2.0e6
        )
        assert row.c_phi == 0.0 and row.b_phi == 0.0
        assert abs(row.c_a) > 0.0 and abs(row.b_a) > 0.0


class TestQrpnPsd:
    def test_zero_coupling(self):
        assert qrpn_psd(Topology.SRM, RATES, ZERO_NC, MECH.omega_m) == 0.0

    def test_dispersive_dominated_limit(self):
        # gamma1 >> gamma0 and H >> X: the C-port amplitude term dominates
        nc = NormalizedCouplings(x=1e-4, h=2.0)
        s = qrpn_psd(Topology.SRM, RATES, nc, MECH.omega_m)
        g0, g1, gp = RATES.gamma0, RATES.gamma1, RATES.gamma_plus
        approx = (
            (g0**2 / (2.0 * MECH.omega_m))
            * (gp**2 / (gp**2 + MECH.omega_m**2))
            * nc.h**2
            * (g1 / g0)
        )
        assert s == pytest.approx(approx, rel=0.15)

    def test_row_oracle_agreement(self, default_params, fig5_prm_params):
        for params in (default_params, fig5_prm_params):
            model = build_model(params)
            closed = qrpn_psd(
                model.topology, model.rates, model.nc, model.mod.omega_M
            )
            oracle = bracket_force_psd(
                model.topology,
                model.rates,
                model.nc,
                model.mech,
                model.mod,
                model.mod.omega_M,
            )
            assert closed == pytest.approx(oracle, rel=0.10)

    def test_back_action_scale_matches_covariance_route(self, default_params):
        # rescaling the C terms must equal evaluating the squeezed covariance
        model = build_model(default_params)
        for db in (-6.0, 10.0):
            scaled = qrpn_psd(
                model.topology,
                model.rates,
                model.nc,
                model.mod.omega_M,
                c_back_action_scale=10.0 ** (db / 10.0),
            )
            oracle = bracket_force_psd(
                model.topology,
                model.rates,
                model.nc,
                model.mech,
                model.mod,
                model.mod.omega_M,
                InputNoise(c_squeeze_db=db),
            )
            assert scaled == pytest.approx(oracle, rel=0.10)


class TestOccupancy:
    def test_bare_oscillator_anchor(self):
        occ = thermal_occupation(MECH, BARE, 0.0)
        assert occ.n_t == pytest.approx(1.2e6, rel=0.05)

    def test_no_spring_no_back_action(self):
        from scipy.constants import hbar, k as k_B

        occ = thermal_occupation(MECH, BARE, 0.0)
        assert occ.n_t == pytest.approx(k_B * MECH.T0 / (hbar * MECH.omega_m), rel=1e-12)
        assert occ.t_eff == pytest.approx(MECH.T0, rel=1e-12)

    def test_back_action_floor(self, default_params):
        model = build_model(default_params)
        s_lp = qrpn_psd(model.topology, model.rates, model.nc, model.mod.omega_M)
        occ = thermal_occupation(model.mech, model.mod, s_lp)
        assert occ.n_t >= s_lp / (2.0 * model.mod.kappa_M)

    def test_bose_mode_matches_high_temperature_in_hot_limit(self):
        hot = thermal_occupation(MECH, BARE, 0.0, mode="high_temperature")
        bose = thermal_occupation(MECH, BARE, 0.0, mode="bose")
        assert bose.n_t == pytest.approx(hot.n_t, rel=1e-3)


class TestOutputComposition:
    def test_c_coefficient_matches_symbolic_elimination(
        self, fig5_srm_params, fig5_prm_params
    ):
        # composing direct + displacement rows must reproduce the one-line
        # symbolic substitution at the correlation angle
        for params in (fig5_srm_params, fig5_prm_params):
            model = build_model(params)
            theta = optimal_homodyne_angle(model.topology, model.nc)
            for omega in np.linspace(1.0e6, 6.0e6, 13):
                row = output_quadrature_transfer(
                    model.topology,
                    theta,
                    model.rates,
                    model.nc,
                    model.mech,
                    model.mod,
                    omega,
                )
                composed = row.c_a * math.cos(theta) + row.c_phi * math.sin(theta)
                closed = c_port_coefficient_closed_form(
                    model.topology, model.rates, model.nc, model.mod, omega
                )
                assert abs(composed - closed) <= 1e-9 * abs(closed)

    def test_phase_quadrature_budget_closed_form(self, fig4_params):
        # at maximum imbalance, phase readout: the three budget terms match
        # the hand-eliminated closed forms
        model = build_model(fig4_params)
        grid = np.geomspace(MECH.omega_m / 3.0, 3.0 * MECH.omega_m, 301)
        budget = homodyne_spectrum(
            model.topology,
            math.pi / 2.0,
            model.rates,
            model.nc,
            model.mech,
            model.mod,
            grid,
        )
        shot_cf, qrpn_cf, thermal_cf = dispersive_phase_spectrum_terms(
            model.rates, model.nc, model.mech, model.mod, grid
        )
        assert np.max(np.abs(budget.shot - shot_cf)) < 1e-12
        back_action = budget.qrpn_c + budget.laser_b
        assert np.max(np.abs(back_action - qrpn_cf) / qrpn_cf) < 1e-6
        assert np.max(np.abs(budget.thermal - thermal_cf) / thermal_cf) < 1e-6


class TestBudgetStructure:
    def test_total_is_pointwise_sum(self, fig4_params):
        model = build_model(fig4_params)
        grid = np.geomspace(1e5, 1e7, 101)
        b = homodyne_spectrum(
            model.topology,
            math.pi / 2.0,
            model.rates,
            model.nc,
            model.mech,
            model.mod,
            grid,
            InputNoise(c_squeeze_db=10.0),
        )
        recomputed = b.shot + b.qrpn_c + b.laser_b + b.thermal
        assert np.max(np.abs(b.total - recomputed)) == 0.0
        assert np.all(b.shot >= 0.0)
        assert np.all(b.thermal >= 0.0)

    def test_anti_squeezing_monotonically_raises_back_action(self, fig4_params):
        model = build_model(fig4_params)
        grid = np.geomspace(1e5, 1e7, 101)
        previous = None
        for db in (0.0, 3.0, 6.0, 10.0):
            b = homodyne_spectrum(
                model.topology,
                math.pi / 2.0,
                model.rates,
                model.nc,
                model.mech,
                model.mod,
                grid,
                InputNoise(c_squeeze_db=db),
            )
            if previous is not None:
                assert np.all(b.qrpn_c > previous)
            previous = b.qrpn_c

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            homodyne_spectrum(
                Topology.SRM, 0.0, RATES, ZERO_NC, MECH, BARE, np.array([2.0, 1.0])
            )


class TestBaToThermal:
    def test_zero_coupling(self):
        assert ba_to_thermal_ratio(RATES, ZERO_NC, MECH) == 0.0

    def test_linear_power_scaling(self, fig4_params):
        model1 = build_model(fig4_params)
        model2 = build_model(dataclasses.replace(fig4_params, w_in=0.2))
        r1 = ba_to_thermal_ratio(model1.rates, model1.nc, model1.mech)
        r2 = ba_to_thermal_ratio(model2.rates, model2.nc, model2.mech)
        assert r2 == pytest.approx(2.0 * r1, rel=1e-9)

    def test_fig4_configuration_just_below_unity(self, fig4_params):
        model = build_model(fig4_params)
        ratio = ba_to_thermal_ratio(model.rates, model.nc, model.mech)
        assert ratio < 1.0
        # cross-check against the budget component ratio at resonance
        om = np.array([model.mod.omega_M])
        b = homodyne_spectrum(
            model.topology,
            math.pi / 2.0,
            model.rates,
            model.nc,
            model.mech,
            model.mod,
            om,
        )
        component_ratio = float((b.qrpn_c[0] + b.laser_b[0]) / b.thermal[0])
        assert ratio == pytest.approx(component_ratio, rel=0.30)

    def test_warns_outside_linewidth_hierarchy(self):
        rates = CavityRates(gamma0=TWO_PI * 1e6, gamma1=TWO_PI * 1e6, tau=TAU)
        with pytest.warns(UserWarning):
            ba_to_thermal_ratio(rates, ZERO_NC, MECH)


class TestSqueezeFeatures:
    def test_zero_product_rejected(self):
        with pytest.raises(ValueError):
            squeeze_features(Topology.SRM, RATES, ZERO_NC, MECH, BARE)

    def test_limits_reduce_to_bare_oscillator(self):
        tiny = NormalizedCouplings(x=1e-12, h=1e-12)
        f = squeeze_features(Topology.SRM, RATES, tiny, MECH, BARE)
        assert f.omega_sq == pytest.approx(MECH.omega_m, rel=1e-9)
        assert f.gamma_sq == pytest.approx(MECH.kappa_m, rel=1e-6)

    def test_dip_exists_when_separated(self, fig5_srm_params):
        model = build_model(fig5_srm_params)
        f = squeeze_features(
            model.topology, model.rates, model.nc, model.mech, model.mod
        )
        assert f.separation > 1.0 and f.dip_observable
        _, dip_value = find_dip(
            c_port_spectrum_fn(model),
            model.mech.omega_m / 2.0,
            2.0 * model.rates.gamma_plus,
            xtol=f.gamma_sq / 100.0,
        )
        assert dip_value < 1.0

    def test_prm_dip_overlaps_resonance(self, fig5_prm_params):
        model = build_model(fig5_prm_params)
        f = squeeze_features(
            model.topology, model.rates, model.nc, model.mech, model.mod
        )
        assert f.separation < 1.0 and not f.dip_observable

    def test_correlation_angles(self, fig5_srm_params, fig5_prm_params):
        srm = build_model(fig5_srm_params)
        f = squeeze_features(srm.topology, srm.rates, srm.nc, srm.mech, srm.mod)
        assert f.theta_opt == pytest.approx(math.atan2(srm.nc.x, srm.nc.h))
        prm = build_model(fig5_prm_params)
        f = squeeze_features(prm.topology, prm.rates, prm.nc, prm.mech, prm.mod)
        assert f.theta_opt == pytest.approx(
            math.atan2(prm.nc.h, prm.nc.x) + math.pi / 2.0
        )
        assert back_action_quadrature_angle(prm.topology, prm.nc) == f.theta_opt
