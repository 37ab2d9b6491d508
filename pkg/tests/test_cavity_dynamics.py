"""Cavity rates, mean fields, optical spring, dressed oscillator."""

import dataclasses
import math

import numpy as np
import pytest

from msi_optomech import (
    CavityRates,
    MechanicalOscillator,
    Pump,
    Topology,
    UnstableSpring,
    cavity_rates,
    mean_fields,
    modified_oscillator,
    normalized_couplings,
    optical_spring,
)
from msi_optomech.msi_core import CouplingPair
from msi_optomech.optimize import build_model

TWO_PI = 2.0 * math.pi
TAU = 2.0 * 0.1 / 299792458.0
OMEGA0 = TWO_PI * 299792458.0 / 1550e-9

MECH = MechanicalOscillator(m=5e-11, omega_m=TWO_PI * 3.5e5, Q=1e6, T0=20.0)
PUMP = Pump(w_in=0.1, omega0=OMEGA0)


class TestCavityRates:
    def test_matched_mirrors(self):
        r = cavity_rates(0.02, 0.02, TAU)
        assert r.gamma0 == r.gamma1
        assert r.gamma_minus == 0.0

    def test_recycling_transmissivity_for_target_linewidth(self):
        # gamma1/2pi = 1e6 Hz at tau = 2 * 5 cm / c needs T ~ 0.0458
        tau = 2.0 * 0.05 / 299792458.0
        t_rec = math.sqrt(TWO_PI * 1e6 * tau)
        assert t_rec == pytest.approx(0.0458, abs=2e-4)
        r = cavity_rates(0.0145, t_rec, tau)
        assert r.gamma1 == pytest.approx(TWO_PI * 1e6, rel=1e-12)

    def test_rate_identity_on_random_inputs(self, rng):
        for _ in range(200):
            t0 = rng.uniform(1e-3, 0.5)
            t1 = rng.uniform(1e-3, 0.5)
            r = cavity_rates(t0, t1, TAU)
            lhs = r.gamma0 * r.gamma1 + r.gamma_minus**2
            assert lhs == pytest.approx(r.gamma_plus**2, rel=1e-12)


class TestMeanFields:
    def test_impedance_matched_srm(self):
        r = CavityRates(gamma0=1e6, gamma1=1e6, tau=TAU)
        f = mean_fields(Topology.SRM, r, PUMP)
        assert f.b1 == 0.0
        assert f.c1 == pytest.approx(PUMP.b_amplitude, rel=1e-12)

    def test_energy_conservation_both_topologies(self, rng):
        for _ in range(100):
            r = CavityRates(
                gamma0=rng.uniform(1e4, 1e7), gamma1=rng.uniform(1e4, 1e7), tau=TAU
            )
            for top in (Topology.SRM, Topology.PRM):
                f = mean_fields(top, r, PUMP)
                assert f.b1**2 + f.c1**2 == pytest.approx(
                    PUMP.b_amplitude**2, rel=1e-12
                )

    def test_prm_peak_power_is_four_times_srm_peak(self):
        gamma1 = TWO_PI * 1e6
        prm = mean_fields(
            Topology.PRM, CavityRates(gamma0=1e-3 * gamma1, gamma1=gamma1, tau=TAU), PUMP
        )
        best_srm = max(
            mean_fields(
                Topology.SRM, CavityRates(gamma0=float(g), gamma1=gamma1, tau=TAU), PUMP
            ).a
            ** 2
            for g in np.geomspace(1e-3 * gamma1, 10.0 * gamma1, 601)
        )
        assert prm.a**2 / best_srm == pytest.approx(4.0, rel=0.01)


class TestOpticalSpring:
    COUPLINGS = CouplingPair(xi=7.0, eta=3e8)
    RATES = CavityRates(gamma0=TWO_PI * 1e5, gamma1=TWO_PI * 1e6, tau=TAU)

    def test_zero_coupling_product(self):
        for cp in (CouplingPair(0.0, 3e8), CouplingPair(7.0, 0.0)):
            w = optical_spring(Topology.SRM, self.RATES, cp, PUMP, MECH, MECH.omega_m)
            assert w == 0.0

    def test_cooling_sign_convention(self):
        # positive coupling product: softened spring, positive added damping
        w = optical_spring(
            Topology.SRM, self.RATES, self.COUPLINGS, PUMP, MECH, MECH.omega_m
        )
        assert w.real < 0.0
        assert w.imag < 0.0  # kappa_M = kappa_m - Im/Omega > kappa_m
        mod = modified_oscillator(Topology.SRM, self.RATES, self.COUPLINGS, PUMP, MECH)
        assert mod.kappa_M > MECH.kappa_m
        assert mod.omega_M < MECH.omega_m

    def test_topology_ratio(self):
        w_srm = optical_spring(
            Topology.SRM, self.RATES, self.COUPLINGS, PUMP, MECH, MECH.omega_m
        )
        w_prm = optical_spring(
            Topology.PRM, self.RATES, self.COUPLINGS, PUMP, MECH, MECH.omega_m
        )
        ratio = self.RATES.gamma1 / self.RATES.gamma0
        assert w_prm == pytest.approx(w_srm * ratio, rel=1e-12)


class TestModifiedOscillator:
    RATES = CavityRates(gamma0=TWO_PI * 1e5, gamma1=TWO_PI * 1e6, tau=TAU)

    def test_zero_pump(self):
        dark = Pump(w_in=0.0, omega0=OMEGA0)
        mod = modified_oscillator(
            Topology.SRM, self.RATES, CouplingPair(7.0, 3e8), dark, MECH
        )
        assert mod.omega_M == MECH.omega_m
        assert mod.kappa_M == MECH.kappa_m

    def test_fixed_point_converges(self):
        mod = modified_oscillator(
            Topology.SRM, self.RATES, CouplingPair(7.0, 3e8), PUMP, MECH
        )
        w = optical_spring(Topology.SRM, self.RATES, CouplingPair(7.0, 3e8), PUMP, MECH, mod.omega_M)
        refined = math.sqrt(MECH.omega_m**2 + w.real)
        assert abs(refined - mod.omega_M) / mod.omega_M < 1e-3

    def test_heating_branch_flagged(self):
        # opposite-sign coupling product at weak pump: damping dips below
        # the intrinsic value but stays positive
        weak = Pump(w_in=1e-7, omega0=OMEGA0)
        mod = modified_oscillator(
            Topology.SRM, self.RATES, CouplingPair(-7.0, 3e8), weak, MECH
        )
        assert 0.0 < mod.kappa_M < MECH.kappa_m

    def test_runaway_heating_raises(self):
        with pytest.raises(UnstableSpring):
            modified_oscillator(
                Topology.SRM, self.RATES, CouplingPair(-7.0, 3e8), PUMP, MECH
            )


class TestNormalizedCouplings:
    def test_zero_limits(self):
        rates = CavityRates(gamma0=TWO_PI * 1e5, gamma1=TWO_PI * 1e6, tau=TAU)
        nc = normalized_couplings(CouplingPair(xi=7.0, eta=0.0), PUMP, MECH, rates)
        assert nc.x == 0.0 and nc.h > 0.0
        nc = normalized_couplings(CouplingPair(xi=0.0, eta=3e8), PUMP, MECH, rates)
        assert nc.h == 0.0 and nc.x > 0.0

    def test_spring_rebuilt_from_normalized_couplings(self, default_params):
        # the spring magnitude re-expressed through X H gamma_plus must match
        model = build_model(default_params)
        g0, g1, gp = (
            model.rates.gamma0,
            model.rates.gamma1,
            model.rates.gamma_plus,
        )
        pump_rate = g0 if model.topology is Topology.SRM else g1
        w = optical_spring(
            model.topology,
            model.rates,
            model.couplings,
            model.pump,
            model.mech,
            model.mech.omega_m,
        )
        expected = -pump_rate * g0 * gp * model.nc.product / complex(
            gp, -model.mech.omega_m
        )
        assert w == pytest.approx(expected, rel=1e-12)
