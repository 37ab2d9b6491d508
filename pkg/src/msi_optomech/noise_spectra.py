"""Input-output transfer functions and shot-normalized noise spectra.

Everything here is built from one ground truth: the linearized displacement
response of the membrane to the four optical input quadratures (laser port B,
signal/vacuum port C) and to the thermal Langevin force, and the input-output
relation of the two-port cavity.  The homodyne readout of the output field at
angle theta composes the direct reflection/transmission terms with that
displacement row.  Closed-form results (back-action spectral density, the
phase-quadrature budget, the ponderomotive dip position and width) are
approximations of this pipeline and are cross-checked against it in the test
suite.

Conventions
-----------
* Spectra are symmetrized, one-sided, and shot-normalized: a vacuum input
  quadrature has unit spectral density, so the zero-coupling readout floor
  is exactly 1 at every frequency and every homodyne angle.
* The thermal force has the one-sided density S_FT = 4 m kappa_m k_B T0
  (bath-coupled, bare damping); its propagation to the readout uses the
  spring-dressed impedance.
* Squeezed input on port C is a pure minimum-uncertainty state specified by
  a signed magnitude in dB (negative = squeezed along the chosen quadrature)
  and a quadrature angle; by default that axis is the back-action quadrature,
  the single combination of C quadratures that drives the membrane.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar, k as k_B

from .cavity_dynamics import (
    CavityRates,
    MechanicalOscillator,
    ModifiedOscillator,
    NormalizedCouplings,
    Topology,
)

__all__ = [
    "InputNoise",
    "TransferRow",
    "SpectrumBudget",
    "Occupancy",
    "SqueezeFeatures",
    "correlation_angle",
    "optimal_homodyne_angle",
    "back_action_quadrature_angle",
    "displacement_transfer",
    "output_quadrature_transfer",
    "c_port_coefficient_closed_form",
    "qrpn_psd",
    "bracket_force_psd",
    "thermal_occupation",
    "homodyne_spectrum",
    "dispersive_phase_spectrum_terms",
    "ba_to_thermal_ratio",
    "squeeze_features",
]


# ---------------------------------------------------------------------------
# input description


@dataclass(frozen=True)
class InputNoise:
    """Statistical state of the input ports.

    c_squeeze_db: signed squeeze magnitude of port C (negative = squeezed
    along the chosen axis, positive = anti-squeezed); 0 dB is vacuum.
    c_squeeze_angle: quadrature angle of that axis, or None for the
    back-action quadrature of the configured topology.
    b excess factors multiply the laser quadrature spectral densities.
    """

    c_squeeze_db: float = 0.0
    c_squeeze_angle: float | None = None
    b_amplitude_excess: float = 1.0
    b_phase_excess: float = 1.0

    def c_covariance(self, default_angle: float):
        """2x2 covariance of (c_a, c_phi) for the squeezed vacuum."""
        angle = self.c_squeeze_angle if self.c_squeeze_angle is not None else default_angle
        v_along = 10.0 ** (self.c_squeeze_db / 10.0)
        v_orth = 10.0 ** (-self.c_squeeze_db / 10.0)
        ca, sa = math.cos(angle), math.sin(angle)
        return (
            v_along * ca**2 + v_orth * sa**2,  # aa
            v_along * sa**2 + v_orth * ca**2,  # phiphi
            (v_along - v_orth) * sa * ca,  # a-phi cross
        )


def thermal_force_psd(mech: MechanicalOscillator) -> float:
    """One-sided Langevin force density S_FT = 4 m kappa_m k_B T0, N^2/Hz."""
    return 4.0 * mech.m * mech.kappa_m * k_B * mech.T0


# ---------------------------------------------------------------------------
# angles


def correlation_angle(top: Topology, nc: NormalizedCouplings) -> float:
    """Angle of the single C-quadrature combination that drives the membrane.

    SRM: tan(chi) = X / H.  PRM: tan(beta) = H / X.
    """
    if top is Topology.SRM:
        return math.atan2(nc.x, nc.h)
    return math.atan2(nc.h, nc.x)


def back_action_quadrature_angle(top: Topology, nc: NormalizedCouplings) -> float:
    """Quadrature angle (measured from c_a) of the back-action combination."""
    if top is Topology.SRM:
        return correlation_angle(top, nc)
    return correlation_angle(top, nc) + math.pi / 2.0


def optimal_homodyne_angle(top: Topology, nc: NormalizedCouplings) -> float:
    """Homodyne angle with complete measurement/back-action correlation:
    chi for SRM, beta + pi/2 for PRM."""
    return back_action_quadrature_angle(top, nc)


# ---------------------------------------------------------------------------
# transfer rows


@dataclass(frozen=True)
class TransferRow:
    """Complex coefficients mapping each input to one output scalar at one
    sideband frequency.  Inputs: quadratures (b_a, b_phi) of the laser port,
    (c_a, c_phi) of the signal port, and the SQL-normalized thermal force."""

    omega: float
    b_a: complex
    b_phi: complex
    c_a: complex
    c_phi: complex
    f_t: complex


def _x_row_coeffs(top, rates, nc, mech, mod, omega):
    """Displacement response: coefficients on the five inputs, vectorized
    over omega.  Shared by every spectrum below."""
    g0, g1, gp = rates.gamma0, rates.gamma1, rates.gamma_plus
    om = np.asarray(omega, dtype=float)
    den = gp - 1j * om
    z_m = mod.impedance(om)
    scale = math.sqrt(2.0 * hbar * mech.m * mod.omega_M) / (mech.m * z_m)
    if top is Topology.SRM:
        pre = -(g0 / math.sqrt(2.0 * mod.omega_M)) * gp / den
        ratio = math.sqrt(g1 / g0)
        b_a = scale * pre * nc.h
        c_a = scale * pre * nc.h * ratio
        c_phi = scale * pre * nc.x * ratio
        b_phi = scale * pre * nc.x * (1j * om / gp)
    else:
        pre = math.sqrt(g1 / (2.0 * mod.omega_M))
        drive = -nc.h * gp / den
        b_a = scale * pre * drive * math.sqrt(g1)
        c_a = scale * pre * drive * math.sqrt(g0)
        c_phi = scale * pre * nc.x * math.sqrt(g0)
        b_phi = np.zeros_like(den)
    f_t = scale * np.ones_like(den)
    return b_a, b_phi, c_a, c_phi, f_t


def displacement_transfer(
    top: Topology,
    rates: CavityRates,
    nc: NormalizedCouplings,
    mech: MechanicalOscillator,
    mod: ModifiedOscillator,
    omega: float,
) -> TransferRow:
    """Membrane displacement driven by optical back action and thermal force.

    The row is the force combination in shot units divided by m Z_m with
    Z_m the spring-dressed impedance; it never diverges for kappa_M > 0.
    At zero coupling only the normalized forces survive, with the bare
    1/(m Z_m) mechanical response.
    """
    b_a, b_phi, c_a, c_phi, f_t = _x_row_coeffs(top, rates, nc, mech, mod, omega)
    return TransferRow(
        omega=float(omega),
        b_a=complex(b_a),
        b_phi=complex(b_phi),
        c_a=complex(c_a),
        c_phi=complex(c_phi),
        f_t=complex(f_t),
    )


def _direct_coeffs(top, rates, theta, omega):
    """Zero-coupling reflection/transmission of the two-port cavity into the
    homodyne quadrature at angle theta."""
    g0, g1, gp, gm = rates.gamma0, rates.gamma1, rates.gamma_plus, rates.gamma_minus
    om = np.asarray(omega, dtype=float)
    den = gp - 1j * om
    if top is Topology.SRM:
        rho = (gm + 1j * om) / den
    else:
        rho = (-gm + 1j * om) / den
    trans = math.sqrt(g0 * g1) / den
    ct, st = math.cos(theta), math.sin(theta)
    return rho * ct, rho * st, trans * ct, trans * st  # c_a, c_phi, b_a, b_phi


def _x_coupling(top, rates, nc, mech, theta, omega):
    """Coefficient with which the displacement enters the homodyne output."""
    g0, g1, gp, gm = rates.gamma0, rates.gamma1, rates.gamma_plus, rates.gamma_minus
    om = np.asarray(omega, dtype=float)
    den = gp - 1j * om
    ct, st = math.cos(theta), math.sin(theta)
    if top is Topology.SRM:
        mix = gm * nc.x * ct - gp * nc.h * st
        mix = mix * np.ones_like(den)
    else:
        mix = (gm - 1j * om) * nc.x * ct - gp * nc.h * st
    return math.sqrt(mech.m / hbar) * math.sqrt(g0 * g1) / den * mix


def _output_coeffs(top, theta, rates, nc, mech, mod, omega):
    ca_d, cphi_d, ba_d, bphi_d = _direct_coeffs(top, rates, theta, omega)
    lx = _x_coupling(top, rates, nc, mech, theta, omega)
    b_a, b_phi, c_a, c_phi, f_t = _x_row_coeffs(top, rates, nc, mech, mod, omega)
    return (
        ba_d + lx * b_a,
        bphi_d + lx * b_phi,
        ca_d + lx * c_a,
        cphi_d + lx * c_phi,
        lx * f_t,
        (ba_d, bphi_d, ca_d, cphi_d),
    )


def output_quadrature_transfer(
    top: Topology,
    theta: float,
    rates: CavityRates,
    nc: NormalizedCouplings,
    mech: MechanicalOscillator,
    mod: ModifiedOscillator,
    omega: float,
) -> TransferRow:
    """Homodyne readout row at angle theta: direct cavity response plus the
    displacement term.  At zero coupling the coefficient magnitudes satisfy
    |reflection|^2 + |transmission|^2 = 1, the unity shot floor."""
    b_a, b_phi, c_a, c_phi, f_t, _ = _output_coeffs(
        top, theta, rates, nc, mech, mod, omega
    )
    return TransferRow(
        omega=float(omega),
        b_a=complex(b_a),
        b_phi=complex(b_phi),
        c_a=complex(c_a),
        c_phi=complex(c_phi),
        f_t=complex(f_t),
    )


def c_port_coefficient_closed_form(
    top: Topology,
    rates: CavityRates,
    nc: NormalizedCouplings,
    mod: ModifiedOscillator,
    omega,
):
    """Independent closed form of the C-port coefficient projected on the
    measured quadrature, at the correlation homodyne angle.

    Obtained by eliminating the displacement from the readout symbolically
    rather than composing the two transfer rows, so it serves as an oracle
    for the composition.  For the PRM topology the flat part of the
    dissipative back action adds the X^2 (gamma_plus - i omega) piece inside
    the bracket; dropping it is only valid well inside the cavity linewidth.
    """
    g0, g1, gp, gm = rates.gamma0, rates.gamma1, rates.gamma_plus, rates.gamma_minus
    om = np.asarray(omega, dtype=float)
    den = gp - 1j * om
    z_m = mod.impedance(om)
    x, h = nc.x, nc.h
    if top is Topology.SRM:
        rho = (gm + 1j * om) / den
        return rho + g0**2 * g1 * gp * x * h / (z_m * den**2)
    rho = (-gm + 1j * om) / den
    bracket = gp * h**2 + x**2 * den
    return rho - g0 * g1 * x * h * (g1 - 1j * om) * bracket / (
        (x**2 + h**2) * den**2 * z_m
    )


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class SpectrumBudget:
    """Per-source shot-normalized spectra on a frequency grid.

    shot is the coupling-free floor (with the actual input covariances);
    qrpn_c and laser_b are the coupling-induced changes of the C- and B-port
    contributions (back action plus its correlation with the direct field);
    total = shot + qrpn_c + laser_b + thermal, summed pointwise.
    """

    omega: np.ndarray
    shot: np.ndarray
    qrpn_c: np.ndarray
    laser_b: np.ndarray
    thermal: np.ndarray
    total: np.ndarray
    shot_c: np.ndarray
    shot_b: np.ndarray

    @property
    def c_port_total(self) -> np.ndarray:
        """Full C-port contribution (direct + back action), the quantity
        whose dip below 1 is ponderomotive squeezing."""
        return self.shot_c + self.qrpn_c


def _c_psd(k_a, k_phi, cov):
    v_aa, v_pp, v_ap = cov
    return (
        np.abs(k_a) ** 2 * v_aa
        + np.abs(k_phi) ** 2 * v_pp
        + 2.0 * (k_a * np.conj(k_phi)).real * v_ap
    )


def homodyne_spectrum(
    top: Topology,
    theta: float,
    rates: CavityRates,
    nc: NormalizedCouplings,
    mech: MechanicalOscillator,
    mod: ModifiedOscillator,
    omega_grid,
    in_noise: InputNoise | None = None,
) -> SpectrumBudget:
    """Shot-normalized homodyne spectrum with its per-source budget.

    The C port is evaluated with the squeezed-vacuum covariance, the B port
    with the laser excess factors, and the thermal force with
    S_FT = 4 m kappa_m k_B T0 propagated through the dressed impedance.
    """
    om = np.asarray(omega_grid, dtype=float)
    if om.ndim != 1 or om.size < 1:
        raise ValueError("omega_grid must be a 1-d array")
    if np.any(om <= 0.0) or np.any(np.diff(om) <= 0.0):
        raise ValueError("omega_grid must be strictly increasing and positive")
    noise = in_noise if in_noise is not None else InputNoise()
    cov = noise.c_covariance(back_action_quadrature_angle(top, nc))

    b_a, b_phi, c_a, c_phi, f_t, direct = _output_coeffs(
        top, theta, rates, nc, mech, mod, om
    )
    ba_d, bphi_d, ca_d, cphi_d = direct

    s_c = _c_psd(c_a, c_phi, cov)
    s_c_direct = _c_psd(ca_d, cphi_d, cov)
    s_b = (
        np.abs(b_a) ** 2 * noise.b_amplitude_excess
        + np.abs(b_phi) ** 2 * noise.b_phase_excess
    )
    s_b_direct = (
        np.abs(ba_d) ** 2 * noise.b_amplitude_excess
        + np.abs(bphi_d) ** 2 * noise.b_phase_excess
    )
    # SQL-normalized thermal force density matching the f_t coefficient basis
    s_ft = thermal_force_psd(mech) / (2.0 * hbar * mech.m * mod.omega_M)
    s_th = np.abs(f_t) ** 2 * s_ft

    shot = s_c_direct + s_b_direct
    qrpn_c = s_c - s_c_direct
    laser_b = s_b - s_b_direct
    total = shot + qrpn_c + laser_b + s_th
    return SpectrumBudget(
        omega=om,
        shot=shot,
        qrpn_c=qrpn_c,
        laser_b=laser_b,
        thermal=s_th,
        total=total,
        shot_c=s_c_direct,
        shot_b=s_b_direct,
    )


def dispersive_phase_spectrum_terms(
    rates: CavityRates,
    nc: NormalizedCouplings,
    mech: MechanicalOscillator,
    mod: ModifiedOscillator,
    omega,
):
    """Closed-form (shot, back-action, thermal) terms of the SRM phase
    quadrature in the purely dispersive regime (eta = 0, X = 0).

    Derived by eliminating the displacement from the pipeline by hand:

        S = 1
          + H^4 gamma0^2 gamma1 (gamma0 + gamma1) gamma_plus^4
            / ((gamma_plus^2 + O^2)^2 |Z|^2)
          + H^2 (4 kappa_m k_B T0 / hbar) gamma0 gamma1 gamma_plus^2
            / ((gamma_plus^2 + O^2) |Z|^2)

    so the readout back action scales as the fourth power of the normalized
    dispersive coupling and the thermal transduction as its square.
    """
    g0, g1, gp = rates.gamma0, rates.gamma1, rates.gamma_plus
    om = np.asarray(omega, dtype=float)
    pole = gp**2 + om**2
    z_sq = np.abs(mod.impedance(om)) ** 2
    h = nc.h
    shot = np.ones_like(om)
    qrpn = h**4 * g0**2 * g1 * (g0 + g1) * gp**4 / (pole**2 * z_sq)
    thermal = (
        h**2
        * (4.0 * mech.kappa_m * k_B * mech.T0 / hbar)
        * g0
        * g1
        * gp**2
        / (pole * z_sq)
    )
    return shot, qrpn, thermal


# ---------------------------------------------------------------------------
# back action and occupancy


def qrpn_psd(
    top: Topology,
    rates: CavityRates,
    nc: NormalizedCouplings,
    omega_M: float,
    c_back_action_scale: float = 1.0,
) -> float:
    """Shot-normalized back-action force density at the dressed resonance.

    ``c_back_action_scale`` rescales the C-port (vacuum/squeezed) terms:
    10^(dB/10) when the squeeze axis is the back-action quadrature.
    """
    g0, g1, gp = rates.gamma0, rates.gamma1, rates.gamma_plus
    x, h = nc.x, nc.h
    s = c_back_action_scale
    if top is Topology.SRM:
        pole = gp**2 / (gp**2 + omega_M**2)
        return (g0**2 / (2.0 * omega_M)) * pole * (
            h**2 * (1.0 + s * g1 / g0) + x**2 * (s * g1 / g0 + omega_M**2 / gp**2)
        )
    pole = gp**2 / (gp**2 + omega_M**2)
    return (g1**2 / (2.0 * omega_M)) * (
        h**2 * pole * (1.0 + s * g0 / g1) + x**2 * s * g0 / g1
    )


def bracket_force_psd(
    top: Topology,
    rates: CavityRates,
    nc: NormalizedCouplings,
    mech: MechanicalOscillator,
    mod: ModifiedOscillator,
    omega: float,
    in_noise: InputNoise | None = None,
) -> float:
    """Optical part of the normalized force density from the displacement
    row itself: |row|^2 summed over input quadratures with their actual
    covariances, times (m |Z_m| / sqrt(2 hbar m omega_M))^2.

    Independent oracle for :func:`qrpn_psd`, exact at any angle and any
    squeeze state.
    """
    noise = in_noise if in_noise is not None else InputNoise()
    cov = noise.c_covariance(back_action_quadrature_angle(top, nc))
    b_a, b_phi, c_a, c_phi, _ = _x_row_coeffs(top, rates, nc, mech, mod, omega)
    z_m = mod.impedance(omega)
    conv = abs(mech.m * z_m) ** 2 / (2.0 * hbar * mech.m * mod.omega_M)
    s_c = _c_psd(np.asarray(c_a), np.asarray(c_phi), cov)
    s_b = (
        abs(b_a) ** 2 * noise.b_amplitude_excess
        + abs(b_phi) ** 2 * noise.b_phase_excess
    )
    return float((s_c + s_b) * conv)


@dataclass(frozen=True)
class Occupancy:
    """Steady-state phonon number and the matching effective temperature."""

    n_t: float
    t_eff: float


def thermal_occupation(
    mech: MechanicalOscillator,
    mod: ModifiedOscillator,
    s_lp: float,
    mode: str = "high_temperature",
) -> Occupancy:
    """Phonon occupancy of the optically damped oscillator.

    The bath contribution is the intrinsic occupancy diluted by the damping
    ratio kappa_m / kappa_M; the optical damping adds its own back-action
    floor s_lp / (2 kappa_M), so cooling can never beat its own drive.

    mode="high_temperature" uses k_B T0 / (hbar omega_M) for the bath
    occupancy (the regime all closed forms assume); mode="bose" uses the
    exact Bose factor instead.
    """
    if mod.kappa_M <= 0.0:
        raise ValueError("occupancy needs positive total damping")
    if mode == "high_temperature":
        n_bath = k_B * mech.T0 / (hbar * mod.omega_M)
    elif mode == "bose":
        n_bath = 1.0 / math.expm1(hbar * mod.omega_M / (k_B * mech.T0))
    else:
        raise ValueError(f"unknown occupancy mode {mode!r}")
    n_t = (mech.kappa_m / mod.kappa_M) * n_bath + s_lp / (2.0 * mod.kappa_M)
    return Occupancy(n_t=n_t, t_eff=n_t * hbar * mod.omega_M / k_B)


def ba_to_thermal_ratio(
    rates: CavityRates,
    nc: NormalizedCouplings,
    mech: MechanicalOscillator,
    t0: float | None = None,
) -> float:
    """Back-action phonons over thermal phonons for the SRM scheme,

        hbar gamma0 gamma1 gamma_plus^2 (H^2 + X^2)
        / (4 kappa_m k_B T0 (gamma_plus^2 + omega_m^2)),

    valid for a recycling linewidth well above the MSI linewidth (warned
    otherwise).  Grows linearly with pump power through H^2 + X^2.
    """
    if rates.gamma1 < 5.0 * rates.gamma0:
        warnings.warn(
            "back-action/thermal ratio assumes gamma1 >> gamma0", stacklevel=2
        )
    temperature = mech.T0 if t0 is None else t0
    g0, g1, gp = rates.gamma0, rates.gamma1, rates.gamma_plus
    return (
        hbar
        * g0
        * g1
        * gp**2
        * (nc.h**2 + nc.x**2)
        / (4.0 * mech.kappa_m * k_B * temperature * (gp**2 + mech.omega_m**2))
    )


# ---------------------------------------------------------------------------
# ponderomotive squeezing features


@dataclass(frozen=True)
class SqueezeFeatures:
    """Closed-form location and width of the ponderomotive dip, the nearby
    resonant amplification, and their separation."""

    omega_sq: float
    gamma_sq: float
    omega_M: float
    gamma_M: float
    separation: float
    separation_estimate: float
    theta_opt: float
    correlation: float  # chi (SRM) or beta (PRM)
    dip_observable: bool


def squeeze_features(
    top: Topology,
    rates: CavityRates,
    nc: NormalizedCouplings,
    mech: MechanicalOscillator,
    mod: ModifiedOscillator,
) -> SqueezeFeatures:
    """Dip frequency and bandwidth of the output spectrum at the correlation
    homodyne angle, where measurement noise and back action cancel.

    Requires a cooling-sign coupling product (X H > 0).  The dip is flagged
    unobservable when it sits within one linewidth of the resonant
    amplification at omega_M.
    """
    if nc.product <= 0.0:
        raise ValueError("squeezing features need a positive coupling product X H")
    g0, g1, gp, gm = rates.gamma0, rates.gamma1, rates.gamma_plus, rates.gamma_minus
    om = mech.omega_m
    xh = nc.product
    if top is Topology.SRM:
        pole = gm**2 + om**2
        omega_sq_sq = om**2 + gp * gm * g0**2 * xh / pole
        gamma_sq = mech.kappa_m + gp * g0**2 * xh / pole
        sep_estimate = g1 / (2.0 * om)
    else:
        pole = (gm**2 + om**2) * (gp**2 + om**2)
        omega_sq_sq = om**2 + g0 * g1 * gp**2 * (gp * gm - om**2) * xh / pole
        gamma_sq = mech.kappa_m + g0 * g1**2 * gp**2 * xh / pole
        sep_estimate = g1 / (2.0 * om * (1.0 + 4.0 * om**2 / g0**2))
    omega_sq = math.sqrt(omega_sq_sq) if omega_sq_sq > 0.0 else math.nan
    separation = (
        abs(omega_sq - mod.omega_M) / mod.kappa_M if omega_sq_sq > 0.0 else 0.0
    )
    return SqueezeFeatures(
        omega_sq=omega_sq,
        gamma_sq=gamma_sq,
        omega_M=mod.omega_M,
        gamma_M=mod.kappa_M,
        separation=separation,
        separation_estimate=sep_estimate,
        theta_opt=optimal_homodyne_angle(top, nc),
        correlation=correlation_angle(top, nc),
        dip_observable=bool(separation > 1.0 and omega_sq_sq > 0.0),
    )
