"""Cavity relaxation, mean fields, optical spring, and the cooled oscillator.

The compound MSI mirror closes a two-port cavity against a recycling mirror.
Which port carries the laser defines the topology: the signal-recycled (SRM)
cavity is pumped through the interferometer, the power-recycled (PRM) cavity
is pumped through the recycling mirror.  On resonance the combination of
dispersive and dissipative coupling produces a complex radiation-pressure
spring: its real part shifts the mechanical frequency, its imaginary part
adds optical damping that can cool the membrane.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

from scipy.constants import hbar, k as k_B

from .errors import UnstableSpring
from .msi_core import (
    BeamSplitterSpec,
    CouplingPair,
    GeneralizedMirror,
    MirrorSpec,
    MsiOperatingPoint,
    OpticalCarrier,
)

_IDENTITY_TOL = 1e-12


class Topology(enum.Enum):
    """Which external mirror closes the cavity around the MSI."""

    SRM = "SRM"
    PRM = "PRM"


@dataclass(frozen=True)
class CavityRates:
    """Half-linewidths of the two-port cavity, rad/s.

    gamma0 is set by the MSI transmissivity, gamma1 by the recycling mirror;
    gamma_plus is the total half-linewidth.  The identity
    gamma0 gamma1 + gamma_minus^2 = gamma_plus^2 holds algebraically and is
    what pins the shot-noise floor of the readout at exactly one.
    """

    gamma0: float
    gamma1: float
    tau: float
    gamma_plus: float = field(init=False)
    gamma_minus: float = field(init=False)

    def __post_init__(self):
        if self.gamma0 <= 0.0 or self.gamma1 <= 0.0 or self.tau <= 0.0:
            raise ValueError("relaxation rates and round-trip time must be positive")
        object.__setattr__(self, "gamma_plus", 0.5 * (self.gamma1 + self.gamma0))
        object.__setattr__(self, "gamma_minus", 0.5 * (self.gamma1 - self.gamma0))


def cavity_rates(t_msi: float, t_recycling: float, tau: float) -> CavityRates:
    """Relaxation rates from the two mirror transmissivities.

    Each port relaxes at T^2 / tau with tau the round-trip time.
    """
    if not (0.0 < abs(t_msi) < 1.0 and 0.0 < t_recycling < 1.0):
        raise ValueError("transmissivities must lie in (0, 1)")
    return CavityRates(gamma0=t_msi**2 / tau, gamma1=t_recycling**2 / tau, tau=tau)


@dataclass(frozen=True)
class MechanicalOscillator:
    """Membrane mechanical mode: mass, frequency, quality factor, bath."""

    m: float
    omega_m: float
    Q: float
    T0: float

    def __post_init__(self):
        if min(self.m, self.omega_m, self.Q, self.T0) <= 0.0:
            raise ValueError("oscillator parameters must be positive")

    @property
    def kappa_m(self) -> float:
        """Intrinsic damping rate omega_m / Q, rad/s."""
        return self.omega_m / self.Q


@dataclass(frozen=True)
class Pump:
    """Resonant laser drive.

    The carrier amplitude B is in sqrt(photons/s): W_in = hbar omega0 B^2.
    The excess factors (>= 1) multiply the laser amplitude / phase quadrature
    spectral densities; 1 is a coherent state.
    """

    w_in: float
    omega0: float
    amplitude_excess: float = 1.0
    phase_excess: float = 1.0

    def __post_init__(self):
        if self.w_in < 0.0 or self.omega0 <= 0.0:
            raise ValueError("pump power must be >= 0 and carrier frequency > 0")
        if self.amplitude_excess < 1.0 or self.phase_excess < 1.0:
            raise ValueError("laser excess noise factors must be >= 1")

    @property
    def b_amplitude(self) -> float:
        return math.sqrt(self.w_in / (hbar * self.omega0))


@dataclass(frozen=True)
class MeanFields:
    """Steady-state classical amplitudes, sqrt(photons/s), all real."""

    a: float
    b1: float
    c1: float


def mean_fields(top: Topology, rates: CavityRates, pump: Pump) -> MeanFields:
    """Mean intracavity (A), reflected (B1) and transmitted (C1) amplitudes.

    On resonance the lossless two-port obeys B^2 = B1^2 + C1^2.  The PRM
    topology builds its largest circulating power at gamma0 << gamma1, four
    times the best the SRM topology reaches (at gamma0 = gamma1).
    """
    b = pump.b_amplitude
    g0, g1 = rates.gamma0, rates.gamma1
    total = g0 + g1
    if top is Topology.SRM:
        a = 2.0 * math.sqrt(g0) * b / total
        b1 = (g0 - g1) / total * b
    else:
        a = 2.0 * math.sqrt(g1) * b / total
        b1 = (g1 - g0) / total * b
    c1 = 2.0 * math.sqrt(g0 * g1) / total * b
    return MeanFields(a=a, b1=b1, c1=c1)


@dataclass(frozen=True)
class NormalizedCouplings:
    """Dimensionless optomechanical coupling rates.

    X (dissipative) and H (dispersive) absorb pump power, mass and cavity
    linewidth so that all spectra below are written in shot-noise units:

        X = eta sqrt(W_in / (2 m omega0 gamma_plus^2))
        H = xi sqrt(2 omega0 W_in / (m gamma_plus^4))
    """

    x: float
    h: float

    @property
    def product(self) -> float:
        return self.x * self.h

    @property
    def magnitude(self) -> float:
        return math.hypot(self.x, self.h)


def normalized_couplings(
    couplings: CouplingPair,
    pump: Pump,
    mech: MechanicalOscillator,
    rates: CavityRates,
) -> NormalizedCouplings:
    gp = rates.gamma_plus
    x = couplings.eta * math.sqrt(pump.w_in / (2.0 * mech.m * pump.omega0 * gp**2))
    h = couplings.xi * math.sqrt(2.0 * pump.omega0 * pump.w_in / (mech.m * gp**4))
    return NormalizedCouplings(x=x, h=h)


def optical_spring(
    top: Topology,
    rates: CavityRates,
    couplings: CouplingPair,
    pump: Pump,
    mech: MechanicalOscillator,
    omega: float,
) -> complex:
    """Complex radiation-pressure spring omega_os^2 at sideband frequency omega.

    On resonance the spring exists only through the cross product eta * xi.
    For eta xi > 0 the real part is negative (softening) and the induced
    damping -Im(omega_os^2)/omega is positive (cooling).  The two topologies
    differ only in the pump-side rate entering the numerator, so at equal
    parameters their springs sit in the ratio gamma1 / gamma0.
    """
    g0, g1, gp = rates.gamma0, rates.gamma1, rates.gamma_plus
    pump_rate = g0 if top is Topology.SRM else g1
    num = pump.w_in * pump_rate * g0 * couplings.eta * couplings.xi
    return -num / (mech.m * gp**2 * complex(gp, -omega))


@dataclass(frozen=True)
class ModifiedOscillator:
    """Mechanical oscillator dressed by the optical spring.

    omega_os_sq is the spring evaluated at omega_M (the self-consistent
    resonance); kappa_M is the total damping used as the resonance linewidth.
    """

    omega_os_sq: complex
    omega_m_eff: float
    kappa_m_eff: float

    @property
    def omega_M(self) -> float:
        return self.omega_m_eff

    @property
    def kappa_M(self) -> float:
        return self.kappa_m_eff

    def impedance(self, omega):
        """Mechanical impedance Z_m = omega_M^2 - omega^2 - i omega kappa_M."""
        return self.omega_M**2 - omega**2 - 1j * omega * self.kappa_M


def modified_oscillator(
    top: Topology,
    rates: CavityRates,
    couplings: CouplingPair,
    pump: Pump,
    mech: MechanicalOscillator,
) -> ModifiedOscillator:
    """Dressed oscillator frequency and damping under the optical spring.

    The spring is frequency dependent, while the dressed oscillator is
    described by the scalars omega_M, kappa_M.  We evaluate at the bare
    frequency and refine once at the shifted resonance; in the resolved-
    sideband-free regime (omega_M well below the cavity linewidth) the
    dependence is weak and the refinement converges to < 1e-3.

    Raises UnstableSpring when the softened frequency squared or the total
    damping becomes non-positive.
    """

    def _dressed(eval_omega):
        w_os = optical_spring(top, rates, couplings, pump, mech, eval_omega)
        om_sq = mech.omega_m**2 + w_os.real
        if om_sq <= 0.0:
            raise UnstableSpring(
                f"softened frequency squared is {om_sq:.3e} rad^2/s^2"
            )
        return w_os, math.sqrt(om_sq)

    _, omega_pass1 = _dressed(mech.omega_m)
    w_os, omega_m_eff = _dressed(omega_pass1)
    kappa_m_eff = mech.kappa_m - w_os.imag / omega_m_eff
    if kappa_m_eff <= 0.0:
        raise UnstableSpring(f"total damping is {kappa_m_eff:.3e} rad/s")

    if abs(omega_m_eff - omega_pass1) / omega_m_eff > 1e-3:
        warnings.warn(
            "optical-spring fixed point moved by more than 0.1% between "
            "passes; the scalar (omega_M, kappa_M) description is strained",
            stacklevel=2,
        )
    _warn_outside_validity(rates, mech, omega_m_eff, kappa_m_eff)
    return ModifiedOscillator(
        omega_os_sq=w_os, omega_m_eff=omega_m_eff, kappa_m_eff=kappa_m_eff
    )


def _warn_outside_validity(rates, mech, omega_m_eff, kappa_m_eff):
    """The closed-form cooling results assume a hot bath, a good oscillator
    and an unresolved sideband; warn when a configuration leaves that regime."""
    msgs = []
    if k_B * mech.T0 < 10.0 * hbar * omega_m_eff:
        msgs.append("k_B T0 is not large against hbar omega_M")
    if max(mech.kappa_m, kappa_m_eff) > omega_m_eff / 2.0:
        msgs.append("damping is not small against the mechanical frequency")
    if omega_m_eff > 0.8 * rates.gamma_plus:
        msgs.append("mechanical frequency is not small against the cavity linewidth")
    if msgs:
        warnings.warn("; ".join(msgs), stacklevel=3)


@dataclass(frozen=True)
class SystemParams:
    """Fully resolved scalar inputs of one configured system (SI units).

    ``epsilon_mode`` selects how the beam-splitter imbalance is chosen per
    operating point: a fixed value, the cooling-optimal value, or the
    largest value that keeps the dissipative coupling real.
    """

    topology: Topology
    mirror_power_reflectivity: float
    epsilon_mode: str  # "fixed" | "opt" | "max"
    epsilon: float | None
    wavelength: float
    length: float
    gamma0: float
    gamma1: float
    w_in: float
    mass: float
    omega_m: float
    Q: float
    T0: float
    squeeze_db: float = 0.0
    squeeze_angle: float | None = None  # None = back-action quadrature
    homodyne: str | float = "optimal"
    amplitude_excess: float = 1.0
    phase_excess: float = 1.0
    occupancy_mode: str = "high_temperature"  # or "bose"

    @property
    def tau(self) -> float:
        """Cavity round-trip time 2 L / c."""
        from scipy.constants import c

        return 2.0 * self.length / c


@dataclass(frozen=True)
class CavityModel:
    """One fully assembled system: geometry, operating point, couplings,
    rates, pump and the dressed oscillator."""

    params: SystemParams
    topology: Topology
    mirror: MirrorSpec
    bs: BeamSplitterSpec
    carrier: OpticalCarrier
    op: MsiOperatingPoint
    gm: GeneralizedMirror
    couplings: CouplingPair
    rates: CavityRates
    pump: Pump
    mech: MechanicalOscillator
    nc: NormalizedCouplings
    mod: ModifiedOscillator

    @property
    def epsilon(self) -> float:
        return self.bs.epsilon
