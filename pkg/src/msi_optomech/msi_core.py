"""Generalized-mirror algebra of the Michelson-Sagnac interferometer (MSI).

A partially transmissive membrane shared by the two arms, together with the
central beam splitter, acts on the cavity side like a single compound mirror
with real transmissivity ``T_msi`` and complex reflectivity ``R_msi``.  Both
depend on the mean membrane offset ``x0`` and on the beam-splitter imbalance
``epsilon``.  Displacing the membrane simultaneously pulls the cavity
resonance frequency (dispersive coupling ``xi``, units 1/m) and the cavity
relaxation rate (dissipative coupling ``eta``, units 1/m); the imbalance sets
the split between the two.

For a lossless membrane (r_m^2 + t_m^2 = 1) the compound mirror is unitary,
T_msi^2 + |R_msi|^2 = 1, which later guarantees the unity shot-noise floor of
the homodyne readout.

All quantities are SI; angular frequencies are rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateOperatingPoint, ImaginaryEta, Unsolvable

#: |T_msi| below which the dissipative coupling is treated as undefined.
T_MSI_DEGENERACY = 1e-9

#: |cos 2kx0| below which the dissipative coupling is snapped to exactly
#: zero.  Double precision cannot place the operating point closer to the
#: eta = 0 boundary than ~1e-8 in the cosine, so values under this snap are
#: pure rounding residue.
_COS_SNAP = 1e-10

#: Allowed overshoot of |sin 2kx0| past 1 before the operating point is
#: declared unreachable (pure-rounding margin).
_BOUNDARY_TOL = 1e-12

#: |cos^2| below which a solved operating point counts as sitting exactly on
#: the eta = 0 boundary.  The boundary maps to 1 - sin^2 formed from O(1)
#: cancellations, so residues up to ~1e-12 carry no positional information.
_COS_SQ_SNAP = 1e-12

_LOSSLESS_TOL = 1e-12


@dataclass(frozen=True)
class MirrorSpec:
    """Amplitude reflectivity and transmissivity of the movable membrane."""

    r_m: float
    t_m: float

    def __post_init__(self):
        if not (0.0 <= self.r_m <= 1.0 and 0.0 <= self.t_m <= 1.0):
            raise ValueError("mirror amplitudes must lie in [0, 1]")
        if abs(self.r_m**2 + self.t_m**2 - 1.0) > _LOSSLESS_TOL:
            raise ValueError("mirror must be lossless: r_m^2 + t_m^2 = 1")

    @classmethod
    def from_power_reflectivity(cls, power_r: float) -> "MirrorSpec":
        """Build from the power reflectivity r_m^2, deriving a lossless t_m."""
        if not 0.0 <= power_r <= 1.0:
            raise ValueError("power reflectivity must lie in [0, 1]")
        return cls(r_m=math.sqrt(power_r), t_m=math.sqrt(1.0 - power_r))


@dataclass(frozen=True)
class BeamSplitterSpec:
    """Central beam splitter, parametrized by the imbalance
    epsilon = r_BS^2 - t_BS^2 of its power split."""

    epsilon: float

    def __post_init__(self):
        if not -1.0 < self.epsilon < 1.0:
            raise ValueError("imbalance must satisfy -1 < epsilon < 1")

    @property
    def r_bs(self) -> float:
        return math.sqrt((1.0 + self.epsilon) / 2.0)

    @property
    def t_bs(self) -> float:
        return math.sqrt((1.0 - self.epsilon) / 2.0)

    @property
    def balance(self) -> float:
        """sqrt(1 - epsilon^2) = 2 r_BS t_BS, the interference contrast."""
        return math.sqrt((1.0 - self.epsilon) * (1.0 + self.epsilon))


@dataclass(frozen=True)
class OpticalCarrier:
    """Carrier light, fixed by its vacuum wavelength (meters)."""

    wavelength: float

    def __post_init__(self):
        if self.wavelength <= 0.0:
            raise ValueError("wavelength must be positive")

    @property
    def omega0(self) -> float:
        """Carrier angular frequency, rad/s."""
        from scipy.constants import c

        return 2.0 * math.pi * c / self.wavelength

    @property
    def k(self) -> float:
        """Wave number omega0 / c = 2 pi / wavelength, 1/m."""
        return 2.0 * math.pi / self.wavelength


@dataclass(frozen=True)
class MsiOperatingPoint:
    """Mean membrane offset x0 (meters) from the arm-balanced position."""

    x0: float

    def phase(self, carrier: OpticalCarrier) -> float:
        """Round-trip phase 2 k x0 picked up at offset x0."""
        return 2.0 * carrier.k * self.x0


@dataclass(frozen=True)
class GeneralizedMirror:
    """The MSI reduced to one transmissivity / reflectivity pair."""

    t_msi: float
    r_msi: complex

    @property
    def unitarity_defect(self) -> float:
        return abs(self.t_msi**2 + abs(self.r_msi) ** 2 - 1.0)


@dataclass(frozen=True)
class CouplingPair:
    """Dispersive (xi) and dissipative (eta) coupling coefficients, 1/m.

    A displacement x of the membrane shifts the cavity frequency to
    omega0 (1 + xi x) and the MSI-side relaxation rate to gamma0 (1 + eta x).
    """

    xi: float
    eta: float

    @property
    def product(self) -> float:
        return self.xi * self.eta


def generalized_mirror(
    mirror: MirrorSpec,
    bs: BeamSplitterSpec,
    op: MsiOperatingPoint,
    carrier: OpticalCarrier,
) -> GeneralizedMirror:
    """Compound transmissivity and reflectivity of the MSI.

    The membrane reflection interferes at the beam splitter with the
    imbalance-leaked carrier, giving

        T = r_m sqrt(1 - eps^2) sin(2 k x0) - t_m eps
        R = r_m (cos 2kx0 + i eps sin 2kx0) + i t_m sqrt(1 - eps^2)

    which is unitary for any lossless membrane.
    """
    phi = op.phase(carrier)
    sin_phi = math.sin(phi)
    cos_phi = math.cos(phi)
    t_msi = mirror.r_m * bs.balance * sin_phi - mirror.t_m * bs.epsilon
    r_msi = complex(
        mirror.r_m * cos_phi,
        mirror.r_m * bs.epsilon * sin_phi + mirror.t_m * bs.balance,
    )
    return GeneralizedMirror(t_msi=t_msi, r_msi=r_msi)


def couplings_closed_form(
    mirror: MirrorSpec,
    bs: BeamSplitterSpec,
    op: MsiOperatingPoint,
    carrier: OpticalCarrier,
    length_eff: float,
) -> CouplingPair:
    """Closed-form coupling coefficients at a given operating point.

        xi  = (t_m T_msi + eps) / (L |R_msi|^2)
        eta = 4 k r_m sqrt(1 - eps^2) cos(2 k x0) / T_msi

    ``length_eff`` is the effective cavity length L that converts the phase
    pull into a frequency pull; the matching round-trip time is 2 L / c.

    Raises DegenerateOperatingPoint when |T_msi| < 1e-9 (eta undefined).
    """
    gm = generalized_mirror(mirror, bs, op, carrier)
    if abs(gm.t_msi) < T_MSI_DEGENERACY:
        raise DegenerateOperatingPoint(
            f"|T_msi| = {abs(gm.t_msi):.3e} is below {T_MSI_DEGENERACY:g}; "
            "the dissipative coupling has T_msi in its denominator"
        )
    cos_phi = math.cos(op.phase(carrier))
    if abs(cos_phi) < _COS_SNAP:
        cos_phi = 0.0
    eta = 4.0 * carrier.k * mirror.r_m * bs.balance * cos_phi / gm.t_msi
    xi = (mirror.t_m * gm.t_msi + bs.epsilon) / (length_eff * abs(gm.r_msi) ** 2)
    return CouplingPair(xi=xi, eta=eta)


def couplings_by_derivative(
    mirror: MirrorSpec,
    bs: BeamSplitterSpec,
    op: MsiOperatingPoint,
    carrier: OpticalCarrier,
    tau: float,
    step: float = 1e-15,
) -> CouplingPair:
    """Coupling coefficients from their defining derivatives.

    Independent numeric oracle for :func:`couplings_closed_form`: central
    finite differences of the compound mirror with respect to membrane
    displacement,

        eta = 2 d_x T_msi / T_msi
        xi  = Im(d_x R_msi / R_msi) / (omega0 tau)

    with tau the cavity round-trip time (2 L / c for effective length L, so
    omega0 tau = 2 k L and both routes use the same length convention).

    The default step of 1e-15 m changes the trigonometric arguments by
    ~1e-8 rad, far above rounding yet far below curvature; a doubled-step
    evaluation is used as a convergence guard.
    """
    gm0 = generalized_mirror(mirror, bs, op, carrier)
    if abs(gm0.t_msi) < T_MSI_DEGENERACY:
        raise DegenerateOperatingPoint(
            f"|T_msi| = {abs(gm0.t_msi):.3e} is below {T_MSI_DEGENERACY:g}"
        )

    def _diff(h):
        plus = generalized_mirror(mirror, bs, MsiOperatingPoint(op.x0 + h), carrier)
        minus = generalized_mirror(mirror, bs, MsiOperatingPoint(op.x0 - h), carrier)
        d_t = (plus.t_msi - minus.t_msi) / (2.0 * h)
        d_r = (plus.r_msi - minus.r_msi) / (2.0 * h)
        return d_t, d_r

    d_t, d_r = _diff(step)
    d_t2, d_r2 = _diff(2.0 * step)
    scale = max(abs(d_t), abs(d_r), 1.0)
    if abs(d_t - d_t2) / scale > 1e-4 or abs(d_r - d_r2) / scale > 1e-4:
        import warnings

        warnings.warn(
            "finite-difference couplings did not converge under step doubling",
            stacklevel=2,
        )
    eta = 2.0 * d_t / gm0.t_msi
    xi = (d_r / gm0.r_msi).imag / (carrier.omega0 * tau)
    return CouplingPair(xi=xi, eta=eta)


def solve_operating_point(
    target_t: float,
    mirror: MirrorSpec,
    bs: BeamSplitterSpec,
    carrier: OpticalCarrier,
) -> MsiOperatingPoint:
    """Membrane offset that realizes a requested compound transmissivity.

    Inverts the transmissivity for sin(2 k x0) and returns the branch with
    cos(2 k x0) >= 0, which keeps eta real and non-negative.  Raises
    Unsolvable when the required sine exceeds 1 in magnitude, i.e. the
    requested transmission is unreachable at this mirror and imbalance.
    """
    denom = mirror.r_m * bs.balance
    if denom == 0.0:
        raise Unsolvable("membrane does not reflect; transmission cannot be tuned")
    s = (target_t + mirror.t_m * bs.epsilon) / denom
    if abs(s) > 1.0 + _BOUNDARY_TOL:
        raise Unsolvable(
            f"sin(2 k x0) would need to be {s:.6g}; transmission "
            f"{target_t:.6g} is unreachable at imbalance {bs.epsilon:.6g}"
        )
    s = min(1.0, max(-1.0, s))
    x0 = math.asin(s) / (2.0 * carrier.k)
    return MsiOperatingPoint(x0=x0)


def couplings_at_transmission(
    target_t: float,
    mirror: MirrorSpec,
    bs: BeamSplitterSpec,
    carrier: OpticalCarrier,
    length_eff: float,
) -> tuple[CouplingPair, MsiOperatingPoint]:
    """Solve the operating point for ``target_t`` and return the couplings.

    Unlike evaluating cos(2 k x0) at the solved offset, this path forms
    cos^2 = (1 - s)(1 + s) without cancellation, so the eta = 0 boundary
    (maximum usable imbalance) is resolved exactly.  Past the boundary the
    cosine would be imaginary and ImaginaryEta is raised.
    """
    if abs(target_t) < T_MSI_DEGENERACY:
        raise DegenerateOperatingPoint("target transmissivity is numerically zero")
    denom = mirror.r_m * bs.balance
    if denom == 0.0:
        raise Unsolvable("membrane does not reflect; transmission cannot be tuned")
    reach = mirror.t_m * bs.epsilon
    one_minus_s = (denom - target_t - reach) / denom
    one_plus_s = (denom + target_t + reach) / denom
    cos_sq = one_minus_s * one_plus_s
    if cos_sq < -_COS_SQ_SNAP:
        raise ImaginaryEta(
            f"cos(2 k x0) would be imaginary (cos^2 = {cos_sq:.3e}); "
            "reduce the imbalance or the target transmissivity"
        )
    cos_phi = 0.0 if cos_sq < _COS_SQ_SNAP else math.sqrt(cos_sq)
    s = min(1.0, max(-1.0, (target_t + reach) / denom))
    op = MsiOperatingPoint(math.asin(s) / (2.0 * carrier.k))
    eta = 4.0 * carrier.k * mirror.r_m * bs.balance * cos_phi / target_t
    # lossless mirror: |R_msi|^2 = 1 - T_msi^2 exactly
    xi = (mirror.t_m * target_t + bs.epsilon) / (
        length_eff * (1.0 - target_t) * (1.0 + target_t)
    )
    return CouplingPair(xi=xi, eta=eta), op
