"""Frequency-domain optomechanics of an unbalanced Michelson-Sagnac
interferometer coupled to a signal- or power-recycling cavity.

The package computes, in shot-noise units: the compound-mirror couplings of
the interferometer, the resonant-pump optical spring and parametric cooling
it enables, the quantum radiation-pressure and thermal noise budget of the
homodyne readout, and the ponderomotive-squeezing dip.  Every closed form is
paired with an independent numeric oracle (finite differences, grid search,
spectrum minimization) exercised by the test suite and by
``msi-optomech verify``.
"""

__version__ = "0.1.0"

from .cavity_dynamics import (
    CavityModel,
    CavityRates,
    MeanFields,
    MechanicalOscillator,
    ModifiedOscillator,
    NormalizedCouplings,
    Pump,
    SystemParams,
    Topology,
    cavity_rates,
    mean_fields,
    modified_oscillator,
    normalized_couplings,
    optical_spring,
)
from .errors import (
    DegenerateOperatingPoint,
    ImaginaryEta,
    OptomechError,
    ParseError,
    UnitError,
    Unsolvable,
    UnstableSpring,
    VerificationFailed,
)
from .msi_core import (
    BeamSplitterSpec,
    CouplingPair,
    GeneralizedMirror,
    MirrorSpec,
    MsiOperatingPoint,
    OpticalCarrier,
    couplings_at_transmission,
    couplings_by_derivative,
    couplings_closed_form,
    generalized_mirror,
    solve_operating_point,
)
from .noise_spectra import (
    InputNoise,
    Occupancy,
    SpectrumBudget,
    SqueezeFeatures,
    TransferRow,
    ba_to_thermal_ratio,
    displacement_transfer,
    homodyne_spectrum,
    output_quadrature_transfer,
    qrpn_psd,
    squeeze_features,
    thermal_occupation,
)
from .optimize import (
    CoolingCurve,
    SweepSpec,
    VerificationReport,
    build_model,
    cooling_sweep,
    epsilon_max,
    epsilon_opt,
    find_dip,
    grid_argmax_epsilon,
    occupancy_for_model,
    verify_closed_forms,
)

__all__ = [name for name in dir() if not name.startswith("_")]
