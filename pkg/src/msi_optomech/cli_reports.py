"""Configuration parsing, command dispatch, and bit-stable CSV/JSON output.

The config is line-oriented ``key = value`` text with ``#`` comments and
case-sensitive keys.  Quantities named ``*_over_2pi_Hz`` are ordinary
frequencies in Hz at this boundary (matching plot axes); the core works in
rad/s throughout, so the conversion happens in exactly one audited place.

All emitted files are deterministic: floats use the shortest round-trip
representation, lines end in LF, JSON keys are sorted, and files are written
atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import noise_spectra as ns
from .cavity_dynamics import SystemParams, Topology
from .errors import OptomechError, ParseError, UnitError, VerificationFailed
from .msi_core import MirrorSpec, couplings_by_derivative
from .optimize import (
    SweepSpec,
    build_model,
    cooling_sweep,
    epsilon_max,
    epsilon_opt,
    grid_argmax_epsilon,
    input_noise_for,
    c_port_spectrum_fn,
    find_dip,
    occupancy_for_model,
    verify_closed_forms,
)

COMMANDS = (
    "couplings",
    "cooling-curve",
    "qrpn-budget",
    "squeeze-spectrum",
    "optimize-epsilon",
    "verify",
)

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ModelConfig:
    """User-facing configuration; defaults are the table-top membrane setup
    shipped with the package (SiN membrane, 1550 nm, 100 mW pump)."""

    topology: str = "SRM"
    mirror_reflectivity: float = 0.98  # power reflectivity of the membrane
    epsilon_mode: str = "opt"  # fixed | opt | max
    epsilon: float | None = None
    wavelength_nm: float = 1550.0
    cavity_length_cm: float = 10.0  # effective length; round trip is 2L/c
    gamma1_over_2pi_Hz: float = 1e6
    gamma0_over_2pi_Hz: float = 1e5
    gamma0_sweep: tuple = (1e4, 3e6, 200, "log")  # lo_Hz, hi_Hz, n, scale
    input_power_W: float = 0.1
    mass_ng: float = 50.0
    freq_mech_kHz: float = 350.0
    Q: float = 1e6
    temperature_K: float = 20.0
    squeeze_dB: float = 0.0  # negative = squeezed, positive = anti-squeezed
    squeeze_port: str = "C"
    squeeze_angle: str = "ba"  # "ba" (back-action quadrature) or radians
    homodyne_angle: str = "chi"  # "chi" | "beta+90" | radians
    excess_amplitude_noise: float = 1.0
    excess_phase_noise: float = 1.0
    occupancy_mode: str = "high_temperature"  # or "bose"
    spectrum_points: int = 2001


_FLOAT_KEYS = {
    "mirror_reflectivity",
    "epsilon",
    "wavelength_nm",
    "cavity_length_cm",
    "gamma1_over_2pi_Hz",
    "gamma0_over_2pi_Hz",
    "input_power_W",
    "mass_ng",
    "freq_mech_kHz",
    "Q",
    "temperature_K",
    "squeeze_dB",
    "excess_amplitude_noise",
    "excess_phase_noise",
}
_STR_KEYS = {
    "topology",
    "epsilon_mode",
    "squeeze_port",
    "squeeze_angle",
    "homodyne_angle",
    "occupancy_mode",
}
_INT_KEYS = {"spectrum_points"}
_ALL_KEYS = _FLOAT_KEYS | _STR_KEYS | _INT_KEYS | {"gamma0_sweep"}


def _coerce(key: str, raw: str, line: int | None):
    if key in _FLOAT_KEYS:
        try:
            return float(raw)
        except ValueError:
            raise ParseError(f"key {key!r} needs a number, got {raw!r}", line)
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ParseError(f"key {key!r} needs an integer, got {raw!r}", line)
    if key == "gamma0_sweep":
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 4:
            raise ParseError("gamma0_sweep needs 'lo_Hz,hi_Hz,n,scale'", line)
        try:
            return (float(parts[0]), float(parts[1]), int(parts[2]), parts[3])
        except ValueError:
            raise ParseError(f"bad gamma0_sweep value {raw!r}", line)
    return raw


def _validate(cfg: ModelConfig) -> ModelConfig:
    if cfg.topology not in ("SRM", "PRM"):
        raise UnitError(f"topology must be SRM or PRM, got {cfg.topology!r}")
    if cfg.epsilon_mode not in ("fixed", "opt", "max"):
        raise UnitError(f"epsilon_mode must be fixed|opt|max, got {cfg.epsilon_mode!r}")
    if cfg.epsilon_mode == "fixed" and cfg.epsilon is None:
        raise UnitError("epsilon_mode = fixed needs an epsilon value")
    if cfg.epsilon is not None and not -1.0 < cfg.epsilon < 1.0:
        raise UnitError(f"epsilon must lie in (-1, 1), got {cfg.epsilon}")
    if not 0.0 < cfg.mirror_reflectivity <= 1.0:
        raise UnitError("mirror_reflectivity must lie in (0, 1]")
    positives = (
        ("wavelength_nm", cfg.wavelength_nm),
        ("cavity_length_cm", cfg.cavity_length_cm),
        ("gamma1_over_2pi_Hz", cfg.gamma1_over_2pi_Hz),
        ("gamma0_over_2pi_Hz", cfg.gamma0_over_2pi_Hz),
        ("input_power_W", cfg.input_power_W),
        ("mass_ng", cfg.mass_ng),
        ("freq_mech_kHz", cfg.freq_mech_kHz),
        ("Q", cfg.Q),
        ("temperature_K", cfg.temperature_K),
    )
    for name, value in positives:
        if not value > 0.0 or not math.isfinite(value):
            raise UnitError(f"{name} must be positive and finite, got {value}")
    if cfg.excess_amplitude_noise < 1.0 or cfg.excess_phase_noise < 1.0:
        raise UnitError("excess laser noise factors must be >= 1")
    if cfg.squeeze_port != "C":
        raise UnitError("only the signal/vacuum port C supports squeezing")
    if cfg.squeeze_angle != "ba":
        try:
            float(cfg.squeeze_angle)
        except ValueError:
            raise UnitError(f"squeeze_angle must be 'ba' or radians, got {cfg.squeeze_angle!r}")
    if cfg.homodyne_angle not in ("chi", "beta+90"):
        try:
            float(cfg.homodyne_angle)
        except ValueError:
            raise UnitError(
                f"homodyne_angle must be 'chi', 'beta+90' or radians, got {cfg.homodyne_angle!r}"
            )
    if cfg.occupancy_mode not in ("high_temperature", "bose"):
        raise UnitError("occupancy_mode must be high_temperature or bose")
    lo, hi, n, scale = cfg.gamma0_sweep
    if not (lo > 0.0 and lo < hi and n >= 2 and scale in ("log", "linear")):
        raise UnitError(f"bad gamma0_sweep {cfg.gamma0_sweep!r}")
    if cfg.spectrum_points < 2:
        raise UnitError("spectrum_points must be >= 2")
    return cfg


def parse_config(text: str) -> ModelConfig:
    """Parse ``key = value`` lines into a fully resolved configuration.

    Empty text yields the default setup.  Unknown keys are rejected with the
    offending line number; out-of-range values raise UnitError.
    """
    values = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {rawline!r}", lineno)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _ALL_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if not raw:
            raise ParseError(f"key {key!r} has no value", lineno)
        values[key] = _coerce(key, raw, lineno)
    return _validate(ModelConfig(**values))


def apply_overrides(cfg: ModelConfig, overrides: list[str]) -> ModelConfig:
    """Apply ``--set key=value`` pairs after file parsing."""
    values = {}
    for item in overrides:
        if "=" not in item:
            raise ParseError(f"--set needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _ALL_KEYS:
            raise ParseError(f"unknown key {key!r}")
        values[key] = _coerce(key, raw, None)
    return _validate(dataclasses.replace(cfg, **values))


def config_echo(cfg: ModelConfig) -> dict:
    """Round-trippable plain dict of the configuration (user units)."""
    out = {}
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        if f.name == "gamma0_sweep":
            lo, hi, n, scale = value
            value = f"{lo!r},{hi!r},{n},{scale}"
        out[f.name] = value
    return out


def config_from_echo(echo: dict) -> ModelConfig:
    values = {k: _coerce(k, str(v), None) if k == "gamma0_sweep" else v for k, v in echo.items()}
    return _validate(ModelConfig(**values))


def to_system_params(cfg: ModelConfig) -> SystemParams:
    """Convert boundary units (Hz, nm, cm, ng, kHz) to SI rad/s, m, kg."""
    return SystemParams(
        topology=Topology[cfg.topology],
        mirror_power_reflectivity=cfg.mirror_reflectivity,
        epsilon_mode=cfg.epsilon_mode,
        epsilon=cfg.epsilon,
        wavelength=cfg.wavelength_nm * 1e-9,
        length=cfg.cavity_length_cm * 1e-2,
        gamma0=_TWO_PI * cfg.gamma0_over_2pi_Hz,
        gamma1=_TWO_PI * cfg.gamma1_over_2pi_Hz,
        w_in=cfg.input_power_W,
        mass=cfg.mass_ng * 1e-12,  # ng -> kg
        omega_m=_TWO_PI * cfg.freq_mech_kHz * 1e3,
        Q=cfg.Q,
        T0=cfg.temperature_K,
        squeeze_db=cfg.squeeze_dB,
        squeeze_angle=None if cfg.squeeze_angle == "ba" else float(cfg.squeeze_angle),
        homodyne=cfg.homodyne_angle,
        amplitude_excess=cfg.excess_amplitude_noise,
        phase_excess=cfg.excess_phase_noise,
        occupancy_mode=cfg.occupancy_mode,
    )


def resolve_homodyne_angle(cfg: ModelConfig, model) -> float:
    # "chi" (signal-recycled) and "beta+90" (power-recycled) both name the
    # correlation angle of the configured topology
    if cfg.homodyne_angle in ("chi", "beta+90"):
        return ns.optimal_homodyne_angle(model.topology, model.nc)
    return float(cfg.homodyne_angle)


# ---------------------------------------------------------------------------
# deterministic writers


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    return repr(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _jsonable(value):
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    raise TypeError(f"not JSON serializable: {value!r}")


def write_json(path: Path, payload: dict) -> None:
    _atomic_write(
        path, json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + "\n"
    )


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _summary(cfg: ModelConfig, command: str, results: dict) -> dict:
    return {
        "command": command,
        "version": __version__,
        "config": config_echo(cfg),
        "results": results,
    }


# ---------------------------------------------------------------------------
# commands


def _scalar_summary_fields(model) -> dict:
    g0t = model.rates.gamma0 * model.rates.tau
    fields = {
        "epsilon": model.epsilon,
        "epsilon_opt": epsilon_opt(model.mirror, g0t),
        "epsilon_max": epsilon_max(model.mirror, g0t),
        "omega_M_Hz": model.mod.omega_M / _TWO_PI,
        "kappa_M_Hz": model.mod.kappa_M / _TWO_PI,
    }
    if model.nc.product > 0.0:
        feats = ns.squeeze_features(
            model.topology, model.rates, model.nc, model.mech, model.mod
        )
        fields.update(
            omega_sq_Hz=feats.omega_sq / _TWO_PI,
            Gamma_sq_Hz=feats.gamma_sq / _TWO_PI,
            separation=feats.separation,
            separation_estimate=feats.separation_estimate,
            theta_opt_rad=feats.theta_opt,
            dip_observable=feats.dip_observable,
        )
    return fields


def _cmd_couplings(cfg: ModelConfig, out: Path) -> int:
    params = to_system_params(cfg)
    model = build_model(params)
    fd = couplings_by_derivative(
        model.mirror, model.bs, model.op, model.carrier, params.tau
    )
    occ = occupancy_for_model(model)
    header = [
        "gamma0_Hz",
        "epsilon",
        "x0_m",
        "T_msi",
        "xi_per_m",
        "eta_per_m",
        "xi_fd_per_m",
        "eta_fd_per_m",
        "X",
        "H",
        "n_T",
    ]
    row = [
        model.rates.gamma0 / _TWO_PI,
        model.epsilon,
        model.op.x0,
        model.gm.t_msi,
        model.couplings.xi,
        model.couplings.eta,
        fd.xi,
        fd.eta,
        model.nc.x,
        model.nc.h,
        occ.n_t,
    ]
    write_csv(out / "couplings.csv", header, [row])
    results = _scalar_summary_fields(model)
    results["n_T"] = occ.n_t
    write_json(out / "couplings_summary.json", _summary(cfg, "couplings", results))
    return 0


def _cmd_cooling_curve(cfg: ModelConfig, out: Path) -> int:
    params = to_system_params(cfg)
    lo, hi, n, scale = cfg.gamma0_sweep
    sweep = SweepSpec(parameter="gamma0", lo=lo, hi=hi, n=n, scale=scale)
    header = ["gamma0_Hz", "n_T", "kappa_M_Hz", "stable"]
    results = {}
    balanced = dataclasses.replace(
        params, mirror_power_reflectivity=0.5, epsilon_mode="fixed", epsilon=0.0
    )
    for top in (Topology.SRM, Topology.PRM):
        for label, p, mode in (
            ("eps0", dataclasses.replace(balanced, topology=top), "fixed"),
            ("eps", dataclasses.replace(params, topology=top), params.epsilon_mode),
        ):
            curve = cooling_sweep(p, sweep, epsilon_mode=mode)
            rows = [
                (g / _TWO_PI, nt, km / _TWO_PI, bool(st))
                for g, nt, km, st in zip(
                    curve.gamma0, curve.n_t, curve.kappa_M, curve.stable
                )
            ]
            name = f"cooling_curve_{top.value}_{label}.csv"
            write_csv(out / name, header, rows)
            results[f"min_n_T_{top.value}_{label}"] = curve.min_n_t
    mirror = MirrorSpec.from_power_reflectivity(params.mirror_power_reflectivity)
    results["epsilon_opt_at_gamma0"] = epsilon_opt(mirror, params.gamma0 * params.tau)
    results["epsilon_max_at_gamma0"] = epsilon_max(mirror, params.gamma0 * params.tau)
    write_json(out / "cooling_curve_summary.json", _summary(cfg, "cooling-curve", results))
    return 0


def _spectrum_grid(model, points: int):
    center = model.mod.omega_M
    return np.geomspace(center / 4.0, center * 4.0, points)


def _cmd_qrpn_budget(cfg: ModelConfig, out: Path) -> int:
    params = to_system_params(cfg)
    model = build_model(params)
    theta = resolve_homodyne_angle(cfg, model)
    grid = _spectrum_grid(model, cfg.spectrum_points)
    budget = ns.homodyne_spectrum(
        model.topology,
        theta,
        model.rates,
        model.nc,
        model.mech,
        model.mod,
        grid,
        input_noise_for(params),
    )
    header = ["Omega_Hz", "S_shot", "S_CC", "S_BB", "S_thermal", "S_total"]
    rows = zip(
        budget.omega / _TWO_PI,
        budget.shot,
        budget.qrpn_c,
        budget.laser_b,
        budget.thermal,
        budget.total,
    )
    write_csv(out / "qrpn_budget.csv", header, rows)
    results = _scalar_summary_fields(model)
    results["theta_rad"] = theta
    results["ba_to_thermal_ratio"] = ns.ba_to_thermal_ratio(
        model.rates, model.nc, model.mech
    )
    write_json(out / "qrpn_budget_summary.json", _summary(cfg, "qrpn-budget", results))
    return 0


def _cmd_squeeze_spectrum(cfg: ModelConfig, out: Path) -> int:
    params = to_system_params(cfg)
    model = build_model(params)
    theta = resolve_homodyne_angle(cfg, model)
    feats = ns.squeeze_features(
        model.topology, model.rates, model.nc, model.mech, model.mod
    )
    grid = np.geomspace(
        model.mech.omega_m / 2.0, 2.0 * model.rates.gamma_plus, cfg.spectrum_points
    )
    budget = ns.homodyne_spectrum(
        model.topology,
        theta,
        model.rates,
        model.nc,
        model.mech,
        model.mod,
        grid,
        input_noise_for(params),
    )
    header = ["Omega_Hz", "S_CC", "S_BB", "S_thermal", "S_shot", "S_total"]
    rows = zip(
        budget.omega / _TWO_PI,
        budget.c_port_total,
        budget.shot_b + budget.laser_b,
        budget.thermal,
        budget.shot,
        budget.total,
    )
    write_csv(out / "squeeze_spectrum.csv", header, rows)
    dip_omega, dip_value = find_dip(
        c_port_spectrum_fn(model, theta),
        model.mech.omega_m / 2.0,
        2.0 * model.rates.gamma_plus,
        xtol=feats.gamma_sq / 100.0,
    )
    results = _scalar_summary_fields(model)
    results.update(
        theta_rad=theta,
        dip_Hz=dip_omega / _TWO_PI,
        dip_value=dip_value,
    )
    write_json(
        out / "squeeze_spectrum_summary.json",
        _summary(cfg, "squeeze-spectrum", results),
    )
    return 0


def _cmd_optimize_epsilon(cfg: ModelConfig, out: Path) -> int:
    params = to_system_params(cfg)
    mirror = MirrorSpec.from_power_reflectivity(params.mirror_power_reflectivity)
    g0t = params.gamma0 * params.tau
    eps_cf = epsilon_opt(mirror, g0t)
    eps_mx = epsilon_max(mirror, g0t)
    base = dataclasses.replace(params, epsilon_mode="fixed", epsilon=0.0)
    eps_grid = grid_argmax_epsilon(base, params.gamma0)
    step = 1e-3
    header = ["epsilon", "kappa_M_Hz", "stable"]
    rows = []
    for eps in np.arange(step, eps_mx - step, step):
        try:
            model = build_model(base, epsilon=float(eps))
            rows.append((float(eps), model.mod.kappa_M / _TWO_PI, True))
        except OptomechError:
            rows.append((float(eps), math.nan, False))
    write_csv(out / "optimize_epsilon.csv", header, rows)
    model_mx = build_model(base, epsilon=eps_mx)
    results = {
        "epsilon_opt": eps_cf,
        "epsilon_opt_grid": eps_grid,
        "epsilon_max": eps_mx,
        "eta_at_epsilon_max_per_m": model_mx.couplings.eta,
    }
    write_json(
        out / "optimize_epsilon_summary.json",
        _summary(cfg, "optimize-epsilon", results),
    )
    return 0


def _cmd_verify(cfg: ModelConfig, out: Path) -> int:
    params = to_system_params(cfg)
    try:
        report = verify_closed_forms(params)
        code = 0
    except VerificationFailed as exc:
        report = exc.report
        code = 2
    write_json(out / "verify_report.json", _summary(cfg, "verify", report.to_dict()))
    return code


_DISPATCH = {
    "couplings": _cmd_couplings,
    "cooling-curve": _cmd_cooling_curve,
    "qrpn-budget": _cmd_qrpn_budget,
    "squeeze-spectrum": _cmd_squeeze_spectrum,
    "optimize-epsilon": _cmd_optimize_epsilon,
    "verify": _cmd_verify,
}


def run(command: str, cfg: ModelConfig, out_dir: str | Path) -> int:
    """Execute one command; returns the process exit status (0 ok, 2 failed
    verification).  Config errors raise before any file is written."""
    if command not in _DISPATCH:
        raise ParseError(f"unknown command {command!r}")
    return _DISPATCH[command](cfg, Path(out_dir))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="msi-optomech",
        description=(
            "Frequency-domain noise and cooling model of an unbalanced "
            "Michelson-Sagnac interferometer with a recycling cavity"
        ),
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="path to key = value config file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (applied after the file)",
    )
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text() if args.config else ""
        cfg = apply_overrides(parse_config(text), args.set)
        return run(args.command, cfg, args.out)
    except (ParseError, UnitError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OptomechError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
