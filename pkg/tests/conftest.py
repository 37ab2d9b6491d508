import dataclasses
import math

import numpy as np
import pytest

from msi_optomech import Topology
from msi_optomech.cli_reports import ModelConfig, to_system_params

TWO_PI = 2.0 * math.pi


@pytest.fixture
def default_params():
    """Shipped table-top membrane defaults (SRM, 100 mW, 1550 nm)."""
    return to_system_params(ModelConfig())


@pytest.fixture
def fig5_srm_params(default_params):
    return dataclasses.replace(
        default_params,
        topology=Topology.SRM,
        epsilon_mode="opt",
        gamma1=TWO_PI * 1e6,
        gamma0=TWO_PI * 3e5,
    )


@pytest.fixture
def fig5_prm_params(default_params):
    return dataclasses.replace(
        default_params,
        topology=Topology.PRM,
        epsilon_mode="opt",
        gamma1=TWO_PI * 3e5,
        gamma0=TWO_PI * 1e6,
    )


@pytest.fixture
def fig4_params(default_params):
    return dataclasses.replace(
        default_params,
        topology=Topology.SRM,
        epsilon_mode="max",
        gamma1=TWO_PI * 1e6,
        gamma0=TWO_PI * 1e5,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20230811)


def random_valid_point(rng, non_degenerate=True):
    """Draw (mirror, bs, phase) over the valid parameter domain.

    With non_degenerate=True the draw avoids |T_msi| ~ 0 and xi ~ 0 where
    relative closed-form/oracle comparisons are ill posed.
    """
    from msi_optomech import BeamSplitterSpec, MirrorSpec

    while True:
        r_sq = rng.uniform(0.2, 0.98)
        eps = rng.uniform(-0.8, 0.8)
        phi = rng.uniform(0.05, 1.45)
        mirror = MirrorSpec.from_power_reflectivity(r_sq)
        bs = BeamSplitterSpec(epsilon=eps)
        if not non_degenerate:
            return mirror, bs, phi
        t_msi = mirror.r_m * bs.balance * math.sin(phi) - mirror.t_m * eps
        if abs(t_msi) < 1e-3:
            continue
        if abs(mirror.t_m * t_msi + eps) < 1e-2:
            continue
        return mirror, bs, phi
