"""Stabilizer (tableau) simulation with Pauli noise."""
from ._backend import BACKEND
from .channels import (
    InvalidChannelError,
    NoiseMap,
    PauliChannel,
    apply_channel,
    bit_flip,
    channel_power,
    depolarizing,
    nisq_noise_map,
    pqec_noise_map,
    twirled_relaxation_channel,
)
from .frame import (
    EnergyEstimate,
    TrajectoryConfig,
    noiseless_energy,
    noisy_energy,
    term_values,
    trajectory_energy,
)
from .tableau import (
    Tableau,
    UnsupportedGateError,
    apply_gate,
    encode,
    expectation,
    measure_z,
    simulate,
)

__all__ = [
    "BACKEND", "EnergyEstimate", "InvalidChannelError", "NoiseMap", "PauliChannel",
    "Tableau", "TrajectoryConfig", "UnsupportedGateError", "apply_channel", "apply_gate",
    "bit_flip", "channel_power", "depolarizing", "encode", "expectation", "measure_z",
    "nisq_noise_map", "noiseless_energy", "noisy_energy", "pqec_noise_map", "simulate",
    "term_values", "trajectory_energy", "twirled_relaxation_channel",
]
