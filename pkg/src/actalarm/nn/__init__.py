"""Minimal dense neural-network engine (float64, deterministic, CPU-only)."""

from actalarm.nn.network import Activation, ActivationTrace, DenseLayer, Network, glorot_init
from actalarm.nn.losses import bce_loss, mse_loss, softmax_cross_entropy
from actalarm.nn.optim import AdamState
from actalarm.nn.serialize import load_network, network_from_bytes, network_to_bytes, save_network

__all__ = [
    "Activation",
    "ActivationTrace",
    "AdamState",
    "DenseLayer",
    "Network",
    "bce_loss",
    "glorot_init",
    "load_network",
    "mse_loss",
    "network_from_bytes",
    "network_to_bytes",
    "save_network",
    "softmax_cross_entropy",
]
