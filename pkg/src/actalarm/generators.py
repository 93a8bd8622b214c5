"""Synthetic anomaly generators: counterexamples used to train the alarm.

Two flavors: an input-shaped Gaussian noise draw, and a VAE that perturbs
the posterior mean in latent space to decode improbable samples. Both are
deterministic given their seed and draw order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from actalarm.nn import Activation, AdamState, DenseLayer, Network
from actalarm.nn.serialize import network_from_bytes, network_to_bytes
from actalarm.target import DROPOUT_RATE
from actalarm.util import NotTrainedError, batch_indices, derive_rng, ensure_finite


@dataclass
class NoiseGenSpec:
    """Input-space noise N(mu, sigma^2); defaults suit [0, 1]-scaled features."""
    mu: float = 0.5
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def to_dict(self) -> dict:
        return {"kind": "noise", "mu": self.mu, "sigma": self.sigma}


class NoiseGenerator:
    """Replaces each input with an i.i.d. Gaussian draw of the same shape.

    Output depends only on the input's shape and the seeded stream; values
    are intentionally not clipped to [0, 1] — out-of-range points are
    legitimately anomalous.
    """

    def __init__(self, spec: NoiseGenSpec, seed: int = 0):
        self.spec = spec
        self._rng = derive_rng(seed, "noise-generator")

    def generate(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x))
        return self._rng.normal(self.spec.mu, self.spec.sigma, size=x.shape)


@dataclass
class VaeSpec:
    """Mirror-symmetric dense VAE; the latent sits at the middle width.

    ``perturb_std`` is the per-coordinate std of the latent noise used to
    generate anomalies: default sqrt(5), i.e. the variance-5 reading of a
    N(0, 5) perturbation.
    """
    hidden_widths: list[int] = field(default_factory=lambda: [800, 400, 100, 25, 100, 400, 800])
    perturb_std: float = math.sqrt(5.0)
    epochs: int = 30
    lr: float = 0.001
    batch_size: int = 256

    def __post_init__(self):
        if len(self.hidden_widths) % 2 == 0:
            raise ValueError("hidden_widths needs an odd length with the latent in the middle")
        mid = len(self.hidden_widths) // 2
        if self.hidden_widths[mid + 1:] != self.hidden_widths[:mid][::-1]:
            raise ValueError(f"encoder/decoder widths must mirror around the latent, "
                             f"got {self.hidden_widths}")

    @property
    def latent_dim(self) -> int:
        return self.hidden_widths[len(self.hidden_widths) // 2]

    @property
    def encoder_widths(self) -> list[int]:
        return self.hidden_widths[:len(self.hidden_widths) // 2]

    @property
    def decoder_widths(self) -> list[int]:
        return self.hidden_widths[len(self.hidden_widths) // 2 + 1:]

    def to_dict(self) -> dict:
        return {"kind": "vae", "hidden_widths": list(self.hidden_widths),
                "perturb_std": self.perturb_std, "epochs": self.epochs,
                "lr": self.lr, "batch_size": self.batch_size}


def gaussian_kl(mu: np.ndarray, log_var: np.ndarray) -> float:
    """Mean KL(N(mu, sigma^2) || N(0, 1)) per sample, summed over latent dims."""
    per_sample = 0.5 * np.sum(mu * mu + np.exp(log_var) - 1.0 - log_var, axis=1)
    return float(np.mean(per_sample))


class Vae:
    """Gaussian-posterior autoencoder built from four dense chains.

    trunk: input -> last encoder hidden (ReLU);
    mu/log-var heads: linear projections to the latent;
    decoder: latent -> reconstruction (ReLU stack, sigmoid output).
    """

    def __init__(self, trunk: Network, mu_head: Network, logvar_head: Network,
                 decoder: Network, spec: VaeSpec):
        self.trunk = trunk
        self.mu_head = mu_head
        self.logvar_head = logvar_head
        self.decoder = decoder
        self.spec = spec
        self.trained = False

    @classmethod
    def build(cls, input_dim: int, spec: VaeSpec, seed: int = 0) -> "Vae":
        rng = derive_rng(seed, "vae-init")
        enc = [input_dim] + spec.encoder_widths
        trunk = Network([DenseLayer.create(enc[i], enc[i + 1], Activation.RELU, rng)
                         for i in range(len(enc) - 1)])
        mu_head = Network([DenseLayer.create(enc[-1], spec.latent_dim, Activation.LINEAR, rng)])
        logvar_head = Network([DenseLayer.create(enc[-1], spec.latent_dim, Activation.LINEAR, rng)])
        dec_widths = [spec.latent_dim] + spec.decoder_widths + [input_dim]
        dec_layers = []
        for i in range(len(dec_widths) - 1):
            act = Activation.SIGMOID if i == len(dec_widths) - 2 else Activation.RELU
            dropout = DROPOUT_RATE if i == len(dec_widths) - 3 else 0.0
            dec_layers.append(DenseLayer.create(dec_widths[i], dec_widths[i + 1], act, rng,
                                                dropout_rate=dropout))
        decoder = Network(dec_layers)
        return cls(trunk, mu_head, logvar_head, decoder, spec)

    def parameters(self) -> list[np.ndarray]:
        return (self.trunk.parameters() + self.mu_head.parameters()
                + self.logvar_head.parameters() + self.decoder.parameters())

    def encode(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        hidden, _ = self.trunk.forward(x)
        mu, _ = self.mu_head.forward(hidden)
        log_var, _ = self.logvar_head.forward(hidden)
        return mu, log_var

    def decode(self, z: np.ndarray) -> np.ndarray:
        out, _ = self.decoder.forward(z)
        return out

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        """Deterministic mean-path reconstruction: decode(h_mu(x))."""
        mu, _ = self.encode(x)
        return self.decode(mu)


class VaeGenerator:
    """Anomaly generation by latent perturbation: decode(h_mu(x) + eps)."""

    def __init__(self, vae: Vae, seed: int = 0):
        self.vae = vae
        self._rng = derive_rng(seed, "vae-generator")

    def generate(self, x: np.ndarray, eps: np.ndarray | None = None) -> np.ndarray:
        if not self.vae.trained:
            raise NotTrainedError("VAE generator used before training")
        mu, _ = self.vae.encode(np.atleast_2d(x))
        if eps is None:
            eps = self._rng.normal(0.0, self.vae.spec.perturb_std, size=mu.shape)
        return self.vae.decode(mu + eps)


def train_vae(data: np.ndarray, spec: VaeSpec, seed: int = 0,
              input_dim: int | None = None) -> tuple[Vae, list[float]]:
    """Fit the VAE on normal data with a plain ELBO: Bernoulli reconstruction
    (per-sample BCE summed over dimensions, suiting [0, 1]-scaled features)
    plus unit-Gaussian KL, reparameterized latent draws, Adam.

    Returns the trained VAE and per-epoch ELBO losses.
    """
    data = ensure_finite("vae training data", np.asarray(data, dtype=np.float64))
    if data.shape[0] == 0:
        raise ValueError("vae training data is empty")
    vae = Vae.build(input_dim or data.shape[1], spec, seed=seed)
    adam = AdamState(vae.parameters(), lr=spec.lr)
    shuffle_rng = derive_rng(seed, "vae-shuffle")
    eps_rng = derive_rng(seed, "vae-reparam")
    dropout_rng = derive_rng(seed, "vae-dropout")
    eps_clip = 1e-7
    history = []
    for _ in range(spec.epochs):
        losses = []
        for idx in batch_indices(data.shape[0], spec.batch_size, shuffle_rng):
            batch = data[idx]
            b = batch.shape[0]

            hidden, _ = vae.trunk.forward(batch, mode="train", rng=dropout_rng)
            mu, _ = vae.mu_head.forward(hidden, mode="train")
            log_var, _ = vae.logvar_head.forward(hidden, mode="train")
            std = np.exp(0.5 * log_var)
            eps = eps_rng.standard_normal(mu.shape)
            z = mu + std * eps
            recon, _ = vae.decoder.forward(z, mode="train", rng=dropout_rng)

            p = np.clip(recon, eps_clip, 1.0 - eps_clip)
            recon_loss = float(np.mean(np.sum(
                -(batch * np.log(p) + (1.0 - batch) * np.log(1.0 - p)), axis=1)))
            kl = gaussian_kl(mu, log_var)
            losses.append(recon_loss + kl)

            dec_grads, dz = vae.decoder.backprop((p - batch) / (p * (1.0 - p)) / b)
            dmu = dz + mu / b
            dlogvar = dz * eps * 0.5 * std + 0.5 * (np.exp(log_var) - 1.0) / b
            mu_grads, dh_mu = vae.mu_head.backprop(dmu)
            logvar_grads, dh_lv = vae.logvar_head.backprop(dlogvar)
            trunk_grads, _ = vae.trunk.backprop(dh_mu + dh_lv)

            adam.step(vae.parameters(), trunk_grads + mu_grads + logvar_grads + dec_grads)
        history.append(float(np.mean(losses)))
    vae.trained = True
    return vae, history


def vae_to_parts(vae: Vae) -> dict[str, bytes | dict]:
    """Serializable pieces for bundling; spec metadata travels alongside."""
    return {
        "trunk": network_to_bytes(vae.trunk),
        "mu_head": network_to_bytes(vae.mu_head),
        "logvar_head": network_to_bytes(vae.logvar_head),
        "decoder": network_to_bytes(vae.decoder),
        "spec": vae.spec.to_dict(),
    }


def vae_from_parts(parts: dict) -> Vae:
    doc = dict(parts["spec"])
    doc.pop("kind", None)
    vae = Vae(
        trunk=network_from_bytes(parts["trunk"]),
        mu_head=network_from_bytes(parts["mu_head"]),
        logvar_head=network_from_bytes(parts["logvar_head"]),
        decoder=network_from_bytes(parts["decoder"]),
        spec=VaeSpec(**doc),
    )
    vae.trained = True
    return vae
