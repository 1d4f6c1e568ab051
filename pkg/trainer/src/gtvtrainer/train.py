"""End-to-end training of the feature and strength networks.

Both networks feed the differentiable layer replica; the loss is the
mean squared error between the layer output and the clean patch.
Optimization is plain stochastic gradient descent. Each epoch appends
one ``epoch,mean_loss`` row to the log CSV; the checkpoint stores both
state dicts plus the geometry the export step needs.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import torch

from .data import load_patch_set, make_noisy
from .layer import unrolled_layer
from .models import FeatureNet, StrengthNet, to_input

__all__ = ["TrainConfig", "train", "train_on_patches", "save_checkpoint", "load_checkpoint"]

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 16
    lr: float = 1e-4
    sigma: float = 25.0
    seed: int = 0
    patch_size: int = 36
    blocks: int = 6
    epsilon: float = 0.3
    rho: float = 0.01

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.patch_size < 8:
            raise ValueError("patch_size must be >= 8 (strength net pooling)")
        if self.blocks < 1:
            raise ValueError("blocks must be >= 1")
        if self.epsilon <= 0 or self.rho <= 0:
            raise ValueError("epsilon and rho must be positive")


def save_checkpoint(path, feature_net: FeatureNet, strength_net: StrengthNet, config: TrainConfig) -> None:
    torch.save(
        {
            "version": CHECKPOINT_VERSION,
            "config": asdict(config),
            "feature_net": feature_net.state_dict(),
            "strength_net": strength_net.state_dict(),
        },
        path,
    )


def load_checkpoint(path):
    """Load a checkpoint; returns (feature_net, strength_net, config)."""
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {payload.get('version')}")
    feature_net = FeatureNet()
    strength_net = StrengthNet()
    feature_net.load_state_dict(payload["feature_net"])
    strength_net.load_state_dict(payload["strength_net"])
    feature_net.eval()
    strength_net.eval()
    return feature_net, strength_net, TrainConfig(**payload["config"])


def train_on_patches(
    clean: torch.Tensor,
    config: TrainConfig,
    checkpoint_path=None,
    log_path=None,
    verbose: bool = False,
):
    """Train on an (N, h, w) clean-patch tensor; returns per-epoch mean losses."""
    if clean.dim() != 3 or clean.shape[0] < 1:
        raise ValueError(f"expected a nonempty (N, h, w) patch tensor, got {tuple(clean.shape)}")
    count, height, width = clean.shape
    clean = clean.to(torch.float64)
    noisy = make_noisy(clean, config.sigma, config.seed)

    torch.manual_seed(config.seed)
    feature_net = FeatureNet()
    strength_net = StrengthNet()
    params = list(feature_net.parameters()) + list(strength_net.parameters())
    optimizer = torch.optim.SGD(params, lr=config.lr)
    order_generator = torch.Generator().manual_seed(config.seed + 1)

    history = []
    log = open(log_path, "w") if log_path is not None else None
    try:
        if log is not None:
            log.write("epoch,mean_loss\n")
        for epoch in range(config.epochs):
            order = torch.randperm(count, generator=order_generator)
            total = 0.0
            for start in range(0, count, config.batch_size):
                index = order[start : start + config.batch_size]
                batch_clean = clean[index]
                batch_noisy = noisy[index]
                inputs = to_input(batch_noisy)
                features = feature_net.features(inputs)
                mu = strength_net(inputs)
                out = unrolled_layer(
                    batch_noisy.reshape(len(index), -1),
                    features,
                    mu,
                    height,
                    width,
                    epsilon=config.epsilon,
                    rho=config.rho,
                    blocks=config.blocks,
                )
                loss = torch.mean((out - batch_clean.reshape(len(index), -1)) ** 2)
                if not torch.isfinite(loss):
                    raise RuntimeError(
                        f"non-finite loss {loss.item()} at epoch {epoch} "
                        f"batch {start // config.batch_size}; check the learning "
                        f"rate and the data scaling"
                    )
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                total += loss.item() * len(index)
            mean_loss = total / count
            history.append(mean_loss)
            if log is not None:
                log.write(f"{epoch},{mean_loss!r}\n")
                log.flush()
            if verbose:
                print(f"epoch {epoch} mean_loss {mean_loss:.6e}")
    finally:
        if log is not None:
            log.close()

    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, feature_net, strength_net, config)
    return history


def train(dataset_dir, config: TrainConfig, checkpoint_path=None, log_path=None, verbose: bool = False):
    """Tile all images under ``dataset_dir`` and train on the patches."""
    clean = load_patch_set(dataset_dir, config.patch_size)
    return train_on_patches(clean, config, checkpoint_path, log_path, verbose)
