"""The two lightweight networks trained through the unrolled denoiser.

``FeatureNet`` maps a patch to per-pixel feature vectors that the
denoiser turns into graph edge weights; ``StrengthNet`` maps a patch to
one positive filter strength. Both take a 3-channel input plane; for
grayscale data the luminance plane is replicated onto all three
channels (``to_input``). Everything runs in float64 so the training
layer can be compared against the denoiser's solvers at tight
tolerance.
"""

from __future__ import annotations

import torch
from torch import nn

__all__ = ["FEATURE_DIM", "INPUT_CHANNELS", "FeatureNet", "StrengthNet", "to_input"]

INPUT_CHANNELS = 3
FEATURE_DIM = 3
HIDDEN = 32


def to_input(patch: torch.Tensor) -> torch.Tensor:
    """Replicate (..., h, w) intensities onto the 3 input channels.

    Accepts (h, w) or (batch, h, w); returns (batch, 3, h, w).
    """
    if patch.dim() == 2:
        patch = patch.unsqueeze(0)
    if patch.dim() != 3:
        raise ValueError(f"expected (h, w) or (batch, h, w), got shape {tuple(patch.shape)}")
    return patch.unsqueeze(1).expand(-1, INPUT_CHANNELS, -1, -1)


class FeatureNet(nn.Module):
    """Four size-preserving 3x3 convolutions, ReLU after each.

    Channels 3 -> 32 -> 32 -> 32 -> 3; input and output share spatial
    dimensions, so the output is one feature vector per pixel.
    """

    def __init__(self):
        super().__init__()
        widths = [INPUT_CHANNELS, HIDDEN, HIDDEN, HIDDEN, FEATURE_DIM]
        self.convs = nn.ModuleList(
            nn.Conv2d(widths[i], widths[i + 1], kernel_size=3, padding=1)
            for i in range(4)
        )
        self.double()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for conv in self.convs:
            x = torch.relu(conv(x))
        return x

    def features(self, x: torch.Tensor) -> torch.Tensor:
        """Forward pass reshaped to (batch, pixels, k), row-major pixels."""
        out = self.forward(x)
        batch, k, height, width = out.shape
        return out.permute(0, 2, 3, 1).reshape(batch, height * width, k)


class StrengthNet(nn.Module):
    """Four 3x3 convolutions with 2x2 max pooling between them, then a
    scalar head: global average pool, a 32 -> 1 linear layer, softplus.

    Softplus (not ReLU) on the head keeps the strength strictly
    positive; a zero strength would make the filter the identity and
    stop gradients. Needs input extent >= 8 so the three poolings leave
    at least one pixel.
    """

    def __init__(self):
        super().__init__()
        widths = [INPUT_CHANNELS, HIDDEN, HIDDEN, HIDDEN, HIDDEN]
        self.convs = nn.ModuleList(
            nn.Conv2d(widths[i], widths[i + 1], kernel_size=3, padding=1)
            for i in range(4)
        )
        self.pool = nn.MaxPool2d(2)
        self.head = nn.Linear(HIDDEN, 1)
        self.double()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for index, conv in enumerate(self.convs):
            if index > 0:
                x = self.pool(x)
            x = torch.relu(conv(x))
        pooled = x.mean(dim=(2, 3))
        return nn.functional.softplus(self.head(pooled)).squeeze(-1)
