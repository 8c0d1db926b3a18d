"""Fourier feature projection of scalar coordinates onto geometric wavelengths."""

from dataclasses import dataclass

import numpy as np
import torch


@dataclass
class FourierConfig:
    """`bands` wavelengths spaced geometrically from lambda_max down to lambda_min."""

    bands: int = 8
    lambda_min: float = 0.05
    lambda_max: float = 32.0

    def __post_init__(self):
        if self.bands < 2:
            raise ValueError("need at least 2 frequency bands")
        if not 0.0 < self.lambda_min < self.lambda_max:
            raise ValueError("need 0 < lambda_min < lambda_max")

    def wavelengths(self) -> np.ndarray:
        k = np.arange(self.bands, dtype=np.float64)
        return self.lambda_max * (self.lambda_min / self.lambda_max) ** (k / (self.bands - 1))

    @property
    def features_per_coord(self) -> int:
        return 2 * self.bands


def fourier_features(x, cfg: FourierConfig):
    """Encode coordinates as interleaved (sin, cos) pairs per band.

    The last axis of `x` is treated as separate coordinates; output last axis
    is D * 2 * bands. Works on NumPy arrays and torch tensors alike.
    """
    lam = cfg.wavelengths()
    if torch.is_tensor(x):
        lam_t = torch.as_tensor(lam, dtype=x.dtype, device=x.device)
        phase = 2.0 * torch.pi * x[..., None] / lam_t
        out = torch.stack([torch.sin(phase), torch.cos(phase)], dim=-1)
        return out.reshape(*x.shape[:-1], x.shape[-1] * cfg.features_per_coord)
    x = np.asarray(x, dtype=np.float64)
    phase = 2.0 * np.pi * x[..., None] / lam
    out = np.stack([np.sin(phase), np.cos(phase)], axis=-1)
    return out.reshape(*x.shape[:-1], x.shape[-1] * cfg.features_per_coord)
