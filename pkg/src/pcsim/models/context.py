"""Task-level aggregation of per-sequence latents and the parameter head."""

import torch
import torch.nn as nn


class ContextAggregator(nn.Module):
    """Element-wise softmax-weighted combination of context latents.

    weights_c = exp(beta * r_c) / sum_c' exp(beta * r_c'), applied per
    dimension across the context axis; beta is a learnable inverse
    temperature (scalar by default, optionally per-dimension).
    """

    def __init__(self, dim: int = 128, per_dim_beta: bool = False):
        super().__init__()
        init = torch.ones(dim) if per_dim_beta else torch.ones(())
        self.beta = nn.Parameter(init)

    def forward(self, latents: torch.Tensor) -> torch.Tensor:  # (C, d) -> (d,)
        if latents.ndim != 2 or latents.shape[0] < 1:
            raise ValueError("expected a (C, d) latent stack with C >= 1")
        weights = torch.softmax(self.beta * latents, dim=0)
        return (weights * latents).sum(dim=0)


class ParamHead(nn.Module):
    """Decodes the aggregated latent into z-scored physical parameters."""

    def __init__(self, dim: int = 128, hidden: int = 64, n_params: int = 3):
        super().__init__()
        self.fc1 = nn.Linear(dim, hidden)
        self.fc2 = nn.Linear(hidden, n_params)
        self.act = nn.GELU()

    def forward(self, code: torch.Tensor) -> torch.Tensor:
        return self.fc2(self.act(self.fc1(code)))
