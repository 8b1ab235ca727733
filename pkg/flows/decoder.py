"""
Glow decoder: squeeze, then repeated [actnorm -> invertible linear -> coupling]
blocks, then unsqueeze.

Conditioned on a speaker vector when ``gin_channels > 0`` (conditional
variant), unconditioned otherwise (explicit variant).
"""

import logging

import torch
import torch.nn.functional as F
from torch import nn

from flows import commons
from flows.layers import ActNorm, AffineCoupling, InvertibleLinear

logger = logging.getLogger(__name__)


class FlowDecoder(nn.Module):
    """
    Ordered stack of invertible layers mapping mel frames ``x`` to latents ``z``.

    Attributes:
        in_channels: Channels per unsqueezed frame (80 for mel input)
        n_sqz: Squeeze factor; 1 disables squeezing
        gin_channels: Width of the speaker condition, 0 for none
        flows: The layers in forward order
    """

    def __init__(
        self,
        in_channels: int = 80,
        hidden_channels: int = 192,
        n_blocks: int = 4,
        n_sqz: int = 2,
        kernel_size: int = 3,
        gin_channels: int = 0,
        init: str = 'orthogonal',
    ):
        super().__init__()
        if n_blocks < 1:
            raise ValueError('a flow needs at least one block')
        self.in_channels = in_channels
        self.hidden_channels = hidden_channels
        self.n_blocks = n_blocks
        self.n_sqz = n_sqz
        self.gin_channels = gin_channels

        channels = in_channels * n_sqz
        self.flows = nn.ModuleList()
        for _ in range(n_blocks):
            self.flows.append(ActNorm(channels, initialized=init == 'identity'))
            self.flows.append(InvertibleLinear(channels, init=init))
            self.flows.append(AffineCoupling(channels, hidden_channels, kernel_size, gin_channels))

    @property
    def conditional(self) -> bool:
        return self.gin_channels > 0

    def forward(self, x, x_mask=None, g=None, reverse=False):
        """
        Run the stack forward (x -> z) or in reverse (z -> x).

        Args:
            x: Frames [B, in_channels, T]
            x_mask: Validity mask [B, 1, T]; all frames valid when omitted
            g: Speaker condition [B, gin_channels] for a conditional stack
            reverse: Run the exact inverse

        Returns:
            Tuple of the mapped frames [B, in_channels, T] and the float64
            log-determinant [B] summed over all layers (negated in reverse)
        """
        commons.check_condition(g, self.conditional)
        if x_mask is None:
            x_mask = commons.full_mask(x)
        length = x.size(2)

        pad = (-length) % self.n_sqz
        if pad:
            x = F.pad(x, (0, pad))
            x_mask = F.pad(x_mask, (0, pad))

        h, h_mask = commons.squeeze(x, x_mask, self.n_sqz)
        # Valid frames whose squeeze group is incomplete pass through unchanged.
        _, covered = commons.unsqueeze(h, h_mask, self.n_sqz)
        held_out = x_mask - covered

        logdet_tot = torch.zeros(x.size(0), dtype=torch.float64, device=x.device)
        flows = reversed(self.flows) if reverse else self.flows
        for flow in flows:
            h, logdet = flow(h, h_mask, g=g, reverse=reverse)
            logdet_tot = logdet_tot + logdet

        y, _ = commons.unsqueeze(h, h_mask, self.n_sqz)
        y = y + x * held_out
        return y[:, :, :length], logdet_tot

    def inverse(self, z, z_mask=None, g=None):
        """Map latents back to frames; the log-determinant is discarded."""
        x, _ = self.forward(z, z_mask, g=g, reverse=True)
        return x

    def actnorm_layers(self) -> list[ActNorm]:
        return [flow for flow in self.flows if isinstance(flow, ActNorm)]
