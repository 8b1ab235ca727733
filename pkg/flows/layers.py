"""
Invertible layers with exact log-determinant accounting.

Every layer maps ``[B, C, T]`` frames under a ``[B, 1, T]`` validity mask and
returns ``(output, logdet)`` where ``logdet`` is a float64 ``[B]`` tensor
counting valid frames only. ``reverse=True`` runs the exact inverse and
returns the negated log-determinant.
"""

import math

import torch
from torch import nn

from config.exceptions import ShapeMismatch
from flows.commons import check_condition, full_mask
from flows.exceptions import NotInitialized


class ActNorm(nn.Module):
    """
    Per-channel affine map ``y = exp(logs) * x + bias``.

    The first forward pass in training mode initializes ``logs`` and ``bias``
    from the batch so that the outputs have zero mean and unit variance per
    channel.
    """

    def __init__(self, channels: int, initialized: bool = False):
        super().__init__()
        self.channels = channels
        self.logs = nn.Parameter(torch.zeros(1, channels, 1))
        self.bias = nn.Parameter(torch.zeros(1, channels, 1))
        self.register_buffer('initialized', torch.tensor(float(initialized)))

    @property
    def is_initialized(self) -> bool:
        return bool(self.initialized.item() > 0)

    def mark_initialized(self) -> None:
        self.initialized.fill_(1.0)

    def forward(self, x, x_mask=None, g=None, reverse=False):
        if x_mask is None:
            x_mask = full_mask(x)
        x_len = torch.sum(x_mask, [1, 2]).double()

        if reverse:
            if not self.is_initialized:
                raise NotInitialized('actnorm must see a training batch before it can be inverted')
            y = (x - self.bias) * torch.exp(-self.logs) * x_mask
            logdet = -torch.sum(self.logs.double()) * x_len
        else:
            if not self.is_initialized and self.training:
                self.initialize(x, x_mask)
            y = (self.bias + torch.exp(self.logs) * x) * x_mask
            logdet = torch.sum(self.logs.double()) * x_len
        return y, logdet

    @torch.no_grad()
    def initialize(self, x: torch.Tensor, x_mask: torch.Tensor) -> None:
        """Data-dependent init from the valid frames of ``x``."""
        x = x.double()
        x_mask = x_mask.double()
        denom = torch.sum(x_mask, [0, 2])
        mean = torch.sum(x * x_mask, [0, 2]) / denom
        mean_sq = torch.sum(x * x * x_mask, [0, 2]) / denom
        variance = torch.clamp_min(mean_sq - mean**2, 1e-6)
        logs = 0.5 * torch.log(variance)

        self.bias.data.copy_((-mean * torch.exp(-logs)).view_as(self.bias))
        self.logs.data.copy_((-logs).view_as(self.logs))
        self.mark_initialized()


class InvertibleLinear(nn.Module):
    """
    Per-frame channel mixing ``y_t = W x_t`` with ``W = P L U``.

    ``P`` is a fixed permutation, ``L`` unit lower-triangular and ``U`` upper
    triangular with its diagonal stored as ``sign_s * exp(log_s)``, so
    ``log|det W| = sum(log_s)`` and W is invertible by construction.
    """

    def __init__(self, channels: int, init: str = 'orthogonal', generator: torch.Generator | None = None):
        super().__init__()
        self.channels = channels
        self.lower = nn.Parameter(torch.zeros(channels, channels))
        self.upper = nn.Parameter(torch.zeros(channels, channels))
        self.log_s = nn.Parameter(torch.zeros(channels))
        self.register_buffer('permutation', torch.eye(channels))
        self.register_buffer('sign_s', torch.ones(channels))
        self.register_buffer('l_mask', torch.tril(torch.ones(channels, channels), -1), persistent=False)
        self.register_buffer('eye', torch.eye(channels), persistent=False)

        if init == 'orthogonal':
            weight = torch.linalg.qr(torch.randn(channels, channels, generator=generator))[0]
            self.load_matrix_(weight)
        elif init != 'identity':
            raise ValueError(f'unknown init {init!r}')

    @classmethod
    def from_matrix(cls, weight: torch.Tensor) -> 'InvertibleLinear':
        layer = cls(weight.size(0), init='identity')
        layer.load_matrix_(weight)
        return layer

    @torch.no_grad()
    def load_matrix_(self, weight: torch.Tensor) -> None:
        """Re-parameterize the layer from a dense invertible matrix."""
        p, lower, upper = torch.linalg.lu(weight.double())
        diagonal = torch.diagonal(upper)
        self.permutation.copy_(p)
        self.lower.data.copy_(torch.tril(lower, -1))
        self.upper.data.copy_(torch.triu(upper, 1))
        self.log_s.data.copy_(torch.log(torch.abs(diagonal)))
        self.sign_s.copy_(torch.sign(diagonal))

    def factors(self) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        lower = self.lower * self.l_mask + self.eye
        upper = self.upper * self.l_mask.t() + torch.diag(self.sign_s * torch.exp(self.log_s))
        return self.permutation, lower, upper

    def weight(self) -> torch.Tensor:
        p, lower, upper = self.factors()
        return p @ lower @ upper

    def forward(self, x, x_mask=None, g=None, reverse=False):
        if x_mask is None:
            x_mask = full_mask(x)
        x_len = torch.sum(x_mask, [1, 2]).double()
        b, c, t = x.size()

        if reverse:
            p, lower, upper = self.factors()
            rhs = p.t() @ x.transpose(0, 1).reshape(c, b * t)
            rhs = torch.linalg.solve_triangular(lower, rhs, upper=False, unitriangular=True)
            rhs = torch.linalg.solve_triangular(upper, rhs, upper=True)
            y = rhs.reshape(c, b, t).transpose(0, 1)
            logdet = -torch.sum(self.log_s.double()) * x_len
        else:
            y = torch.einsum('ij,bjt->bit', self.weight(), x)
            logdet = torch.sum(self.log_s.double()) * x_len
        return y * x_mask, logdet


class AffineCoupling(nn.Module):
    """
    Affine coupling: the second channel half is scaled and shifted by a
    function of the first half (and the speaker condition, if any).

    The conditioning network is two tanh convolutions over time followed by a
    zero-initialized 1x1 output layer, so a fresh layer is the identity. The
    log-scale is bounded as ``scale * tanh(raw)``.
    """

    def __init__(self, channels: int, hidden_channels: int, kernel_size: int = 3, gin_channels: int = 0):
        super().__init__()
        if channels % 2:
            raise ShapeMismatch(f'coupling needs an even channel count, got {channels}')
        self.channels = channels
        self.half = channels // 2
        self.gin_channels = gin_channels

        self.start = nn.Conv1d(self.half, hidden_channels, kernel_size, padding=kernel_size // 2)
        self.mid = nn.Conv1d(hidden_channels, hidden_channels, kernel_size, padding=kernel_size // 2)
        self.end = nn.Conv1d(hidden_channels, 2 * self.half, 1)
        self.end.weight.data.zero_()
        self.end.bias.data.zero_()
        self.cond = nn.Linear(gin_channels, hidden_channels) if gin_channels else None
        self.scale = nn.Parameter(torch.ones(1))

    @property
    def conditional(self) -> bool:
        return self.cond is not None

    def rig_constant(self, log_scale: float, shift: float = 0.0) -> None:
        """Make the network emit a constant log-scale and shift (test fixture aid)."""
        with torch.no_grad():
            self.end.weight.zero_()
            self.end.bias[: self.half].fill_(math.atanh(log_scale / float(self.scale)))
            self.end.bias[self.half :].fill_(shift)

    def coefficients(self, x_a, x_mask, g=None) -> tuple[torch.Tensor, torch.Tensor]:
        h = self.start(x_a * x_mask)
        if self.cond is not None:
            h = h + self.cond(g).unsqueeze(-1)
        h = torch.tanh(h) * x_mask
        h = torch.tanh(self.mid(h)) * x_mask
        out = self.end(h)
        logs = self.scale * torch.tanh(out[:, : self.half]) * x_mask
        shift = out[:, self.half :] * x_mask
        return logs, shift

    def forward(self, x, x_mask=None, g=None, reverse=False):
        check_condition(g, self.conditional)
        if x_mask is None:
            x_mask = full_mask(x)
        x_a, x_b = x[:, : self.half], x[:, self.half :]
        logs, shift = self.coefficients(x_a, x_mask, g)

        if reverse:
            y_b = (x_b - shift) * torch.exp(-logs) * x_mask
            logdet = -torch.sum(logs.double(), [1, 2])
        else:
            y_b = (x_b * torch.exp(logs) + shift) * x_mask
            logdet = torch.sum(logs.double(), [1, 2])
        return torch.cat([x_a * x_mask, y_b], 1), logdet
