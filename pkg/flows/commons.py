"""Shape helpers shared by the flow layers and the model."""

import torch

from flows.exceptions import ConditionMissing, ConditionUnexpected


def sequence_mask(lengths: torch.Tensor, max_length: int | None = None) -> torch.Tensor:
    """Boolean mask [B, max_length], True on the first ``lengths[b]`` frames."""
    if max_length is None:
        max_length = int(lengths.max())
    positions = torch.arange(max_length, dtype=lengths.dtype, device=lengths.device)
    return positions.unsqueeze(0) < lengths.unsqueeze(1)


def full_mask(x: torch.Tensor) -> torch.Tensor:
    """All-valid frame mask [B, 1, T] matching ``x``."""
    return torch.ones(x.size(0), 1, x.size(2), dtype=x.dtype, device=x.device)


def squeeze(
    x: torch.Tensor, x_mask: torch.Tensor | None = None, n_sqz: int = 2
) -> tuple[torch.Tensor, torch.Tensor]:
    """
    Group ``n_sqz`` adjacent frames into one frame with ``n_sqz`` times the channels.

    Trailing frames beyond the last full group are dropped; the caller keeps
    them if they matter. Channels ``k*C:(k+1)*C`` of an output frame hold the
    k-th input frame of the group.
    """
    b, c, t = x.size()
    t = (t // n_sqz) * n_sqz
    x = x[:, :, :t]
    x_sqz = x.view(b, c, t // n_sqz, n_sqz)
    x_sqz = x_sqz.permute(0, 3, 1, 2).contiguous().view(b, c * n_sqz, t // n_sqz)

    if x_mask is not None:
        x_mask = x_mask[:, :, n_sqz - 1 : t : n_sqz]
    else:
        x_mask = torch.ones(b, 1, t // n_sqz, dtype=x.dtype, device=x.device)
    return x_sqz * x_mask, x_mask


def unsqueeze(
    x: torch.Tensor, x_mask: torch.Tensor | None = None, n_sqz: int = 2
) -> tuple[torch.Tensor, torch.Tensor]:
    """Exact inverse of ``squeeze`` on the retained frames."""
    b, c, t = x.size()
    x_unsqz = x.view(b, n_sqz, c // n_sqz, t)
    x_unsqz = x_unsqz.permute(0, 2, 3, 1).contiguous().view(b, c // n_sqz, t * n_sqz)

    if x_mask is not None:
        x_mask = x_mask.unsqueeze(-1).repeat(1, 1, 1, n_sqz).view(b, 1, t * n_sqz)
    else:
        x_mask = torch.ones(b, 1, t * n_sqz, dtype=x.dtype, device=x.device)
    return x_unsqz * x_mask, x_mask


def check_condition(g: torch.Tensor | None, conditional: bool) -> None:
    if conditional and g is None:
        raise ConditionMissing('this flow is speaker-conditioned; pass a condition')
    if not conditional and g is not None:
        raise ConditionUnexpected('this flow is unconditioned; no condition accepted')


@torch.no_grad()
def perturb_parameters(module: torch.nn.Module, scale: float = 0.1, seed: int = 0) -> torch.nn.Module:
    """
    Add seeded Gaussian noise to every parameter and mark actnorms initialized.

    Moves a freshly built (identity-like) flow to a generic invertible point,
    which is what round-trip and Jacobian checks need.
    """
    from flows.layers import ActNorm

    generator = torch.Generator().manual_seed(seed)
    for parameter in module.parameters():
        noise = torch.randn(parameter.shape, generator=generator, dtype=torch.float64)
        parameter.add_((noise * scale).to(parameter.dtype))
    for layer in module.modules():
        if isinstance(layer, ActNorm):
            layer.mark_initialized()
    return module
