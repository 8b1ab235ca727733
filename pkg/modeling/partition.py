"""Channel partition of the latent into content, speaker and pitch blocks."""

from dataclasses import dataclass

import torch

from modeling.exceptions import BadLayout

CONDITIONAL = 'conditional'
EXPLICIT = 'explicit'
VARIANTS = (CONDITIONAL, EXPLICIT)


def default_widths(variant: str, n_channels: int = 80) -> tuple[int, ...]:
    """(79, 1) and (40, 39, 1) at 80 channels, scaled down for toy models."""
    if variant == CONDITIONAL:
        return (n_channels - 1, 1)
    if variant == EXPLICIT:
        content = n_channels // 2
        return (content, n_channels - content - 1, 1)
    raise BadLayout(f'unknown variant {variant!r}')


@dataclass(frozen=True)
class LatentPartition:
    """
    Contiguous channel blocks of the latent, content first and pitch last.

    Attributes:
        variant: ``conditional`` (content, pitch) or ``explicit``
            (content, speaker, pitch)
        widths: Block widths in that order
        n_channels: Latent width the blocks must add up to
    """

    variant: str
    widths: tuple[int, ...]
    n_channels: int = 80

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise BadLayout(f'unknown variant {self.variant!r}')
        widths = tuple(int(w) for w in self.widths)
        object.__setattr__(self, 'widths', widths)
        expected = 2 if self.variant == CONDITIONAL else 3
        if len(widths) != expected:
            raise BadLayout(f'{self.variant} layout needs {expected} blocks, got {len(widths)}')
        if any(w < 1 for w in widths):
            raise BadLayout(f'block widths must be positive, got {widths}')
        if sum(widths) != self.n_channels:
            raise BadLayout(f'widths {widths} sum to {sum(widths)}, expected {self.n_channels}')

    @classmethod
    def default(cls, variant: str, n_channels: int = 80) -> 'LatentPartition':
        return cls(variant, default_widths(variant, n_channels), n_channels)

    @property
    def names(self) -> tuple[str, ...]:
        if self.variant == CONDITIONAL:
            return ('content', 'pitch')
        return ('content', 'speaker', 'pitch')

    @property
    def content_width(self) -> int:
        return self.widths[0]

    @property
    def speaker_width(self) -> int:
        if self.variant != EXPLICIT:
            return 0
        return self.widths[1]

    def slices(self) -> dict[str, slice]:
        out, start = {}, 0
        for name, width in zip(self.names, self.widths):
            out[name] = slice(start, start + width)
            start += width
        return out


def partition_latent(z: torch.Tensor, partition: LatentPartition) -> dict[str, torch.Tensor]:
    """
    Split a latent [B, C, T] along channels into named blocks.

    Raises:
        BadLayout: The partition does not cover exactly C channels
    """
    if z.size(1) != partition.n_channels:
        raise BadLayout(f'latent has {z.size(1)} channels, partition covers {partition.n_channels}')
    return {name: z[:, block] for name, block in partition.slices().items()}


def merge_blocks(blocks: dict[str, torch.Tensor], partition: LatentPartition) -> torch.Tensor:
    """Concatenate named blocks back into the latent, in partition order."""
    return torch.cat([blocks[name] for name in partition.names], dim=1)
