"""
Repository for model checkpoints.

A checkpoint is a GVCK container whose header carries the model
hyperparameters (and so the variant and partition) and whose tensors are the
model state under ``model.`` plus, optionally, the optimizer moments under
``optimizer.<parameter>.<moment>``.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from config.exceptions import ShapeMismatch
from storage.container import TensorContainer
from storage.exceptions import CorruptIndex

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = 'checkpoint'
MODEL_PREFIX = 'model.'
OPTIMIZER_PREFIX = 'optimizer.'


def stored_array(tensor: torch.Tensor) -> np.ndarray:
    """float64 tensors keep their precision; everything else is stored as float32."""
    tensor = tensor.detach().cpu()
    if tensor.dtype != torch.float64:
        tensor = tensor.to(torch.float32)
    return tensor.numpy()


@dataclass
class Checkpoint:
    """
    A loaded checkpoint.

    Attributes:
        model: Rebuilt model in evaluation mode
        optimizer_state: Parameter name to moment tensors, with the step
            counter under ``step``; None when no optimizer was saved
        meta: Extra header fields (training step, preset, ...)
    """

    model: torch.nn.Module
    optimizer_state: dict[str, dict[str, torch.Tensor]] | None = None
    optimizer_step: int = 0
    meta: dict = field(default_factory=dict)


class CheckpointRepository:
    """Save and load models with their optimizer state."""

    @staticmethod
    def to_container(model, optimizer: torch.optim.Optimizer | None = None, extra: dict | None = None) -> TensorContainer:
        tensors = {}
        for name, value in model.state_dict().items():
            tensors[MODEL_PREFIX + name] = stored_array(value)

        meta = {
            'kind': CHECKPOINT_KIND,
            'model': model.config.to_dict(),
            'extra': extra or {},
        }
        if optimizer is not None:
            step = 0
            names = {id(p): name for name, p in model.named_parameters()}
            for group in optimizer.param_groups:
                for parameter in group['params']:
                    state = optimizer.state.get(parameter)
                    if not state:
                        continue
                    step = int(state['step'])
                    for moment in ('exp_avg', 'exp_inf'):
                        key = f'{OPTIMIZER_PREFIX}{names[id(parameter)]}.{moment}'
                        tensors[key] = stored_array(state[moment])
            meta['optimizer'] = {
                'step': step,
                'lr': [float(group['lr']) for group in optimizer.param_groups],
            }
        return TensorContainer(meta=meta, tensors=tensors)

    @classmethod
    def save(cls, model, path: str | Path, optimizer: torch.optim.Optimizer | None = None, extra: dict | None = None) -> Path:
        """
        Write a checkpoint.

        Args:
            model: A ``GlowVCModel``
            path: Destination file
            optimizer: Optional optimizer whose moments are saved too
            extra: Additional JSON-serializable header fields

        Returns:
            The written path
        """
        path = cls.to_container(model, optimizer, extra).write(path)
        logger.info('Saved checkpoint %s', path)
        return path

    @staticmethod
    def from_container(container: TensorContainer) -> Checkpoint:
        """
        Rebuild the model from a parsed container.

        Raises:
            CorruptIndex: The container is not a checkpoint
            ShapeMismatch: Stored tensors do not fit the declared model
        """
        from config.run_config import ModelConfig
        from modeling.glow_vc import GlowVCModel

        meta = container.meta
        if meta.get('kind') != CHECKPOINT_KIND or 'model' not in meta:
            raise CorruptIndex('container is not a checkpoint')
        model = GlowVCModel(ModelConfig.from_dict(meta['model']))

        stored = {
            name[len(MODEL_PREFIX) :]: array
            for name, array in container.tensors.items()
            if name.startswith(MODEL_PREFIX)
        }
        if any(array.dtype == np.float64 for array in stored.values()):
            model.to(torch.float64)
        expected = model.state_dict()
        missing = sorted(set(expected) - set(stored))
        unexpected = sorted(set(stored) - set(expected))
        if missing or unexpected:
            raise ShapeMismatch(f'checkpoint tensors differ: missing {missing}, unexpected {unexpected}')

        state = {}
        for name, target in expected.items():
            array = stored[name]
            if tuple(array.shape) != tuple(target.shape):
                raise ShapeMismatch(f'{name}: stored {array.shape}, model expects {tuple(target.shape)}')
            tensor = torch.from_numpy(np.array(array))
            state[name] = tensor.to(target.dtype)
        model.load_state_dict(state)
        model.eval()

        optimizer_state = None
        optimizer_step = 0
        if 'optimizer' in meta:
            optimizer_step = int(meta['optimizer']['step'])
            optimizer_state = {}
            for name, array in container.tensors.items():
                if not name.startswith(OPTIMIZER_PREFIX):
                    continue
                parameter, moment = name[len(OPTIMIZER_PREFIX) :].rsplit('.', 1)
                optimizer_state.setdefault(parameter, {})[moment] = torch.from_numpy(np.array(array))
        return Checkpoint(
            model=model,
            optimizer_state=optimizer_state,
            optimizer_step=optimizer_step,
            meta=meta.get('extra', {}),
        )

    @classmethod
    def load(cls, path: str | Path) -> Checkpoint:
        """Read a checkpoint written by ``save``."""
        return cls.from_container(TensorContainer.read(path))

    @staticmethod
    def restore_optimizer(checkpoint: Checkpoint, optimizer: torch.optim.Optimizer) -> None:
        """Copy saved moments into an optimizer built over ``checkpoint.model``."""
        if checkpoint.optimizer_state is None:
            return
        parameters = dict(checkpoint.model.named_parameters())
        for name, moments in checkpoint.optimizer_state.items():
            parameter = parameters[name]
            optimizer.state[parameter] = {
                'step': checkpoint.optimizer_step,
                'exp_avg': moments['exp_avg'].to(parameter.dtype),
                'exp_inf': moments['exp_inf'].to(parameter.dtype),
            }
