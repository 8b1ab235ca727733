"""
Training loop: seeded shuffling, actnorm data init on the first batch,
clipped Adamax steps with warm-up, an NDJSON metrics log and periodic
checkpoints.
"""

import json
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path

import pandas as pd
import torch

from config.run_config import ModelConfig, TrainConfig
from modeling.bundles import Batch
from modeling.glow_vc import GlowVCModel
from storage.repositories import CheckpointRepository
from synthlab.metrics import bits_per_dim
from training.datasets import UtteranceDataset, make_loader
from training.gradients import clip_gradients, compute_gradients, dropout_seed, seeded_loss
from training.optim import build_optimizer

logger = logging.getLogger(__name__)


@dataclass
class TrainingSummary:
    """
    Attributes:
        steps: Optimizer steps taken
        final_nll: Mean nll of the last step
        final_bits_per_dim: Bits per dim of the last step
        smoothed_nll: Rolling mean nll at the last step
        smoothed_monotone: Whether the rolling mean never increased
        checkpoint: Final checkpoint path
        metrics_log: NDJSON metrics path
    """

    steps: int
    final_nll: float
    final_bits_per_dim: float
    smoothed_nll: float
    smoothed_monotone: bool
    checkpoint: Path
    metrics_log: Path


def batch_bits_per_dim(nll: torch.Tensor, batch: Batch, n_channels: int) -> float:
    return bits_per_dim(float(nll.sum()), int(batch.frame_lengths.sum()), n_channels)


def smoothed_curve(metrics_log: str | Path, window: int = 50) -> pd.Series:
    """Rolling mean of the logged nll, indexed by step."""
    frame = pd.read_json(metrics_log, lines=True)
    return frame.set_index('step')['nll'].rolling(window, min_periods=window).mean().dropna()


def is_non_increasing(curve: pd.Series, tolerance: float = 0.0) -> bool:
    return bool((curve.diff().dropna() <= tolerance).all())


class Trainer:
    """
    Owns a model, its optimizer and the data loader for one run.

    Attributes:
        model: The model being trained
        config: Optimization settings
        out_path: Final checkpoint path; periodic ones go next to it
        metrics_path: NDJSON metrics log
    """

    def __init__(
        self,
        model: GlowVCModel,
        config: TrainConfig,
        dataset: UtteranceDataset,
        out_path: str | Path,
        metrics_path: str | Path | None = None,
        extra_meta: dict | None = None,
    ):
        if len(dataset) == 0:
            raise ValueError('cannot train on an empty dataset')
        self.config = config
        self.dtype = torch.float64 if config.precision == 'float64' else torch.float32
        self.model = model.to(self.dtype)
        self.loader = make_loader(dataset, config.batch_size, config.seed)
        self.steps_per_epoch = len(self.loader)
        self.optimizer, self.scheduler = build_optimizer(self.model, config, self.steps_per_epoch)
        self.out_path = Path(out_path)
        self.metrics_path = Path(metrics_path) if metrics_path else self.out_path.with_suffix('.metrics.ndjson')
        self.extra_meta = extra_meta or {}
        self.step = 0

    def periodic_path(self, step: int) -> Path:
        return self.out_path.with_name(f'{self.out_path.stem}.step{step:06d}{self.out_path.suffix}')

    @torch.no_grad()
    def initialize(self, batch: Batch) -> None:
        """Data-dependent actnorm init from one batch."""
        self.model.train()
        seeded_loss(self.model, batch.to(self.dtype), dropout_seed(self.config.seed, 0))
        logger.debug('Initialized %d actnorm layers', len(self.model.decoder.actnorm_layers()))

    def train_step(self, batch: Batch) -> dict:
        """One clipped Adamax step; returns the metrics record."""
        self.step += 1
        started = time.time()
        self.model.train()
        result = compute_gradients(self.model, batch.to(self.dtype), self.step, self.config.seed)
        clip_gradients(self.model, self.config.clip_grad_norm)
        lr = self.optimizer.param_groups[0]['lr']
        self.optimizer.step()
        self.scheduler.step()
        return {
            'step': self.step,
            'nll': result.loss,
            'bits_per_dim': batch_bits_per_dim(result.nll, batch, self.model.n_channels),
            'lr': lr,
            'wall_ms': round((time.time() - started) * 1000.0, 3),
        }

    def save(self, path: Path) -> Path:
        return CheckpointRepository.save(
            self.model, path, optimizer=self.optimizer, extra={'step': self.step, **self.extra_meta}
        )

    def run(self) -> TrainingSummary:
        """
        Train for ``max_steps`` steps.

        Raises:
            NonFiniteLoss: With the offending step; the metrics logged so far are kept
        """
        cfg = self.config
        interval = cfg.resolved_checkpoint_interval
        self.metrics_path.parent.mkdir(parents=True, exist_ok=True)
        initialized = False
        record = None

        with self.metrics_path.open('w') as log:
            while self.step < cfg.max_steps:
                for batch in self.loader:
                    if not initialized:
                        self.initialize(batch)
                        initialized = True
                    record = self.train_step(batch)
                    log.write(json.dumps(record, sort_keys=True) + '\n')
                    if self.step % cfg.resolved_log_interval == 0:
                        logger.info(
                            'step %d nll %.4f bits/dim %.4f lr %.2e',
                            self.step, record['nll'], record['bits_per_dim'], record['lr'],
                        )
                    if self.step % interval == 0 and self.step < cfg.max_steps:
                        self.save(self.periodic_path(self.step))
                    if self.step >= cfg.max_steps:
                        break

        checkpoint = self.save(self.out_path)
        curve = smoothed_curve(self.metrics_path, cfg.smoothing_window)
        monotone = is_non_increasing(curve)
        if not monotone:
            logger.warning('Smoothed nll (window %d) increased during training', cfg.smoothing_window)
        return TrainingSummary(
            steps=self.step,
            final_nll=record['nll'],
            final_bits_per_dim=record['bits_per_dim'],
            smoothed_nll=float(curve.iloc[-1]) if len(curve) else math.nan,
            smoothed_monotone=monotone,
            checkpoint=checkpoint,
            metrics_log=self.metrics_path,
        )


def train(
    dataset: UtteranceDataset,
    model_config: ModelConfig,
    train_config: TrainConfig,
    out_path: str | Path,
    metrics_path: str | Path | None = None,
    extra_meta: dict | None = None,
) -> TrainingSummary:
    """Build a model from seed and train it on ``dataset``."""
    torch.manual_seed(train_config.seed)
    model = GlowVCModel(model_config)
    logger.info(
        'Training %s model (%d parameters) for %d steps',
        model_config.variant, model.n_parameters(), train_config.max_steps,
    )
    return Trainer(model, train_config, dataset, out_path, metrics_path, extra_meta).run()
