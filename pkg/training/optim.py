"""Adamax with a linear warm-up."""

from dataclasses import dataclass, field

import torch
from torch.optim.lr_scheduler import LambdaLR

from config.run_config import TrainConfig


def adamax_update_(
    param: torch.Tensor,
    grad: torch.Tensor,
    exp_avg: torch.Tensor,
    exp_inf: torch.Tensor,
    step: int,
    lr: float,
    beta1: float,
    beta2: float,
    eps: float,
) -> None:
    """In-place Adamax update of one tensor; ``step`` counts from 1."""
    exp_avg.mul_(beta1).add_(grad, alpha=1 - beta1)
    torch.maximum(exp_inf * beta2, grad.abs(), out=exp_inf)
    param.addcdiv_(exp_avg, exp_inf + eps, value=-lr / (1 - beta1**step))


class Adamax(torch.optim.Optimizer):
    """
    Adamax: first moment ``m`` and exponentially weighted infinity norm ``u``.

    ``u <- max(beta2 * u, |g|)``; the step is ``lr / (1 - beta1^t) * m / (u + eps)``.
    """

    def __init__(self, params, lr: float = 1e-4, betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8):
        if lr < 0.0:
            raise ValueError(f'invalid learning rate: {lr}')
        if eps < 0.0:
            raise ValueError(f'invalid epsilon: {eps}')
        if not 0.0 <= betas[0] < 1.0 or not 0.0 <= betas[1] < 1.0:
            raise ValueError(f'invalid betas: {betas}')
        super().__init__(params, dict(lr=lr, betas=betas, eps=eps))

    @torch.no_grad()
    def step(self, closure=None):
        loss = None
        if closure is not None:
            with torch.enable_grad():
                loss = closure()

        for group in self.param_groups:
            beta1, beta2 = group['betas']
            for p in group['params']:
                if p.grad is None:
                    continue
                state = self.state[p]
                if not state:
                    state['step'] = 0
                    state['exp_avg'] = torch.zeros_like(p)
                    state['exp_inf'] = torch.zeros_like(p)
                state['step'] += 1
                adamax_update_(
                    p, p.grad, state['exp_avg'], state['exp_inf'],
                    state['step'], group['lr'], beta1, beta2, group['eps'],
                )
        return loss


@dataclass
class OptimizerState:
    """Per-parameter Adamax moments and the shared step counter."""

    m: list[torch.Tensor] = field(default_factory=list)
    u: list[torch.Tensor] = field(default_factory=list)
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, params: list[torch.Tensor], **constants) -> 'OptimizerState':
        return cls(
            m=[torch.zeros_like(p) for p in params],
            u=[torch.zeros_like(p) for p in params],
            **constants,
        )


def adamax_step(
    params: list[torch.Tensor], grads: list[torch.Tensor], state: OptimizerState, lr_t: float
) -> tuple[list[torch.Tensor], OptimizerState]:
    """Pure Adamax step; inputs are left untouched."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError('params, grads and state must have the same length')
    t = state.t + 1
    new_params, new_m, new_u = [], [], []
    for p, g, m, u in zip(params, grads, state.m, state.u):
        p, m, u = p.detach().clone(), m.clone(), u.clone()
        adamax_update_(p, g, m, u, t, lr_t, state.beta1, state.beta2, state.eps)
        new_params.append(p)
        new_m.append(m)
        new_u.append(u)
    return new_params, OptimizerState(new_m, new_u, t, state.beta1, state.beta2, state.eps)


def lr_schedule(step: int, steps_per_epoch: int, cfg: TrainConfig) -> float:
    """Linear warm-up over ``warmup_epochs`` epochs, constant afterwards; ``step`` counts from 1."""
    if step < 1:
        raise ValueError('step counts from 1')
    warmup_steps = cfg.warmup_epochs * steps_per_epoch
    return cfg.learning_rate * min(1.0, step / warmup_steps)


def build_optimizer(model: torch.nn.Module, cfg: TrainConfig, steps_per_epoch: int) -> tuple[Adamax, LambdaLR]:
    """Adamax over the trainable parameters with its warm-up scheduler."""
    optimizer = Adamax(
        [p for p in model.parameters() if p.requires_grad],
        lr=cfg.learning_rate,
        betas=(cfg.beta1, cfg.beta2),
        eps=cfg.eps,
    )
    warmup_steps = cfg.warmup_epochs * steps_per_epoch
    # LambdaLR counts from 0 while the schedule counts from 1.
    scheduler = LambdaLR(optimizer, lambda k: min(1.0, (k + 1) / warmup_steps))
    return optimizer, scheduler
