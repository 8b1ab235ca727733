"""Loss gradients, clipping and the finite-difference gradient check."""

import copy
import logging
from dataclasses import dataclass, field

import torch

from modeling.bundles import Batch
from training.exceptions import NonFiniteLoss

logger = logging.getLogger(__name__)


def dropout_seed(seed: int, step: int) -> int:
    return (seed * 1_000_003 + step) % (2**63 - 1)


def seeded_loss(model, batch: Batch, seed: int) -> tuple[torch.Tensor, torch.Tensor]:
    """Batch-mean nll and per-item nll with dropout drawn from ``seed``."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        nll = model.nll(batch)
    return nll.mean(), nll


@dataclass
class GradientResult:
    loss: float
    nll: torch.Tensor
    grads: dict[str, torch.Tensor] = field(default_factory=dict)


def compute_gradients(model, batch: Batch, step: int = 0, seed: int = 0) -> GradientResult:
    """
    Reverse-mode gradients of the batch-mean nll, left in ``.grad``.

    Raises:
        NonFiniteLoss: The loss or any gradient is NaN or infinite
    """
    model.zero_grad(set_to_none=True)
    loss, nll = seeded_loss(model, batch, dropout_seed(seed, step))
    if not torch.isfinite(loss):
        raise NonFiniteLoss(step)
    loss.backward()
    grads = {}
    for name, parameter in model.named_parameters():
        if parameter.grad is None:
            grads[name] = torch.zeros_like(parameter)
            continue
        if not torch.all(torch.isfinite(parameter.grad)):
            raise NonFiniteLoss(step, f'non-finite gradient for {name} at step {step}')
        grads[name] = parameter.grad
    return GradientResult(loss=float(loss.detach()), nll=nll.detach(), grads=grads)


def clip_gradients(model, max_norm: float) -> float:
    """Rescale gradients to a global norm of at most ``max_norm``; 0 disables."""
    parameters = [p for p in model.parameters() if p.grad is not None]
    if not parameters:
        return 0.0
    if max_norm <= 0:
        return float(torch.linalg.vector_norm(torch.stack([p.grad.norm() for p in parameters])))
    return float(torch.nn.utils.clip_grad_norm_(parameters, max_norm))


@dataclass
class GradCheckReport:
    """
    Outcome of a finite-difference gradient check.

    Attributes:
        max_rel_error: Largest relative error over the compared entries
        n_checked: Entries compared
        n_refined: Entries that only agreed at the finer step
        n_skipped: Entries left uncompared because the loss has a kink there
        max_skipped: Kink entries tolerated before the check fails
        worst: Name and flat index of the worst entry
        failures: Entries outside tolerance
    """

    max_rel_error: float = 0.0
    n_checked: int = 0
    n_refined: int = 0
    n_skipped: int = 0
    max_skipped: int = 0
    worst: tuple[str, int] | None = None
    failures: list[tuple[str, int, float, float]] = field(default_factory=list)
    rtol: float = 1e-3

    @property
    def passed(self) -> bool:
        return not self.failures and self.n_skipped <= self.max_skipped and self.max_rel_error < self.rtol


def entry_error(analytic: float, numeric: float, atol: float, small: float) -> float:
    """Relative error, or 0 when both magnitudes are tiny and agree within ``atol``."""
    magnitude = max(abs(analytic), abs(numeric))
    difference = abs(analytic - numeric)
    if magnitude < small:
        return 0.0 if difference <= atol else difference / max(magnitude, atol)
    return difference / magnitude


@torch.no_grad()
def _loss_at(model, batch: Batch, seed: int) -> float:
    return float(seeded_loss(model, batch, seed)[0])


def _shifted_losses(model, batch: Batch, seed: int, flat: torch.Tensor, index: int, step: float) -> tuple[float, float]:
    original = flat[index].item()
    flat[index] = original + step
    plus = _loss_at(model, batch, seed)
    flat[index] = original - step
    minus = _loss_at(model, batch, seed)
    flat[index] = original
    return plus, minus


def gradient_check(
    model,
    batch: Batch,
    step: int = 0,
    eps: float = 1e-3,
    rtol: float = 1e-3,
    atol: float = 1e-6,
    small: float = 1e-4,
    seed: int = 0,
    max_skipped: int = 0,
) -> GradCheckReport:
    """
    Compare reverse-mode gradients with central differences in double precision.

    The model is copied, cast to float64 and put in evaluation mode. Where
    the analytic and numeric values disagree and the one-sided differences
    disagree with each other too, a ReLU switches inside the step; the entry
    is compared again with a step ``eps / 100``. Entries that still disagree
    there are counted in ``n_skipped`` and fail the check unless
    ``max_skipped`` allows them.
    """
    model = copy.deepcopy(model).double().eval()
    batch = batch.to(torch.float64)
    grads = compute_gradients(model, batch, step, seed).grads
    seed = dropout_seed(seed, step)
    base = _loss_at(model, batch, seed)

    report = GradCheckReport(rtol=rtol, max_skipped=max_skipped)
    for name, parameter in model.named_parameters():
        analytic = grads[name].reshape(-1)
        flat = parameter.data.view(-1)
        for index in range(flat.numel()):
            expected = float(analytic[index])
            plus, minus = _shifted_losses(model, batch, seed, flat, index, eps)
            numeric = (plus - minus) / (2 * eps)
            error = entry_error(expected, numeric, atol, small)
            if error >= rtol:
                forward = (plus - base) / eps
                backward = (base - minus) / eps
                kink = abs(forward - backward) > 10 * rtol * max(abs(forward), abs(backward), small)
                if not kink:
                    report.failures.append((name, index, expected, numeric))
                else:
                    fine_plus, fine_minus = _shifted_losses(model, batch, seed, flat, index, eps / 100)
                    numeric = (fine_plus - fine_minus) / (2 * eps / 100)
                    error = entry_error(expected, numeric, atol, small)
                    if error >= rtol:
                        report.n_skipped += 1
                        continue
                    report.n_refined += 1
            report.n_checked += 1
            if error > report.max_rel_error or report.worst is None:
                report.max_rel_error = max(report.max_rel_error, error)
                report.worst = (name, index)
    logger.info(
        'Gradient check: %d entries, %d refined, %d at unresolved kinks, max relative error %.3e',
        report.n_checked, report.n_refined, report.n_skipped, report.max_rel_error,
    )
    return report
