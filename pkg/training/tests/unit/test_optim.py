"""
Unit tests for Adamax and the warm-up schedule.
"""
import pytest
import torch

from config.run_config import TrainConfig
from training.optim import Adamax, OptimizerState, adamax_step, build_optimizer, lr_schedule


@pytest.mark.unit
class TestAdamaxStep:
    """Test suite for the pure adamax_step."""

    def test_first_step_moves_by_lr(self):
        """With g = 1 on a fresh state the parameter drops by lr."""
        params = [torch.tensor([2.0], dtype=torch.float64)]
        state = OptimizerState.fresh(params)
        new_params, new_state = adamax_step(params, [torch.tensor([1.0], dtype=torch.float64)], state, 0.01)

        assert new_state.t == 1
        assert new_state.m[0].item() == pytest.approx(0.1)
        assert new_state.u[0].item() == 1.0
        assert new_params[0].item() == pytest.approx(2.0 - 0.01, abs=1e-9)
        assert params[0].item() == 2.0

    def test_zero_gradient_keeps_parameters(self):
        params = [torch.randn(3, 2)]
        state = OptimizerState.fresh(params)
        new_params, _ = adamax_step(params, [torch.zeros(3, 2)], state, 0.1)
        assert torch.equal(new_params[0], params[0])

    def test_infinity_norm_holds_on_repeat(self):
        """Two identical gradients leave u at |g|."""
        params = [torch.zeros(4)]
        grad = torch.tensor([0.5, -2.0, 1.0, -0.1])
        state = OptimizerState.fresh(params)
        params, state = adamax_step(params, [grad], state, 1e-3)
        params, state = adamax_step(params, [grad], state, 1e-3)
        assert torch.equal(state.u[0], grad.abs())
        assert state.t == 2

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            adamax_step([torch.zeros(1)], [], OptimizerState.fresh([torch.zeros(1)]), 0.1)


@pytest.mark.unit
class TestAdamaxOptimizer:
    """Test suite for the Adamax optimizer class."""

    def test_matches_pure_step(self):
        """The optimizer and the pure function produce identical trajectories."""
        weight = torch.nn.Parameter(torch.randn(5))
        start = weight.detach().clone()
        optimizer = Adamax([weight], lr=0.05)
        params, state = [start], OptimizerState.fresh([start])
        for _ in range(3):
            grad = torch.randn(5)
            weight.grad = grad.clone()
            optimizer.step()
            params, state = adamax_step(params, [grad], state, 0.05)
        torch.testing.assert_close(weight.detach(), params[0], rtol=0, atol=1e-7)
        torch.testing.assert_close(optimizer.state[weight]['exp_inf'], state.u[0])

    def test_skips_parameters_without_gradient(self):
        weight = torch.nn.Parameter(torch.ones(2))
        Adamax([weight], lr=1.0).step()
        assert torch.equal(weight.detach(), torch.ones(2))

    @pytest.mark.parametrize('kwargs', [{'lr': -1.0}, {'eps': -1.0}, {'betas': (1.0, 0.9)}])
    def test_invalid_hyperparameters(self, kwargs):
        with pytest.raises(ValueError):
            Adamax([torch.nn.Parameter(torch.ones(1))], **kwargs)


@pytest.mark.unit
class TestLrSchedule:
    """Test suite for the linear warm-up."""

    @pytest.fixture
    def cfg(self):
        return TrainConfig(learning_rate=1e-3, warmup_epochs=5)

    def test_boundary(self, cfg):
        assert lr_schedule(50, 10, cfg) == 1e-3

    def test_half_way(self, cfg):
        assert lr_schedule(25, 10, cfg) == pytest.approx(5e-4)

    def test_after_warmup(self, cfg):
        assert lr_schedule(10_000, 10, cfg) == 1e-3

    def test_step_counts_from_one(self, cfg):
        with pytest.raises(ValueError):
            lr_schedule(0, 10, cfg)

    def test_scheduler_follows_schedule(self, cfg):
        """The learning rate used at step k is lr_schedule(k)."""
        model = torch.nn.Linear(2, 1)
        optimizer, scheduler = build_optimizer(model, cfg, steps_per_epoch=4)
        for step in range(1, 30):
            assert optimizer.param_groups[0]['lr'] == pytest.approx(lr_schedule(step, 4, cfg))
            optimizer.step()
            scheduler.step()
