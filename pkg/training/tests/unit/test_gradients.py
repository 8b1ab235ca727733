"""
Unit tests for loss gradients, clipping and the finite-difference check.
"""
import dataclasses

import pytest
import torch

from config.exceptions import ShapeMismatch
from flows.commons import perturb_parameters
from modeling.glow_vc import GlowVCModel
from training.datasets import UtteranceDataset, collate
from training.exceptions import NonFiniteLoss
from training.gradients import (
    GradCheckReport,
    clip_gradients,
    compute_gradients,
    dropout_seed,
    entry_error,
    gradient_check,
    seeded_loss,
)


@pytest.fixture
def tiny_batch(tiny_corpus, tiny_config):
    dataset = UtteranceDataset.from_corpus(tiny_corpus, 'train')
    return collate([dataset[i] for i in range(tiny_config.train.batch_size)])


@pytest.mark.unit
class TestComputeGradients:
    """Test suite for compute_gradients."""

    def test_unused_speaker_rows_get_zero(self, make_model, small_batch):
        """Speakers absent from the batch receive an exactly zero gradient."""
        model = make_model('explicit')
        grads = compute_gradients(model, small_batch).grads
        table = grads['speaker_table.weight']
        present = set(small_batch.speaker_ids.tolist())
        for speaker in range(3):
            if speaker not in present:
                assert torch.all(table[speaker] == 0)
        assert any(torch.any(table[s] != 0) for s in present)

    def test_padding_has_no_influence(self, make_model, small_batch):
        """Mel values beyond an utterance's end do not affect the loss."""
        model = make_model('conditional').eval()
        mel = small_batch.mel.clone().requires_grad_(True)
        model.loss(dataclasses.replace(small_batch, mel=mel)).backward()
        padding = small_batch.mask.expand_as(mel) == 0
        assert padding.any()
        assert torch.all(mel.grad[padding] == 0)

    def test_duplicated_batch_has_same_mean_gradient(self, make_model, small_batch):
        model = make_model('explicit').double().eval()
        batch = small_batch.to(torch.float64)
        single = {k: v.clone() for k, v in compute_gradients(model, batch).grads.items()}
        doubled = compute_gradients(model, batch.repeat(2)).grads
        for name, grad in single.items():
            torch.testing.assert_close(doubled[name], grad, rtol=0, atol=1e-6)

    def test_seeded_dropout_is_repeatable(self, make_model, small_batch):
        """Training-mode losses agree for the same seed and step."""
        model = make_model().train()
        model.loss(small_batch)
        first = compute_gradients(model, small_batch, step=3, seed=1).loss
        second = compute_gradients(model, small_batch, step=3, seed=1).loss
        other = compute_gradients(model, small_batch, step=4, seed=1).loss
        assert first == second
        assert first != other

    def test_seeding_leaves_global_stream(self, make_model, small_batch):
        model = make_model().train()
        torch.manual_seed(5)
        seeded_loss(model, small_batch, 99)
        after = torch.rand(1)
        torch.manual_seed(5)
        assert torch.equal(after, torch.rand(1))

    def test_non_finite_loss(self, make_model, small_batch):
        batch = dataclasses.replace(small_batch, mel=torch.full_like(small_batch.mel, float('nan')))
        with pytest.raises(NonFiniteLoss) as excinfo:
            compute_gradients(make_model(), batch, step=7)
        assert excinfo.value.step == 7

    def test_shape_errors_propagate(self, make_model, small_batch):
        with pytest.raises(ShapeMismatch):
            compute_gradients(make_model(), dataclasses.replace(small_batch, mel=None))

    def test_dropout_seed_formula(self):
        assert dropout_seed(0, 5) == 5
        assert dropout_seed(2, 1) == 2_000_007


@pytest.mark.unit
class TestClipGradients:
    """Test suite for clip_gradients."""

    def test_rescales_preserving_direction(self):
        layer = torch.nn.Linear(3, 2)
        layer.weight.grad = torch.full((2, 3), 10.0)
        layer.bias.grad = torch.full((2,), 10.0)
        before = torch.cat([layer.weight.grad.flatten(), layer.bias.grad]).clone()
        norm = clip_gradients(layer, 5.0)
        after = torch.cat([layer.weight.grad.flatten(), layer.bias.grad])

        assert norm == pytest.approx(float(before.norm()))
        assert after.norm().item() == pytest.approx(5.0, rel=1e-5)
        torch.testing.assert_close(after / after.norm(), before / before.norm())

    def test_small_gradients_untouched(self):
        layer = torch.nn.Linear(2, 1)
        layer.weight.grad = torch.tensor([[0.1, 0.2]])
        layer.bias.grad = torch.tensor([0.0])
        clip_gradients(layer, 5.0)
        assert layer.weight.grad.tolist() == [[pytest.approx(0.1), pytest.approx(0.2)]]

    def test_zero_disables(self):
        layer = torch.nn.Linear(2, 1)
        layer.weight.grad = torch.tensor([[30.0, 0.0]])
        layer.bias.grad = torch.tensor([40.0])
        assert clip_gradients(layer, 0.0) == pytest.approx(50.0)
        assert layer.weight.grad[0, 0].item() == 30.0


@pytest.mark.unit
class TestGradientCheck:
    """Test suite for the finite-difference oracle."""

    def test_tiny_model_agrees(self, tiny_config, tiny_batch):
        """Every gradient of the tiny model matches central differences."""
        model = perturb_parameters(GlowVCModel(tiny_config.model), scale=0.1, seed=0)
        assert model.n_parameters() <= 500
        report = gradient_check(model, tiny_batch)
        assert report.passed, report.failures[:5]
        assert report.n_skipped == 0
        assert report.n_checked == model.n_parameters()
        assert report.max_rel_error < 1e-3

    def test_model_is_not_modified(self, tiny_config, tiny_batch):
        model = perturb_parameters(GlowVCModel(tiny_config.model), scale=0.1, seed=1)
        before = {k: v.clone() for k, v in model.state_dict().items()}
        gradient_check(model, tiny_batch)
        for name, value in model.state_dict().items():
            assert torch.equal(value, before[name])
        assert next(model.parameters()).dtype == torch.float32

    def test_detects_wrong_gradient(self, tiny_config, tiny_batch, monkeypatch):
        """A corrupted analytic gradient is reported as a failure."""
        from training import gradients

        original = gradients.compute_gradients

        def corrupted(*args, **kwargs):
            result = original(*args, **kwargs)
            for grad in result.grads.values():
                grad.mul_(2.0)
            return result

        monkeypatch.setattr(gradients, 'compute_gradients', corrupted)
        model = perturb_parameters(GlowVCModel(tiny_config.model), scale=0.1, seed=0)
        assert not gradient_check(model, tiny_batch).passed

    def test_unresolved_kinks_fail(self):
        """Entries left uncompared at a kink fail the check unless explicitly tolerated."""
        assert GradCheckReport(n_checked=10).passed
        assert not GradCheckReport(n_checked=9, n_skipped=1).passed
        assert GradCheckReport(n_checked=9, n_skipped=1, max_skipped=1).passed

    def test_entry_error_small_magnitudes(self):
        assert entry_error(1e-7, 5e-7, atol=1e-6, small=1e-4) == 0.0
        assert entry_error(1.0, 1.001, atol=1e-6, small=1e-4) == pytest.approx(0.001 / 1.001)
