"""
Unit tests for the invertible layers and the squeeze helpers.
"""
import math

import pytest
import torch

from flows.commons import perturb_parameters, sequence_mask, squeeze, unsqueeze
from flows.exceptions import ConditionMissing, ConditionUnexpected, NotInitialized
from flows.layers import ActNorm, AffineCoupling, InvertibleLinear


def numerical_log_abs_det(fn, x, step=1e-4):
    """log|det J| of ``fn`` at ``x`` [1, C, 1] by central differences."""
    n = x.numel()
    columns = []
    for i in range(n):
        delta = torch.zeros(n, dtype=x.dtype)
        delta[i] = step
        delta = delta.view_as(x)
        columns.append(((fn(x + delta) - fn(x - delta)) / (2 * step)).reshape(n))
    return torch.linalg.slogdet(torch.stack(columns, dim=1))[1].item()


@pytest.mark.unit
class TestActNorm:
    """Test suite for ActNorm."""

    def test_zero_parameters_are_identity(self):
        """logs = 0 and bias = 0 leave the input unchanged."""
        layer = ActNorm(3, initialized=True)
        x = torch.randn(2, 3, 5)
        y, logdet = layer(x)
        torch.testing.assert_close(y, x)
        assert torch.all(logdet == 0)

    def test_logdet_cancels(self):
        """Scales (2, 0.5) over three frames contribute zero log-determinant."""
        layer = ActNorm(2, initialized=True)
        layer.logs.data.copy_(torch.tensor([math.log(2.0), math.log(0.5)]).view(1, 2, 1))
        _, logdet = layer(torch.randn(1, 2, 3))
        assert logdet.dtype == torch.float64
        assert abs(logdet.item()) < 1e-7

    def test_data_dependent_init(self):
        """The first training batch comes out with zero mean and unit variance."""
        layer = ActNorm(4).train()
        x = torch.randn(3, 4, 50) * 3.0 + 2.0
        y, _ = layer(x)
        assert layer.is_initialized
        torch.testing.assert_close(y.mean(dim=[0, 2]), torch.zeros(4), atol=1e-5, rtol=0)
        torch.testing.assert_close(y.var(dim=[0, 2], unbiased=False), torch.ones(4), atol=1e-4, rtol=0)

    def test_init_ignores_padding(self):
        """Padded frames do not enter the init statistics."""
        layer = ActNorm(2).train()
        x = torch.randn(1, 2, 6)
        x[:, :, 4:] = 100.0
        mask = sequence_mask(torch.tensor([4])).unsqueeze(1).float()
        y, logdet = layer(x, mask)
        torch.testing.assert_close(y[:, :, :4].mean(dim=2), torch.zeros(1, 2), atol=1e-5, rtol=0)
        assert torch.all(y[:, :, 4:] == 0)
        torch.testing.assert_close(logdet, 4 * layer.logs.double().sum().view(1))

    def test_inverse_before_init(self):
        """Inverting an uninitialized actnorm raises NotInitialized."""
        with pytest.raises(NotInitialized):
            ActNorm(2)(torch.randn(1, 2, 3), reverse=True)

    def test_round_trip(self):
        """A random actnorm inverts to within 1e-5."""
        layer = perturb_parameters(ActNorm(6), scale=0.5, seed=3)
        x = torch.randn(4, 6, 9)
        y, logdet = layer(x)
        x_back, inverse_logdet = layer(y, reverse=True)
        assert (x_back - x).abs().max() < 1e-5
        torch.testing.assert_close(inverse_logdet, -logdet)


@pytest.mark.unit
class TestInvertibleLinear:
    """Test suite for InvertibleLinear."""

    def test_identity_matrix(self):
        """W = I maps x to itself with zero log-determinant."""
        layer = InvertibleLinear(5, init='identity')
        x = torch.randn(2, 5, 3)
        y, logdet = layer(x)
        torch.testing.assert_close(y, x)
        assert torch.all(logdet == 0)

    def test_diagonal_logdet(self):
        """W = diag(2, 3) over four frames gives 4 ln 6."""
        layer = InvertibleLinear.from_matrix(torch.diag(torch.tensor([2.0, 3.0])))
        _, logdet = layer(torch.randn(1, 2, 4))
        assert logdet.item() == pytest.approx(4 * math.log(6.0), abs=1e-5)
        assert logdet.item() == pytest.approx(7.16704, abs=1e-5)

    def test_lu_reproduces_matrix(self):
        """P L U reassembles the matrix the layer was loaded from."""
        weight = torch.randn(4, 4, dtype=torch.float64) + 3 * torch.eye(4, dtype=torch.float64)
        layer = InvertibleLinear.from_matrix(weight).double()
        torch.testing.assert_close(layer.weight(), weight)

    def test_logdet_matches_numerical_jacobian(self):
        """The analytic log-determinant matches a finite-difference Jacobian."""
        layer = InvertibleLinear(4).double()
        x = torch.randn(1, 4, 1, dtype=torch.float64)
        _, logdet = layer(x)
        expected = numerical_log_abs_det(lambda v: layer(v)[0], x)
        assert logdet.item() == pytest.approx(expected, rel=1e-3, abs=1e-6)

    def test_round_trip(self):
        """A random orthogonal layer inverts to within 1e-5."""
        layer = InvertibleLinear(8)
        x = torch.randn(3, 8, 7)
        y, logdet = layer(x)
        x_back, inverse_logdet = layer(y, reverse=True)
        assert (x_back - x).abs().max() < 1e-5
        torch.testing.assert_close(inverse_logdet, -logdet)

    def test_unknown_init(self):
        with pytest.raises(ValueError):
            InvertibleLinear(2, init='random')


@pytest.mark.unit
class TestAffineCoupling:
    """Test suite for AffineCoupling."""

    def test_fresh_layer_is_identity(self):
        """The zero-initialized output layer makes a new coupling the identity."""
        layer = AffineCoupling(4, hidden_channels=8)
        x = torch.randn(2, 4, 6)
        y, logdet = layer(x)
        torch.testing.assert_close(y, x)
        assert torch.all(logdet == 0)

    def test_constant_scale_logdet(self):
        """A constant log-scale of ln 2 over two frames and two channels gives 4 ln 2."""
        layer = AffineCoupling(4, hidden_channels=8)
        layer.rig_constant(math.log(2.0))
        x = torch.randn(1, 4, 2)
        y, logdet = layer(x)
        assert logdet.item() == pytest.approx(2.77259, abs=1e-5)
        torch.testing.assert_close(y[:, 2:], 2 * x[:, 2:], rtol=1e-5, atol=1e-6)
        torch.testing.assert_close(y[:, :2], x[:, :2])

    def test_round_trip(self):
        """A random coupling inverts to within 1e-5."""
        layer = perturb_parameters(AffineCoupling(6, hidden_channels=16), scale=0.3, seed=5)
        x = torch.randn(4, 6, 11)
        y, logdet = layer(x)
        x_back, inverse_logdet = layer(y, reverse=True)
        assert (x_back - x).abs().max() < 1e-5
        torch.testing.assert_close(inverse_logdet, -logdet)

    def test_log_scale_is_bounded(self):
        """Large raw outputs saturate at the learned bound."""
        layer = AffineCoupling(2, hidden_channels=4)
        layer.end.bias.data.fill_(1e4)
        logs, _ = layer.coefficients(torch.randn(1, 1, 3), torch.ones(1, 1, 3))
        assert logs.abs().max() <= float(layer.scale) + 1e-6

    def test_condition_missing(self):
        layer = AffineCoupling(4, hidden_channels=8, gin_channels=3)
        with pytest.raises(ConditionMissing):
            layer(torch.randn(1, 4, 2))

    def test_condition_unexpected(self):
        layer = AffineCoupling(4, hidden_channels=8)
        with pytest.raises(ConditionUnexpected):
            layer(torch.randn(1, 4, 2), g=torch.randn(1, 3))

    def test_condition_changes_output(self):
        """Two speakers give different outputs for the same frames."""
        layer = perturb_parameters(AffineCoupling(4, hidden_channels=8, gin_channels=3), seed=1)
        x = torch.randn(1, 4, 5)
        y_a, _ = layer(x, g=torch.zeros(1, 3))
        y_b, _ = layer(x, g=torch.ones(1, 3))
        assert not torch.allclose(y_a, y_b)


@pytest.mark.unit
class TestSqueeze:
    """Test suite for squeeze and unsqueeze."""

    def test_even_length_shape(self):
        """Four frames of 80 channels become two frames of 160."""
        x_sqz, mask = squeeze(torch.randn(1, 80, 4))
        assert x_sqz.shape == (1, 160, 2)
        assert mask.shape == (1, 1, 2)

    def test_odd_length_drops_trailing_frame(self):
        """The fifth frame is not part of any group."""
        x = torch.randn(1, 80, 5)
        x_sqz, _ = squeeze(x)
        assert x_sqz.shape == (1, 160, 2)
        x_back, _ = unsqueeze(x_sqz)
        assert torch.equal(x_back, x[:, :, :4])

    def test_channel_layout(self):
        """Output channels k*C:(k+1)*C hold the k-th frame of the group."""
        x = torch.arange(12.0).view(1, 2, 6)
        x_sqz, _ = squeeze(x)
        torch.testing.assert_close(x_sqz[0, :, 0], torch.tensor([0.0, 6.0, 1.0, 7.0]))

    def test_round_trip_is_exact(self):
        x = torch.randn(3, 80, 10)
        assert torch.equal(unsqueeze(*squeeze(x))[0], x)

    def test_mask_takes_group_end(self):
        """A group is valid only when its last frame is valid."""
        mask = sequence_mask(torch.tensor([3])).unsqueeze(1).float()
        mask = torch.nn.functional.pad(mask, (0, 1))
        _, sqz_mask = squeeze(torch.randn(1, 2, 4), mask)
        assert sqz_mask.flatten().tolist() == [1.0, 0.0]
