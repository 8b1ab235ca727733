"""
Shared test fixtures for the entire test suite.
"""
import numpy as np
import pytest
import torch

from config.run_config import ModelConfig, load_run_config
from modeling.glow_vc import GlowVCModel
from storage.repositories import CorpusRepository
from synthlab.generator import generate_corpus
from synthlab.models import SynthConfig
from training.datasets import UtteranceDataset, collate

SMALL_SYNTH = dict(
    n_speakers=3,
    n_languages=2,
    utterances_per_speaker=6,
    phoneme_vocab_size=8,
    min_phonemes=2,
    max_phonemes=4,
    min_duration=1,
    max_duration=3,
    heldout_per_speaker=2,
    seed=7,
)

SMALL_MODEL = dict(
    n_blocks=2,
    hidden_channels=16,
    n_phonemes=8,
    n_languages=2,
    n_speakers=3,
    phoneme_embedding_dim=8,
    language_embedding_dim=2,
    encoder_conv_channels=8,
    encoder_conv_layers=2,
    speaker_dim=12,
)


@pytest.fixture(autouse=True)
def seeded():
    """Fixes the global torch seed for every test."""
    torch.manual_seed(0)


@pytest.fixture
def tiny_config():
    """Run config of the tiny preset."""
    return load_run_config({'preset': 'tiny'})


@pytest.fixture
def tiny_corpus(tiny_config):
    """Four-channel synthetic corpus matching the tiny preset."""
    return generate_corpus(tiny_config.synth)


@pytest.fixture
def small_synth_config():
    """80-channel synthetic corpus settings small enough for unit tests."""
    return SynthConfig(**SMALL_SYNTH)


@pytest.fixture
def small_corpus(small_synth_config):
    """Generated 80-channel corpus with 18 utterances."""
    return generate_corpus(small_synth_config)


@pytest.fixture
def corpus_dir(tmp_path, small_corpus):
    """The small corpus written to disk."""
    CorpusRepository(tmp_path / 'corpus').save_corpus(small_corpus)
    return tmp_path / 'corpus'


@pytest.fixture
def make_model():
    """Factory for small 80-channel models of either variant."""

    def factory(variant='explicit', **overrides):
        config = ModelConfig(variant=variant, **{**SMALL_MODEL, **overrides})
        return GlowVCModel(config)

    return factory


@pytest.fixture
def small_batch(small_corpus):
    """Padded batch of four training utterances of unequal length."""
    dataset = UtteranceDataset.from_corpus(small_corpus, 'train')
    return collate([dataset[i] for i in range(4)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
