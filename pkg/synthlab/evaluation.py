"""Held-out evaluation of a trained model on a synthetic corpus."""

import logging

import numpy as np
import pandas as pd
import torch

from conversion.services import convert
from modeling.bundles import collate_bundles
from modeling.partition import CONDITIONAL
from synthlab.exceptions import InsufficientData
from synthlab.metrics import (
    bits_per_dim,
    content_preservation_score,
    diagonal_gaussian_bits_per_dim,
    speaker_transfer_accuracy,
)
from synthlab.models import SyntheticCorpus
from training.datasets import utterance_bundle

logger = logging.getLogger(__name__)


def sample_pairs(corpus: SyntheticCorpus, n_pairs: int, seed: int = 0) -> pd.DataFrame:
    """
    Random cross-speaker conversion pairs over held-out utterances.

    Returns:
        DataFrame with ``utterance_id``, ``source_speaker``,
        ``target_speaker`` and ``cross_lingual`` columns
    """
    heldout = corpus.split('heldout')
    if not heldout:
        raise InsufficientData('the corpus has no held-out utterances')
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(n_pairs):
        source = heldout[int(rng.integers(len(heldout)))]
        others = [s for s in range(corpus.n_speakers) if s != source.speaker_id]
        target = int(others[int(rng.integers(len(others)))])
        rows.append(
            {
                'utterance_id': source.utterance_id,
                'source_speaker': source.speaker_id,
                'target_speaker': target,
                'cross_lingual': corpus.config.language_of(target) != source.language_id,
            }
        )
    return pd.DataFrame(rows)


@torch.no_grad()
def heldout_bits_per_dim(model, corpus: SyntheticCorpus, batch_size: int = 32) -> float:
    """Model bits per dim over all held-out frames."""
    model.require_frozen()
    dtype = next(model.parameters()).dtype
    heldout = corpus.split('heldout')
    total_nll, total_frames = 0.0, 0
    for start in range(0, len(heldout), batch_size):
        chunk = heldout[start : start + batch_size]
        batch = collate_bundles([utterance_bundle(u) for u in chunk], [u.mel for u in chunk]).to(dtype)
        total_nll += float(model.nll(batch).sum())
        total_frames += int(batch.frame_lengths.sum())
    return bits_per_dim(total_nll, total_frames, model.n_channels)


def score_pairs(model, corpus: SyntheticCorpus, pairs: pd.DataFrame) -> dict:
    sources, outputs, targets = [], [], []
    for row in pairs.itertuples(index=False):
        utterance = corpus.by_id(row.utterance_id)
        s_src = model.embedding_for(int(row.source_speaker)) if model.variant == CONDITIONAL else None
        converted = convert(model, utterance.mel, model.embedding_for(int(row.target_speaker)), s_src)
        sources.append(utterance.mel.frames)
        outputs.append(converted.frames)
        targets.append(int(row.target_speaker))
    return {
        'n_pairs': len(pairs),
        'speaker_transfer_accuracy': speaker_transfer_accuracy(list(zip(outputs, targets)), corpus),
        'content_preservation_score': content_preservation_score(sources, outputs, corpus),
    }


def evaluate_model(model, corpus: SyntheticCorpus, n_pairs: int = 100, seed: int = 0) -> dict:
    """
    Conversion and density metrics over held-out data.

    The report holds overall conversion scores, the same scores split into
    intra- and cross-lingual pairs, model bits per dim on held-out frames and
    the diagonal-Gaussian baseline.
    """
    model.require_frozen()
    pairs = sample_pairs(corpus, n_pairs, seed)
    report = {'variant': model.variant, **score_pairs(model, corpus, pairs)}
    for label, subset in (('intra_lingual', pairs[~pairs['cross_lingual']]), ('cross_lingual', pairs[pairs['cross_lingual']])):
        report[label] = score_pairs(model, corpus, subset) if len(subset) else {'n_pairs': 0}

    report['bits_per_dim'] = heldout_bits_per_dim(model, corpus)
    report['baseline_bits_per_dim'] = diagonal_gaussian_bits_per_dim(
        [u.mel.frames for u in corpus.split('train')],
        [u.mel.frames for u in corpus.split('heldout')],
    )
    logger.info(
        'Evaluation: accuracy %.3f, content %.3f, bits/dim %.4f (baseline %.4f)',
        report['speaker_transfer_accuracy'], report['content_preservation_score'],
        report['bits_per_dim'], report['baseline_bits_per_dim'],
    )
    return report
