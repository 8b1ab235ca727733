"""Torch datasets over corpus utterances."""

import torch
from torch.utils.data import DataLoader, Dataset

from features.models import MelSpectrogram
from modeling.bundles import Batch, ConditioningBundle, collate_bundles
from synthlab.models import SyntheticCorpus, Utterance


def utterance_bundle(utterance: Utterance) -> ConditioningBundle:
    return ConditioningBundle(
        content=utterance.content,
        pitch=utterance.f0_norm,
        speaker_id=utterance.speaker_id,
    )


class UtteranceDataset(Dataset):
    """(bundle, mel) pairs of one corpus split."""

    def __init__(self, utterances: list[Utterance]):
        self.utterances = list(utterances)

    @classmethod
    def from_corpus(cls, corpus: SyntheticCorpus, split: str | None = 'train') -> 'UtteranceDataset':
        utterances = corpus.utterances if split is None else corpus.split(split)
        return cls(utterances)

    def __len__(self):
        return len(self.utterances)

    def __getitem__(self, index) -> tuple[ConditioningBundle, MelSpectrogram]:
        utterance = self.utterances[index]
        return utterance_bundle(utterance), utterance.mel


def collate(items: list[tuple[ConditioningBundle, MelSpectrogram]]) -> Batch:
    bundles, mels = zip(*items)
    return collate_bundles(list(bundles), list(mels))


def make_loader(dataset: UtteranceDataset, batch_size: int, seed: int, shuffle: bool = True) -> DataLoader:
    """Single-process loader whose shuffling is driven by ``seed``."""
    return DataLoader(
        dataset,
        batch_size=batch_size,
        shuffle=shuffle,
        collate_fn=collate,
        generator=torch.Generator().manual_seed(seed),
        num_workers=0,
    )
