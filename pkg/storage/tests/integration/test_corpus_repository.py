"""
Integration tests for corpus directories.
"""
import numpy as np
import pytest

from storage.repositories import CorpusRepository


@pytest.mark.integration
class TestCorpusRepository:
    """Test suite for saving and loading synthetic corpora."""

    def test_layout(self, corpus_dir, small_corpus):
        """Manifest, vocabularies, generator and one feature file per utterance exist."""
        assert (corpus_dir / 'manifest.json').exists()
        assert (corpus_dir / 'phonemes.json').exists()
        assert (corpus_dir / 'languages.json').exists()
        assert (corpus_dir / 'generator.gvck').exists()
        assert len(list((corpus_dir / 'features').glob('*.gvck'))) == len(small_corpus.utterances)

    def test_manifest_columns(self, corpus_dir):
        """The manifest lists ids, phonemes, durations and the split."""
        manifest = CorpusRepository(corpus_dir).load_manifest()
        assert list(manifest.columns) == [
            'utterance_id', 'speaker_id', 'language_id', 'phoneme_ids', 'durations', 'n_frames', 'split',
        ]
        assert set(manifest['split']) == {'train', 'heldout'}
        row = manifest.iloc[0]
        assert sum(row['durations']) == row['n_frames']

    def test_vocab(self, corpus_dir):
        """Vocabularies map symbols to consecutive ids."""
        phonemes, languages = CorpusRepository(corpus_dir).load_vocab()
        assert sorted(phonemes.values()) == list(range(8))
        assert sorted(languages.values()) == [0, 1]

    def test_load_corpus(self, corpus_dir, small_corpus):
        """Loading restores utterances and generator factors."""
        loaded = CorpusRepository(corpus_dir).load_corpus()
        assert loaded.config == small_corpus.config
        assert len(loaded.utterances) == len(small_corpus.utterances)
        original = small_corpus.utterances[5]
        restored = loaded.by_id(original.utterance_id)
        assert restored.mel.frames.tobytes() == original.mel.frames.tobytes()
        np.testing.assert_array_equal(restored.content.durations, original.content.durations)
        np.testing.assert_array_equal(loaded.mixing, small_corpus.mixing)
        np.testing.assert_array_equal(loaded.bias, small_corpus.bias)

    def test_entry_lookup(self, corpus_dir):
        """A manifest entry is found by utterance id."""
        entry = CorpusRepository(corpus_dir).entry('spk01_utt002')
        assert entry['speaker_id'] == 1

    def test_unknown_entry(self, corpus_dir):
        """An unknown utterance id raises KeyError."""
        with pytest.raises(KeyError):
            CorpusRepository(corpus_dir).entry('nope')
