"""
Integration tests for the tts command.
"""
import pytest

from config.cli import main
from storage.repositories import CheckpointRepository, FeatureRepository


@pytest.fixture
def checkpoint(make_model, small_batch, tmp_path):
    model = make_model('explicit')
    model.loss(small_batch)
    return CheckpointRepository.save(model.eval(), tmp_path / 'model.gvck')


@pytest.mark.integration
class TestTtsCommand:
    """Test suite for glowvc tts."""

    def test_generates_entry(self, checkpoint, corpus_dir, small_corpus, tmp_path):
        """The output has the entry's frame count and an id derived from it."""
        utterance = small_corpus.split('train')[0]
        out = tmp_path / 'tts.gvck'
        code = main([
            'tts', '--ckpt', str(checkpoint), '--manifest-entry', utterance.utterance_id,
            '--data', str(corpus_dir), '--out', str(out), '--temperature', '0',
        ])

        assert code == 0
        record = FeatureRepository.load(out)
        assert record.utterance_id == f'{utterance.utterance_id}_tts'
        assert record.mel.n_frames == utterance.mel.n_frames
        assert record.speaker_id == utterance.speaker_id

    def test_seeded_sampling_is_repeatable(self, checkpoint, corpus_dir, small_corpus, tmp_path):
        utterance_id = small_corpus.split('train')[1].utterance_id
        outputs = []
        for name in ('a.gvck', 'b.gvck'):
            main([
                'tts', '--ckpt', str(checkpoint), '--manifest-entry', utterance_id, '--data', str(corpus_dir),
                '--out', str(tmp_path / name), '--seed', '3', '--speaker', '2',
            ])
            outputs.append(FeatureRepository.load(tmp_path / name))
        assert outputs[0].mel.frames.tobytes() == outputs[1].mel.frames.tobytes()
        assert outputs[0].speaker_id == 2

    def test_unknown_entry(self, checkpoint, corpus_dir, tmp_path):
        code = main([
            'tts', '--ckpt', str(checkpoint), '--manifest-entry', 'nope',
            '--data', str(corpus_dir), '--out', str(tmp_path / 'x.gvck'),
        ])
        assert code == 1

    def test_negative_temperature(self, checkpoint, corpus_dir, tmp_path):
        code = main([
            'tts', '--ckpt', str(checkpoint), '--manifest-entry', 'spk00_utt000',
            '--data', str(corpus_dir), '--out', str(tmp_path / 'x.gvck'), '--temperature', '-1',
        ])
        assert code == 2

    def test_missing_checkpoint(self, corpus_dir, tmp_path):
        code = main([
            'tts', '--ckpt', str(tmp_path / 'none.gvck'), '--manifest-entry', 'spk00_utt000',
            '--data', str(corpus_dir), '--out', str(tmp_path / 'x.gvck'),
        ])
        assert code == 1
