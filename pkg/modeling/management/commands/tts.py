import numpy as np
import torch
from django.core.management.base import CommandParser

from config.commands import GlowVCCommand
from modeling.bundles import ConditioningBundle
from modeling.glow_vc import tts_infer
from priors.models import ContentInput
from storage.models import FeatureRecord
from storage.repositories import CheckpointRepository, CorpusRepository, FeatureRepository


class Command(GlowVCCommand):
    help = 'Generate mel frames from the phonemes, durations and pitch of a manifest entry'

    def add_arguments(self, parser: CommandParser):
        parser.add_argument('--ckpt', required=True, help='Checkpoint file')
        parser.add_argument('--manifest-entry', required=True, help='Utterance id in the corpus manifest')
        parser.add_argument('--data', required=True, help='Corpus directory')
        parser.add_argument('--out', required=True, help='Output feature file')
        parser.add_argument('--temperature', type=float, default=1.0, help='Prior sampling temperature')
        parser.add_argument('--speaker', type=int, help='Speaker id (default: the entry speaker)')
        parser.add_argument('--seed', type=int, default=0, help='Sampling seed')

    def handle(self, *args, **options):
        if options['temperature'] < 0:
            raise self.usage_error('--temperature must be non-negative')
        model = CheckpointRepository.load(options['ckpt']).model
        corpus = CorpusRepository(options['data'])
        entry = corpus.entry(options['manifest_entry'])
        if not isinstance(entry['phoneme_ids'], list):
            raise self.runtime_error(f'{options["manifest_entry"]} has no phonemes or durations')
        record = corpus.load_features(options['manifest_entry'])
        speaker_id = int(entry['speaker_id']) if options['speaker'] is None else options['speaker']

        bundle = ConditioningBundle(
            content=ContentInput(
                phoneme_ids=np.asarray(entry['phoneme_ids']),
                language_id=int(entry['language_id']),
                durations=np.asarray(entry['durations']),
            ),
            pitch=record.f0_norm,
            speaker_id=speaker_id,
        )
        generator = torch.Generator().manual_seed(options['seed'])
        mel = tts_infer(bundle, model, options['temperature'], generator)

        FeatureRepository.save(
            FeatureRecord(
                utterance_id=f'{record.utterance_id}_tts',
                speaker_id=speaker_id,
                language_id=int(entry['language_id']),
                mel=mel,
                f0_norm=record.f0_norm,
            ),
            options['out'],
        )
        self.stderr.write(f'Generated {mel.n_frames} frames to {options["out"]}')
