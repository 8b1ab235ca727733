from pathlib import Path

from django.core.management.base import CommandParser

from config.commands import GlowVCCommand
from conversion.services import convert
from features.utils.file_processors import WavFileProcessor
from modeling.partition import CONDITIONAL
from storage.models import FeatureRecord
from storage.repositories import CheckpointRepository, FeatureRepository


class Command(GlowVCCommand):
    help = 'Convert a feature file or WAV to a target speaker without any text input'

    def add_arguments(self, parser: CommandParser):
        parser.add_argument('--ckpt', required=True, help='Checkpoint file')
        parser.add_argument('--input', required=True, help='Feature file (.gvck) or 16 kHz WAV')
        parser.add_argument('--target-speaker', type=int, required=True, help='Target speaker id')
        parser.add_argument('--source-speaker', type=int, help='Source speaker id (conditional models only)')
        parser.add_argument('--out', required=True, help='Output feature file')
        parser.add_argument('--temperature', type=float, default=0.0, help='Speaker-block temperature (explicit models)')

    def load_input(self, path: Path) -> FeatureRecord:
        if path.suffix.lower() == '.wav':
            return WavFileProcessor().process_file(path)
        return FeatureRepository.load(path)

    def handle(self, *args, **options):
        model = CheckpointRepository.load(options['ckpt']).model
        source = options['source_speaker']
        if model.variant == CONDITIONAL and source is None:
            raise self.usage_error('a conditional checkpoint needs --source-speaker')
        if model.variant != CONDITIONAL and source is not None:
            raise self.usage_error('an explicit checkpoint does not take --source-speaker')
        if options['temperature'] < 0:
            raise self.usage_error('--temperature must be non-negative')

        record = self.load_input(Path(options['input']))
        target = model.embedding_for(options['target_speaker'])
        s_src = model.embedding_for(source) if source is not None else None
        converted = convert(model, record.mel, target, s_src, options['temperature'])

        FeatureRepository.save(
            FeatureRecord(
                utterance_id=f'{record.utterance_id}_to{options["target_speaker"]}',
                speaker_id=options['target_speaker'],
                language_id=record.language_id,
                mel=converted,
                f0_norm=record.f0_norm,
            ),
            options['out'],
        )
        self.stderr.write(f'Converted {record.utterance_id} ({converted.n_frames} frames) to {options["out"]}')
