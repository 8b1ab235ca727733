from django.core.management.base import CommandParser

from config.commands import GlowVCCommand
from config.run_config import load_run_config
from features.utils.file_processors import WavFileProcessor


class Command(GlowVCCommand):
    help = 'Extract log-mel and normalized pitch features from a directory of 16 kHz WAV files'

    def add_arguments(self, parser: CommandParser):
        parser.add_argument('--wav-dir', required=True, help='Directory of mono 16-bit PCM WAV files')
        parser.add_argument('--out', required=True, help='Corpus directory to write')
        parser.add_argument('--config', help='Run-config JSON with a features section')

    def handle(self, *args, **options):
        features = load_run_config(options['config']).features
        processor = WavFileProcessor(features.stft, features.f0)
        result = processor.process_directory(options['wav_dir'], options['out'])
        for error in result['errors']:
            self.stderr.write(error)
        if not result['success']:
            raise self.runtime_error('No features were extracted')
        self.stderr.write(f'Extracted {result["created"]} utterances')
