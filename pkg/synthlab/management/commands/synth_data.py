from django.core.management.base import CommandParser

from config.commands import GlowVCCommand
from config.run_config import load_run_config
from storage.repositories import CorpusRepository
from synthlab.generator import generate_corpus


class Command(GlowVCCommand):
    help = 'Generate a synthetic factorized corpus directory'

    def add_arguments(self, parser: CommandParser):
        parser.add_argument('--config', help='Run-config JSON (preset and synth section)')
        parser.add_argument('--out', required=True, help='Corpus directory to write')
        parser.add_argument('--seed', type=int, help='Override the generator seed')

    def handle(self, *args, **options):
        overrides = {} if options['seed'] is None else {'synth': {'seed': options['seed']}}
        config = load_run_config(options['config'], **overrides)
        corpus = generate_corpus(config.synth)
        manifest = CorpusRepository(options['out']).save_corpus(corpus)
        self.stderr.write(f'Wrote {len(corpus.utterances)} utterances; manifest {manifest}')
