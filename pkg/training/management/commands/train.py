from django.core.management.base import CommandParser

from config.commands import GlowVCCommand
from config.run_config import load_run_config
from modeling.partition import VARIANTS
from storage.repositories import CorpusRepository
from training.datasets import UtteranceDataset
from training.trainer import train


class Command(GlowVCCommand):
    help = 'Train a GlowVC model on a synthetic corpus directory'

    def add_arguments(self, parser: CommandParser):
        parser.add_argument('--config', help='Run-config JSON')
        parser.add_argument('--data', required=True, help='Corpus directory from synth-data')
        parser.add_argument('--out', required=True, help='Final checkpoint path')
        parser.add_argument('--variant', choices=VARIANTS, help='Override the model variant')
        parser.add_argument('--max-steps', type=int, help='Override train.max_steps')
        parser.add_argument('--metrics', help='NDJSON metrics log (default: next to the checkpoint)')

    def handle(self, *args, **options):
        corpus = CorpusRepository(options['data']).load_corpus()
        model_overrides = corpus.model_overrides()
        if options['variant']:
            model_overrides['variant'] = options['variant']
        train_overrides = {}
        if options['max_steps'] is not None:
            if options['max_steps'] < 1:
                raise self.usage_error('--max-steps must be positive')
            train_overrides['max_steps'] = options['max_steps']
        config = load_run_config(options['config'], model=model_overrides, train=train_overrides)

        summary = train(
            UtteranceDataset.from_corpus(corpus, 'train'),
            config.model,
            config.train,
            options['out'],
            options['metrics'],
            extra_meta={'preset': config.preset},
        )
        self.stderr.write(
            f'Trained {summary.steps} steps: nll {summary.final_nll:.4f}, '
            f'bits/dim {summary.final_bits_per_dim:.4f}; checkpoint {summary.checkpoint}'
        )
        if not summary.smoothed_monotone:
            self.stderr.write('warning: smoothed training nll was not monotone')
