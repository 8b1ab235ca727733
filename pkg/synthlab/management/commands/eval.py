import json
from pathlib import Path

from django.core.management.base import CommandParser

from config.commands import GlowVCCommand
from storage.repositories import CheckpointRepository, CorpusRepository
from synthlab.evaluation import evaluate_model


class Command(GlowVCCommand):
    help = 'Convert held-out pairs and report transfer accuracy, content preservation and bits per dim'

    def add_arguments(self, parser: CommandParser):
        parser.add_argument('--ckpt', required=True, help='Checkpoint file')
        parser.add_argument('--data', required=True, help='Corpus directory from synth-data')
        parser.add_argument('--report', required=True, help='JSON report to write')
        parser.add_argument('--pairs', type=int, default=100, help='Number of conversion pairs')
        parser.add_argument('--seed', type=int, default=0, help='Pair sampling seed')

    def handle(self, *args, **options):
        if options['pairs'] < 1:
            raise self.usage_error('--pairs must be positive')
        model = CheckpointRepository.load(options['ckpt']).model
        corpus = CorpusRepository(options['data']).load_corpus()
        report = evaluate_model(model, corpus, options['pairs'], options['seed'])
        path = Path(options['report'])
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report, indent=2, sort_keys=True))
        self.stderr.write(
            f'accuracy {report["speaker_transfer_accuracy"]:.3f}, '
            f'content {report["content_preservation_score"]:.3f}, '
            f'bits/dim {report["bits_per_dim"]:.4f}; report {path}'
        )
