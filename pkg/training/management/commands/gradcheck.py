from django.core.management.base import CommandParser

from config.commands import GlowVCCommand
from config.run_config import load_run_config
from flows.commons import perturb_parameters
from modeling.glow_vc import GlowVCModel
from modeling.partition import VARIANTS
from synthlab.generator import generate_corpus
from training.datasets import UtteranceDataset, collate
from training.gradients import gradient_check


class Command(GlowVCCommand):
    help = 'Compare reverse-mode gradients with central finite differences on a small model'

    def add_arguments(self, parser: CommandParser):
        parser.add_argument('--config', help='Run-config JSON (defaults to the tiny preset)')
        parser.add_argument('--variant', choices=VARIANTS, help='Override the model variant')
        parser.add_argument('--seed', type=int, default=0, help='Parameter perturbation seed')
        parser.add_argument('--tolerance', type=float, default=1e-3, help='Maximum relative error')

    def handle(self, *args, **options):
        source = options['config'] or {'preset': 'tiny'}
        base = load_run_config(source)
        corpus = generate_corpus(base.synth)
        overrides = corpus.model_overrides()
        if options['variant']:
            overrides['variant'] = options['variant']
        config = load_run_config(source, model=overrides)

        model = perturb_parameters(GlowVCModel(config.model), scale=0.1, seed=options['seed'])
        dataset = UtteranceDataset.from_corpus(corpus, 'train')
        batch = collate([dataset[i] for i in range(min(len(dataset), config.train.batch_size))])
        report = gradient_check(model, batch, rtol=options['tolerance'], seed=options['seed'])

        self.stdout.write(f'max relative error {report.max_rel_error:.3e}')
        self.stdout.write(f'unresolved kinks {report.n_skipped}')
        self.stderr.write(
            f'{model.n_parameters()} parameters, {report.n_checked} entries checked, '
            f'{report.n_refined} resolved at a finer step'
        )
        if not report.passed:
            for name, index, analytic, numeric in report.failures[:10]:
                self.stderr.write(f'{name}[{index}]: analytic {analytic:.6e} numeric {numeric:.6e}')
            raise self.runtime_error(
                f'gradient check failed (tolerance {options["tolerance"]}, {report.n_skipped} unresolved kinks)'
            )
