import numpy as np
from django.conf import settings

from chemlab.commands import ChemLabCommand
from experiments import reports
from experiments.idx import ingest_idx
from experiments.mnist import training_set
from perceptron.classifiers import train


class Command(ChemLabCommand):
    help = "Train one-vs-all digit perceptrons on IDX image and label files"

    def add_command_arguments(self, parser):
        parser.add_argument('--images', required=True, help="IDX image file (magic 0x00000803)")
        parser.add_argument('--labels', required=True, help="IDX label file (magic 0x00000801)")
        parser.add_argument('--digit', action='append', dest='digits',
                            help="Foreground digit; repeat for several (default: the MNIST digits setting)")
        parser.add_argument('--per-class', type=int, help="Foreground and background images per classifier")
        parser.add_argument('--epochs', type=int)
        parser.add_argument('--learning-rate', type=float)

    def run(self, config, *args, **options):
        section = settings.CHEMLAB['MNIST']
        images = ingest_idx(options['images'])
        labels = ingest_idx(options['labels'])
        digits = options['digits'] or section['digits']
        per_class = options['per_class'] or int(section['train_per_class'])
        rng = np.random.default_rng(config.seed)
        out = reports.ensure_dir(config.out_dir)
        for digit in digits:
            features, targets = training_set(images, labels, digit, per_class, rng)
            classifier = train(
                features, targets,
                epochs=options['epochs'] or int(section['epochs']),
                learning_rate=options['learning_rate'] or float(section['learning_rate']),
                seed=int(rng.integers(2 ** 32)),
                foreground=str(digit),
                fit_bias=bool(section.get('fit_bias', False)),
            )
            classifier.write(out / f"classifier_{digit}.json")
            classifier.weight_map_csv(out / f"weights_{digit}.csv", float_format=reports.float_format())
            reports.weight_map_svg(classifier, out / f"weights_{digit}.svg")
            self.report(f"classifier {digit}: training accuracy {classifier.training_accuracy:.3f}")
