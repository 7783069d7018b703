"""
Base class for the simulator's management commands.

Every command takes the global flags --config, --seed, --noise and --out,
runs with the merged configuration as the active CHEMLAB settings and turns
domain errors into a one-line JSON message and exit status 2.
"""

import logging

from django.core.management.base import BaseCommand, CommandError

from chemlab.exceptions import ChemLabError
from experiments.config import build_config

logger = logging.getLogger(__name__)


class ChemLabCommand(BaseCommand):
    experiment = None

    def add_arguments(self, parser):
        parser.add_argument('--config', dest='config_path', help="TOML file overriding the CHEMLAB settings")
        parser.add_argument('--seed', type=int, help="Random seed (default 0)")
        parser.add_argument('--noise', choices=['on', 'off'], help="Robot and detector noise")
        parser.add_argument('--out', help="Output directory")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def build_config(self, options):
        return build_config(
            experiment=self.experiment,
            config_path=options.get('config_path'),
            seed=options.get('seed'),
            noise=options['noise'] == 'on' if options.get('noise') else None,
            out=options.get('out'),
        )

    def handle(self, *args, **options):
        try:
            config = self.build_config(options)
            with config.applied():
                return self.run(config, *args, **options)
        except ChemLabError as err:
            logger.debug("command failed", exc_info=True)
            raise CommandError(err.as_json(), returncode=2) from err

    def run(self, config, *args, **options):
        raise NotImplementedError('subclasses of ChemLabCommand must provide a run() method')

    def report(self, message):
        self.stdout.write(self.style.SUCCESS(message))
