from chemlab.commands import ChemLabCommand
from experiments import reports
from mixtures.plates import Deck
from mixtures.solutions import AnalyteRegistry
from protocols.compiler import CompileConfig, write_cost
from protocols.instructions import InstructionSequence
from robot.executor import NoiseModel, execute


class Command(ChemLabCommand):
    help = "Execute instruction files on the simulated robot deck"

    def add_command_arguments(self, parser):
        parser.add_argument('programs', nargs='+', help="JSON-lines instruction files, run in order")
        parser.add_argument('--deck', help="deck.json to start from (default: an empty standard deck)")

    def run(self, config, *args, **options):
        registry = AnalyteRegistry.from_settings()
        deck = Deck.read(options['deck'], registry) if options['deck'] else Deck.standard(registry)
        noise = NoiseModel.from_settings()
        cfg = CompileConfig.from_settings()
        out = reports.ensure_dir(config.out_dir)
        log = None
        cost = None
        for index, path in enumerate(options['programs']):
            program = InstructionSequence.read(path)
            deck, program_log = execute(program, deck, noise, seed=[config.seed, index])
            if log is None:
                log = program_log
            else:
                log.extend(program_log)
            program_cost = write_cost(program, cfg)
            cost = program_cost if cost is None else cost.merge(program_cost)
        deck.write(out / 'deck.json')
        log.to_csv(out / 'execution_log.csv', reports.float_format())
        reports.write_json(cost.to_dict(), out / 'cost.json')
        self.report(
            f"{len(log)} transfers, {log.n_tips} tips, {log.n_truncated} truncated draws; written to {out}"
        )
