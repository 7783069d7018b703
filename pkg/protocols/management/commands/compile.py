import json
from pathlib import Path

from chemlab.commands import ChemLabCommand
from encoding.plans import EncodingPlan
from experiments import reports
from experiments.pipeline import pool_wells
from mixtures.plates import Deck
from perceptron.classifiers import TrainedClassifier
from protocols.compiler import CompileConfig, check_budget, compile_classifier, plate_for
from protocols.instructions import InstructionSequence


def load_classifier(path):
    path = Path(path)
    if path.suffix == '.csv':
        return TrainedClassifier.from_weight_csv(path, foreground=path.stem.removeprefix('weights_'))
    return TrainedClassifier.read(path)


class Command(ChemLabCommand):
    help = "Compile classifiers into pooling programs for an encoded plate"

    def add_command_arguments(self, parser):
        parser.add_argument('classifiers', nargs='+', help="Classifier JSON or 16x16 weight CSV files")
        parser.add_argument('--plan', required=True, help="plan.json written by encode")
        parser.add_argument('--deck', help="deck.json to check the draws against (default: one write per well)")
        parser.add_argument('--pool-volume', help="Equalized pool volume in uL, or 'auto'")

    def run(self, config, *args, **options):
        plan = EncodingPlan.from_dict(json.loads(Path(options['plan']).read_text(encoding='utf-8')))
        overrides = {}
        if options['pool_volume']:
            overrides['pool_volume'] = 'auto' if options['pool_volume'] == 'auto' else float(options['pool_volume'])
        cfg = CompileConfig.from_settings(**overrides)
        program = InstructionSequence()
        pool_cols = config.section('POOL_PLATE')['cols']
        for index, path in enumerate(options['classifiers']):
            classifier = load_classifier(path).normalized()
            compiled = compile_classifier(classifier, plan, cfg, pools=pool_wells(index, pool_cols))
            program = program + compiled
            self.report(
                f"classifier {classifier.foreground or index}: {len(compiled)} transfers, "
                f"pools {compiled.metadata['pools']['positive']} / {compiled.metadata['pools']['negative']} "
                f"at {compiled.metadata['pool_volume_ul']:g} uL"
            )
        target = Deck.read(options['deck']) if options['deck'] else plate_for(plan, plan.write_volume)
        cost = check_budget(program, target, cfg)
        out = reports.ensure_dir(config.out_dir)
        program.write(out / 'program.jsonl')
        reports.write_json(cost.to_dict(), out / 'cost.json')
