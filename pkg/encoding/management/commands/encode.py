from pathlib import Path

from chemlab.commands import ChemLabCommand
from encoding.chemistry import validate_chemistry
from encoding.datasets import Dataset, check_batch, load_dataset_json, load_grid, load_grid_png
from encoding.plans import emit_write_instructions, layout, reserve_bias_well
from encoding.rendering import render_plate
from experiments import reports
from mixtures.plates import Deck
from mixtures.solutions import AnalyteRegistry
from protocols.compiler import CompileConfig, write_cost
from robot.executor import NoiseModel, execute


def load_datasets(paths, registry):
    """JSON files carry their analyte; grid and PNG images take the next free analyte id"""
    datasets = []
    images = []
    for path in map(Path, paths):
        if path.suffix == '.json':
            datasets.extend(load_dataset_json(path))
        elif path.suffix == '.png':
            images.append(load_grid_png(path))
        else:
            images.append(load_grid(path))
    used = {d.analyte for d in datasets}
    free = [analyte_id for analyte_id in registry.ids if analyte_id not in used]
    datasets.extend(Dataset(analyte_id, bits) for analyte_id, bits in zip(free, images))
    if len(images) > len(free):
        datasets.extend(Dataset(0, bits) for bits in images[len(free):])
    return datasets


class Command(ChemLabCommand):
    help = "Lay datasets out on the data plate and write them, one analyte per dataset"

    def add_command_arguments(self, parser):
        parser.add_argument('datasets', nargs='+', help="Dataset JSON, 0/1 text grid or PNG files")
        parser.add_argument('--bias', action='store_true', help="Reserve a constant-1 well for a biased classifier")

    def run(self, config, *args, **options):
        registry = AnalyteRegistry.from_settings()
        datasets = check_batch(load_datasets(options['datasets'], registry), registry)
        plan = layout(datasets[0].n_bits)
        if options['bias']:
            plan = reserve_bias_well(plan)

        chemistry = validate_chemistry([registry[d.analyte] for d in datasets])
        for violation in chemistry.violations:
            self.stderr.write(self.style.WARNING(f"analyte {violation.analyte}: {violation.message}"))

        compile_cfg = CompileConfig.from_settings()
        writes = emit_write_instructions(datasets, plan, registry, tip_policy=compile_cfg.tip_policy)
        deck, log = execute(writes, Deck.standard(registry), NoiseModel.from_settings(), seed=config.seed)

        out = reports.ensure_dir(config.out_dir)
        reports.write_json(plan.to_dict(), out / 'plan.json')
        writes.write(out / 'writes.jsonl')
        deck.write(out / 'deck.json')
        log.to_csv(out / 'execution_log.csv', reports.float_format())
        render_plate(deck.plate(plan.plate), [d.analyte for d in datasets]).save(out / 'plate.png')
        reports.write_json(write_cost(writes, compile_cfg).to_dict(), out / 'cost.json')
        reports.write_json(chemistry.to_dict(), out / 'chemistry.json')
        self.report(
            f"{len(datasets)} datasets x {plan.n_bits} bits -> {len(writes)} writes, {writes.n_tips} tips; "
            f"written to {out}"
        )
