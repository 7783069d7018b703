import pandas as pd

from chemlab.commands import ChemLabCommand
from experiments import reports
from experiments.calibration import run_calibration
from experiments.config import EXPERIMENTS, build_config
from experiments.mnist import majority_table, run_mnist
from experiments.models import ExperimentRun
from experiments.validation import calibrate_noise, run_validation


class Command(ChemLabCommand):
    help = "Run one of the end-to-end experiments: mnist, validate or calibrate"

    def add_command_arguments(self, parser):
        parser.add_argument('experiment', choices=EXPERIMENTS)
        parser.add_argument('--seeds', type=int, help="Run N consecutive seeds starting at --seed")
        parser.add_argument('--record', action='store_true', help="Store every report in the run ledger")
        parser.add_argument('--calibrate-noise', action='store_true',
                            help="validate only: bisect the pipette cv to the target differential 3 sigma")

    def build_config(self, options):
        seeds = None
        if options.get('seeds'):
            start = options.get('seed') or 0
            seeds = list(range(start, start + options['seeds']))
        return build_config(
            experiment=options['experiment'],
            config_path=options.get('config_path'),
            seed=options.get('seed'),
            seeds=seeds,
            noise=options['noise'] == 'on' if options.get('noise') else None,
            out=options.get('out'),
        )

    def run(self, config, *args, **options):
        if options['calibrate_noise']:
            return self.calibrate_noise(config)
        out = reports.ensure_dir(config.out_dir)
        many = len(config.seeds) > 1
        results = []
        for seed in config.seeds:
            report = self.run_one(config.experiment, seed)
            target = out / f"seed_{seed:04d}" if many else out
            report.write(target)
            if options['record']:
                ExperimentRun.record(report, out_dir=target)
            results.append(report)
            self.stdout.write(self.describe(report))
        if many:
            self.write_sweep(config.experiment, results, out)
        self.report(f"{config.experiment}: {len(results)} run(s) written to {out}")

    def run_one(self, experiment, seed):
        if experiment == 'mnist':
            return run_mnist(seed=seed)
        if experiment == 'validate':
            return run_validation(seed=seed)
        return run_calibration(seed=seed)

    def describe(self, report):
        if report.experiment == 'calibrate':
            slopes = ', '.join(f"{a}: {s:.4f}" for a, s in sorted(report.curve.slopes.items()))
            return f"seed {report.seed}: slopes (mg/mL per AU*min) {slopes}"
        return f"seed {report.seed}: {report.n_correct}/{report.n_total} correct"

    def write_sweep(self, experiment, results, out):
        if experiment == 'calibrate':
            frame = pd.DataFrame([{'seed': r.seed, **{f"slope_{a}": s for a, s in r.curve.slopes.items()}}
                                  for r in results])
        else:
            frame = pd.DataFrame([{'seed': r.seed, 'correct': r.n_correct, 'total': r.n_total} for r in results])
        reports.write_csv(frame, out / 'sweep.csv')
        if experiment == 'mnist':
            table = pd.Series(majority_table(results)).rename('majority_label').rename_axis(['classifier', 'image'])
            reports.write_csv(table.reset_index(), out / 'majority.csv')

    def calibrate_noise(self, config):
        if config.experiment != 'validate':
            self.stderr.write(self.style.WARNING("--calibrate-noise only applies to validate; ignored"))
            return None
        out = reports.ensure_dir(config.out_dir)
        calibration = calibrate_noise(config.seeds)
        reports.write_json(calibration.to_dict(), out / 'noise_calibration.json')
        self.report(
            f"pipette cv {calibration.pipette_cv:.4f} gives differential 3 sigma {calibration.three_sigma:.4f} mg/mL"
        )
