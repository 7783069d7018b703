"""
Random-vector validation.

Every trial draws a 16-input weight vector and three bit vectors chosen by
their margin: one strongly below the boundary, one close to it and one
strongly above. The three vectors are written as three analytes on one
plate and classified together by a single pooling program.
"""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings

from chemlab.seeding import seed_sequence
from encoding.datasets import Dataset
from encoding.plans import layout
from hplc.chromatograms import InjectionModel
from hplc.profiles import HplcProfile
from mixtures.solutions import AnalyteRegistry
from perceptron.classifiers import TrainedClassifier
from protocols.compiler import CompileConfig, realizable
from readout.differential import error_statistics, results_frame
from robot.executor import NoiseModel

from . import reports
from .calibration import calibrate_instrument
from .exceptions import MissingFixtures
from .pipeline import run_pipeline

logger = logging.getLogger(__name__)

KINDS = ('mismatch', 'boundary', 'match')


@dataclass(frozen=True)
class TrialSpec:
    weights: tuple
    vectors: tuple
    kinds: tuple = KINDS

    def classifier(self, name='trial'):
        return TrainedClassifier(np.array(self.weights), 0.0, foreground=name)

    def to_dict(self):
        return {'weights': list(self.weights), 'vectors': [list(v) for v in self.vectors], 'kinds': list(self.kinds)}

    @classmethod
    def from_dict(cls, data):
        return cls(
            weights=tuple(float(w) for w in data['weights']),
            vectors=tuple(tuple(int(b) for b in v) for v in data['vectors']),
            kinds=tuple(data.get('kinds', KINDS)),
        )


def reach(weights):
    """Largest |w·x| any bit vector can reach"""
    weights = np.asarray(weights)
    return max(weights[weights > 0].sum(), -weights[weights < 0].sum())


def _accepts(kind, z, span, section):
    if kind == 'mismatch':
        return z <= -section['strong_fraction'] * span
    if kind == 'match':
        return z >= section['strong_fraction'] * span
    return section['boundary_floor'] * span < abs(z) <= section['boundary_fraction'] * span


def draw_trial(rng, n_bits, compile_cfg, section):
    """Weights in [-1, 1] snapped to realizable volumes, vectors by rejection sampling"""
    while True:
        raw = TrainedClassifier(rng.uniform(-1.0, 1.0, n_bits))
        weights = realizable(raw, compile_cfg).weights
        span = reach(weights)
        if span <= 0:
            continue
        vectors = []
        for kind in KINDS:
            for _ in range(int(section['max_attempts'])):
                bits = rng.integers(0, 2, n_bits)
                if _accepts(kind, float(weights @ bits), span, section):
                    vectors.append(tuple(int(b) for b in bits))
                    break
            else:
                logger.debug("no %s vector within the attempt budget, redrawing weights", kind)
                break
        if len(vectors) == len(KINDS):
            order = rng.permutation(len(KINDS))
            return TrialSpec(
                weights=tuple(float(w) for w in weights),
                vectors=tuple(vectors[i] for i in order),
                kinds=tuple(KINDS[i] for i in order),
            )


def generate_trials(n_trials, n_bits, seed, compile_cfg=None):
    section = settings.CHEMLAB['VALIDATION']
    compile_cfg = compile_cfg or CompileConfig.from_settings()
    rng = np.random.default_rng(seed)
    return [draw_trial(rng, n_bits, compile_cfg, section) for _ in range(n_trials)]


def load_trials(path):
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise MissingFixtures(f"trial file {path} not found", path=str(path)) from None
    return [TrialSpec.from_dict(entry) for entry in data]


def write_trials(trials, path):
    Path(path).write_text(json.dumps([t.to_dict() for t in trials], indent=1) + '\n', encoding='utf-8')


@dataclass
class ValidationReport:
    seed: int
    noise: bool
    trials: list
    rows: list
    cost: object = None
    pipeline_results: list = field(default_factory=list, repr=False)

    experiment = 'validate'

    @property
    def results(self):
        frame = results_frame(self.rows)
        frame['kind'] = [row['kind'] for row in self.rows]
        return frame

    @property
    def n_total(self):
        return len(self.rows)

    @property
    def n_correct(self):
        return int(self.results['correct'].sum())

    @property
    def accuracy(self):
        return self.n_correct / self.n_total if self.n_total else 0.0

    def pool_frame(self):
        return pd.DataFrame(self.rows)[
            ['trial', 'analyte', 'expected_pos', 'measured_pos', 'expected_neg', 'measured_neg']
        ]

    def differential_errors(self):
        return np.array([row['measured_z'] - row['expected_z'] for row in self.rows])

    def concentration_errors(self):
        return np.array(
            [row['measured_pos'] - row['expected_pos'] for row in self.rows]
            + [row['measured_neg'] - row['expected_neg'] for row in self.rows]
        )

    def ledger_rows(self):
        columns = ['trial', 'analyte', 'expected_z', 'measured_z', 'expected_label', 'measured_label', 'correct']
        return [
            {**record, 'trial': str(record['trial']), 'correct': bool(record['correct'])}
            for record in self.results[columns].to_dict(orient='records')
        ]

    def misclassified(self):
        frame = self.results
        return frame[~frame['correct']]

    def summary(self):
        return {
            'experiment': self.experiment,
            'seed': self.seed,
            'noise': self.noise,
            'vectors': self.n_total,
            'correct': self.n_correct,
            'accuracy': self.accuracy,
            'differential_error': error_statistics(self.differential_errors()).to_dict(),
            'concentration_error': error_statistics(self.concentration_errors()).to_dict(),
            'cost': self.cost.to_dict() if self.cost else None,
        }

    def write(self, out_dir):
        out_dir = reports.ensure_dir(out_dir)
        results = self.results
        pools = self.pool_frame()
        reports.write_csv(results, out_dir / 'results.csv')
        reports.write_csv(pools, out_dir / 'pools.csv')
        diff_stats = error_statistics(self.differential_errors())
        conc_stats = error_statistics(self.concentration_errors())
        errors = pd.DataFrame({'differential_error': self.differential_errors()})
        reports.write_csv(errors, out_dir / 'errors.csv')
        reports.scatter_svg(
            list(pools['expected_pos']) + list(pools['expected_neg']),
            list(pools['measured_pos']) + list(pools['measured_neg']),
            out_dir / 'pool_scatter.svg', 'Expected pool (mg/mL)', 'Measured pool (mg/mL)',
        )
        reports.scatter_svg(
            results['expected_z'], results['measured_z'], out_dir / 'differential_scatter.svg',
            'Expected ΔC (mg/mL)', 'Measured ΔC (mg/mL)',
        )
        reports.histogram_svg(self.concentration_errors(), conc_stats, out_dir / 'concentration_errors.svg',
                              'Concentration error (mg/mL)')
        reports.histogram_svg(self.differential_errors(), diff_stats, out_dir / 'differential_errors.svg',
                              'Differential concentration error (mg/mL)')
        write_trials(self.trials, out_dir / 'trials.json')
        if self.cost is not None:
            reports.write_json(self.cost.to_dict(), out_dir / 'cost.json')
        reports.write_json(self.summary(), out_dir / 'summary.json')
        reports.write_xlsx({'results': results, 'pools': pools}, out_dir / 'results.xlsx')
        return out_dir


def run_validation(seed=0, trials=None, noise=None, injection=None, compile_cfg=None, calibration=None,
                   profile=None, registry=None):
    """Classify every trial's three vectors chemically. Uses the active CHEMLAB settings."""
    section = settings.CHEMLAB['VALIDATION']
    compile_cfg = compile_cfg or CompileConfig.from_settings(pool_volume=float(section['pool_volume_ul']))
    noise = noise if noise is not None else NoiseModel.from_settings()
    injection = injection if injection is not None else InjectionModel.from_settings()
    profile = profile if profile is not None else HplcProfile.from_settings()
    registry = registry if registry is not None else AnalyteRegistry.from_settings()
    calibration = calibration if calibration is not None else calibrate_instrument(profile)
    trial_seed, run_seed = seed_sequence(seed).spawn(2)
    if trials is None:
        if section.get('trials_file'):
            trials = load_trials(section['trials_file'])
        else:
            trials = generate_trials(int(section['trials']), int(section['n_bits']), trial_seed, compile_cfg)
    analyte_ids = registry.ids[:len(KINDS)]
    plan = layout(len(trials[0].weights))
    rows = []
    cost = None
    results = []
    for number, (trial, child) in enumerate(zip(trials, run_seed.spawn(len(trials))), start=1):
        datasets = [Dataset(analyte, bits) for analyte, bits in zip(analyte_ids, trial.vectors)]
        result = run_pipeline(
            datasets, [trial.classifier(f"trial {number}")], plan, seed=child, compile_cfg=compile_cfg,
            noise=noise, injection=injection, profile=profile, calibration=calibration, registry=registry,
        )
        kinds = dict(zip(analyte_ids, trial.kinds))
        for row in result.rows(trial=number):
            row['kind'] = kinds[row['analyte']]
            rows.append(row)
        cost = result.cost if cost is None else cost.merge(result.cost)
        results.append(result)
    report = ValidationReport(seed, noise.enabled, list(trials), rows, cost, results)
    logger.info("validation seed %s: %d/%d correct", seed, report.n_correct, report.n_total)
    return report


def run_sweep(seeds, **kwargs):
    """One validation report per seed, in seed order"""
    return [run_validation(seed=seed, **kwargs) for seed in seeds]


@dataclass
class NoiseCalibration:
    pipette_cv: float
    three_sigma: float
    history: list

    def to_dict(self):
        return {'pipette_cv': self.pipette_cv, 'three_sigma': self.three_sigma, 'history': self.history}


def calibrate_noise(seeds, target=None, low=0.0, high=0.1, iterations=8, **kwargs):
    """Bisect the pipette cv so the pooled differential-error 3σ hits ``target``"""
    target = target if target is not None else float(settings.CHEMLAB['VALIDATION']['target_three_sigma'])
    base = NoiseModel.from_settings(enabled=True)
    history = []

    def spread(cv):
        sweep = run_sweep(seeds, noise=replace(base, pipette_cv=cv), injection=InjectionModel.from_settings(True),
                          **kwargs)
        errors = np.concatenate([report.differential_errors() for report in sweep])
        three_sigma = error_statistics(errors).three_sigma
        history.append({'pipette_cv': cv, 'three_sigma': three_sigma})
        logger.info("pipette cv %.4f -> differential 3 sigma %.4f", cv, three_sigma)
        return three_sigma

    for _ in range(iterations):
        middle = (low + high) / 2
        if spread(middle) < target:
            low = middle
        else:
            high = middle
    cv = (low + high) / 2
    return NoiseCalibration(cv, spread(cv), history)
