"""
Handwritten-digit classification.

Three 16x16 binary digit images (two zeros and a one) are written on one
plate, one analyte each, and three one-vs-all classifiers ('0', '1', '2')
are run against all of them at once. Classifiers are trained from IDX files
when the MNIST paths are configured, otherwise the bundled weight maps are
used.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings

from encoding.datasets import Dataset, load_grid
from encoding.plans import layout
from encoding.rendering import render_plate
from mixtures.solutions import AnalyteRegistry
from perceptron.classifiers import ClassLabel, TrainedClassifier, threshold, train
from perceptron.images import binarize_resize

from . import reports
from .exceptions import MissingFixtures
from .idx import ingest_idx
from .pipeline import run_pipeline

logger = logging.getLogger(__name__)


def _fixture(path):
    path = Path(path)
    if not path.exists():
        raise MissingFixtures(f"fixture {path} not found", path=str(path))
    return path


def load_images(section=None):
    """(name, digit, bits) for every configured fixture image"""
    section = section or settings.CHEMLAB['MNIST']
    base = Path(section['fixtures_dir'])
    return [(name, str(digit), load_grid(_fixture(base / f"{name}.txt"))) for name, digit in section['images']]


def load_classifiers(section=None):
    section = section or settings.CHEMLAB['MNIST']
    base = Path(section['fixtures_dir'])
    return [
        TrainedClassifier.from_weight_csv(_fixture(base / f"weights_{digit}.csv"), foreground=str(digit))
        for digit in section['digits']
    ]


def training_set(images, labels, digit, per_class, rng):
    """``per_class`` images of ``digit`` and as many of the other digits, binarized to 16x16"""
    digit = int(digit)
    foreground = np.flatnonzero(labels == digit)
    background = np.flatnonzero(labels != digit)
    if len(foreground) < per_class or len(background) < per_class:
        raise MissingFixtures(
            f"the IDX files hold too few images to draw {per_class} of each class for digit {digit}",
            digit=digit, foreground=len(foreground), background=len(background),
        )
    chosen = list(rng.choice(foreground, per_class, replace=False)) + list(rng.choice(background, per_class, replace=False))
    features = [binarize_resize(images[i]) for i in chosen]
    targets = [ClassLabel.MATCH] * per_class + [ClassLabel.MISMATCH] * per_class
    return features, targets


def train_classifiers(section=None, seed=0):
    """One-vs-all classifiers trained on MNIST images read from IDX files"""
    section = section or settings.CHEMLAB['MNIST']
    images = ingest_idx(_fixture(section['train_images']))
    labels = ingest_idx(_fixture(section['train_labels']))
    rng = np.random.default_rng(seed)
    classifiers = []
    for digit in section['digits']:
        features, targets = training_set(images, labels, digit, int(section['train_per_class']), rng)
        classifiers.append(train(
            features, targets,
            epochs=int(section['epochs']),
            learning_rate=float(section['learning_rate']),
            seed=int(rng.integers(2 ** 32)),
            foreground=str(digit),
            fit_bias=bool(section.get('fit_bias', False)),
        ))
    return classifiers


def classifiers_for_run(section=None, seed=0):
    section = section or settings.CHEMLAB['MNIST']
    if section.get('train_images') and section.get('train_labels'):
        return train_classifiers(section, seed)
    return load_classifiers(section)


@dataclass
class MnistReport:
    seed: int
    noise: bool
    images: list
    classifiers: list
    rows: list
    cost: object = None
    result: object = field(default=None, repr=False)

    experiment = 'mnist'

    @property
    def results(self):
        return pd.DataFrame(self.rows, columns=[
            'classifier', 'image', 'digit', 'analyte', 'expected_z', 'measured_z',
            'expected_label', 'measured_label', 'true_label', 'correct',
        ])

    def table(self, column='measured_label'):
        """Classifier rows against image columns"""
        frame = self.results
        table = frame.pivot(index='classifier', columns='image', values=column)
        return table.loc[[c.foreground for c in self.classifiers], [name for name, _, _ in self.images]]

    @property
    def n_correct(self):
        return int(self.results['correct'].sum())

    @property
    def n_total(self):
        return len(self.rows)

    def ledger_rows(self):
        return [
            {
                'trial': f"{row['classifier']}/{row['image']}",
                'analyte': row['analyte'],
                'expected_z': row['expected_z'],
                'measured_z': row['measured_z'],
                'expected_label': row['true_label'],
                'measured_label': row['measured_label'],
                'correct': bool(row['correct']),
            }
            for row in self.rows
        ]

    def summary(self):
        return {
            'experiment': self.experiment,
            'seed': self.seed,
            'noise': self.noise,
            'cells': self.n_total,
            'correct': self.n_correct,
            'table': {k: dict(v) for k, v in self.table().to_dict(orient='index').items()},
            'cost': self.cost.to_dict() if self.cost else None,
        }

    def write(self, out_dir):
        out_dir = reports.ensure_dir(out_dir)
        results = self.results
        reports.write_csv(results, out_dir / 'results.csv')
        table = self.table().reset_index()
        reports.write_csv(table, out_dir / 'table.csv')
        for classifier in self.classifiers:
            classifier.weight_map_csv(out_dir / f"weights_{classifier.foreground}.csv",
                                      float_format=reports.float_format())
            reports.weight_map_svg(classifier, out_dir / f"weights_{classifier.foreground}.svg")
        if self.result is not None:
            for run in self.result.runs:
                for polarity, chrom in run.chromatograms.items():
                    chrom.to_csv(out_dir / f"chromatogram_{run.classifier.foreground}_{polarity}.csv",
                                 reports.float_format())
            self.result.log.to_csv(out_dir / 'execution_log.csv', reports.float_format())
            render_plate(self.result.deck.plate('data')).save(out_dir / 'plate.png')
        if self.cost is not None:
            reports.write_json(self.cost.to_dict(), out_dir / 'cost.json')
        reports.write_json(self.summary(), out_dir / 'summary.json')
        reports.write_xlsx({'results': results, 'table': table}, out_dir / 'results.xlsx')
        return out_dir


def run_mnist(seed=0, classifiers=None, images=None, registry=None, **pipeline_kwargs):
    """Three images, three classifiers, one plate. Uses the active CHEMLAB settings."""
    registry = registry if registry is not None else AnalyteRegistry.from_settings()
    images = images if images is not None else load_images()
    classifiers = classifiers if classifiers is not None else classifiers_for_run(seed=seed)
    if len(images) > len(registry):
        raise MissingFixtures(f"{len(images)} images but only {len(registry)} analytes")
    analytes = registry.ids[:len(images)]
    datasets = [Dataset(analyte, bits) for analyte, (_, _, bits) in zip(analytes, images)]
    plan = layout(len(datasets[0].bits), bias=any(c.bias != 0 for c in classifiers))
    result = run_pipeline(datasets, classifiers, plan, seed=seed, registry=registry, **pipeline_kwargs)
    by_analyte = {analyte: (name, digit) for analyte, (name, digit, _) in zip(analytes, images)}
    rows = []
    for run in result.runs:
        expected_z = run.expected_z
        for analyte in analytes:
            name, digit = by_analyte[analyte]
            true_label = ClassLabel.MATCH if digit == run.classifier.foreground else ClassLabel.MISMATCH
            measured = run.result.labels[analyte]
            rows.append({
                'classifier': run.classifier.foreground,
                'image': name,
                'digit': digit,
                'analyte': analyte,
                'expected_z': expected_z[analyte],
                'measured_z': run.result.z[analyte],
                'expected_label': threshold(expected_z[analyte]).value,
                'measured_label': measured.value,
                'true_label': true_label.value,
                'correct': measured == true_label,
            })
    noise = pipeline_kwargs.get('noise')
    report = MnistReport(
        seed=seed,
        noise=noise.enabled if noise is not None else settings.CHEMLAB['NOISE']['enabled'],
        images=images,
        classifiers=classifiers,
        rows=rows,
        cost=result.cost,
        result=result,
    )
    logger.info("mnist seed %s: %d/%d cells correct", seed, report.n_correct, report.n_total)
    return report


def majority_table(reports_):
    """Most frequent measured label per cell over several seeded runs"""
    votes = {}
    for report in reports_:
        for row in report.rows:
            votes.setdefault((row['classifier'], row['image']), Counter())[row['measured_label']] += 1
    return {cell: counter.most_common(1)[0][0] for cell, counter in votes.items()}
