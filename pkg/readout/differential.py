"""
From two quantified pools to class labels.

z_m = C_m+ − C_m− is reported in mg/mL. It differs from the dimensionless
w·x by the positive factor C_written·V_o/V_p, which never changes a label.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import norm

from perceptron.classifiers import threshold

from .exceptions import KeyMismatch

RESULT_COLUMNS = [
    'trial', 'analyte', 'expected_z', 'measured_z', 'expected_label', 'measured_label', 'correct',
]


@dataclass(frozen=True)
class PoolPair:
    positive: dict
    negative: dict
    pool_volume: float

    def __post_init__(self):
        if set(self.positive) != set(self.negative):
            raise KeyMismatch(
                "positive and negative pools report different analytes",
                positive=sorted(self.positive), negative=sorted(self.negative),
            )
        if self.pool_volume <= 0:
            raise ValueError("pool volume must be positive")

    def swapped(self):
        return PoolPair(self.negative, self.positive, self.pool_volume)


@dataclass(frozen=True)
class DifferentialResult:
    z: dict
    labels: dict

    def __getitem__(self, analyte_id):
        return self.z[analyte_id]


def differential(p):
    z = {analyte_id: p.positive[analyte_id] - p.negative[analyte_id] for analyte_id in sorted(p.positive)}
    return DifferentialResult(z=z, labels={analyte_id: threshold(value) for analyte_id, value in z.items()})


def results_frame(rows):
    """Results table from dicts carrying trial, analyte, expected_z and measured_z"""
    records = []
    for row in rows:
        expected_label = threshold(row['expected_z'])
        measured_label = threshold(row['measured_z'])
        records.append({
            'trial': row['trial'],
            'analyte': row['analyte'],
            'expected_z': row['expected_z'],
            'measured_z': row['measured_z'],
            'expected_label': expected_label.value,
            'measured_label': measured_label.value,
            'correct': expected_label == measured_label,
        })
    return pd.DataFrame(records, columns=RESULT_COLUMNS)


@dataclass(frozen=True)
class ErrorStatistics:
    n: int
    mean: float
    sd: float

    @property
    def three_sigma(self):
        return 3.0 * self.sd

    def to_dict(self):
        return {'n': self.n, 'mean': self.mean, 'sd': self.sd, 'three_sigma': self.three_sigma}


def error_statistics(errors):
    """Normal fit (maximum likelihood) of measured minus expected values"""
    errors = np.asarray(list(errors), dtype=float)
    if len(errors) == 0:
        return ErrorStatistics(0, 0.0, 0.0)
    mean, sd = norm.fit(errors)
    return ErrorStatistics(len(errors), float(mean), float(sd))
