"""
Perceptrons in silico: the electronic reference for every chemical run.

z = w·x + b and the label is Match only when z > 0, so an exact zero is a
Mismatch. Trained weights are rescaled into [-1, 1] because a weight is
realized as a fraction of the maximum per-well draw.
"""

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd
from django.db import models

from .exceptions import LengthMismatch

logger = logging.getLogger(__name__)


class ClassLabel(models.TextChoices):
    MATCH = 'match', 'Match'
    MISMATCH = 'mismatch', 'Mismatch'


def threshold(z):
    return ClassLabel.MATCH if z > 0 else ClassLabel.MISMATCH


def as_label(value):
    if isinstance(value, (bool, np.bool_)):
        return ClassLabel.MATCH if value else ClassLabel.MISMATCH
    return ClassLabel(value)


@dataclass
class TrainedClassifier:
    weights: np.ndarray
    bias: float = 0.0
    foreground: str = ''
    training_accuracy: float | None = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        self.bias = float(self.bias)

    def __len__(self):
        return len(self.weights)

    @property
    def n_inputs(self):
        return len(self.weights)

    @property
    def scale(self):
        """Largest magnitude among the weights and the bias"""
        return max(float(np.max(np.abs(self.weights), initial=0.0)), abs(self.bias))

    @property
    def is_normalized(self):
        return self.scale <= 1.0 + 1e-12

    def predict(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if len(x) != len(self.weights):
            raise LengthMismatch(
                f"classifier takes {len(self.weights)} inputs, got {len(x)}",
                expected=len(self.weights), got=len(x),
            )
        return float(np.dot(self.weights, x) + self.bias)

    def classify(self, x):
        return threshold(self.predict(x))

    def accuracy(self, features, labels):
        labels = [as_label(label) for label in labels]
        if not labels:
            return 0.0
        hits = sum(self.classify(x) == label for x, label in zip(features, labels))
        return hits / len(labels)

    def normalized(self):
        """Positively rescaled copy with every weight and the bias in [-1, 1]"""
        scale = self.scale
        if scale == 0:
            return replace(self, weights=self.weights.copy())
        return replace(self, weights=self.weights / scale, bias=self.bias / scale)

    def weight_map(self, width=None):
        width = width or int(round(np.sqrt(len(self.weights))))
        if len(self.weights) % width:
            raise LengthMismatch(f"{len(self.weights)} weights do not form rows of {width}")
        return self.weights.reshape(-1, width)

    def weight_map_csv(self, path, width=None, float_format='%.6f'):
        pd.DataFrame(self.weight_map(width)).to_csv(
            path, header=False, index=False, float_format=float_format, lineterminator='\n',
        )

    def to_dict(self):
        data = {'weights': self.weights.tolist(), 'bias': self.bias, 'foreground': self.foreground}
        if self.training_accuracy is not None:
            data['training_accuracy'] = self.training_accuracy
        return data

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data):
        return cls(
            weights=data['weights'],
            bias=data.get('bias', 0.0),
            foreground=str(data.get('foreground', '')),
            training_accuracy=data.get('training_accuracy'),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def write(self, path):
        Path(path).write_text(self.to_json() + '\n', encoding='utf-8')

    @classmethod
    def read(cls, path):
        return cls.from_json(Path(path).read_text(encoding='utf-8'))

    @classmethod
    def from_weight_csv(cls, path, foreground='', bias=0.0):
        grid = pd.read_csv(path, header=None).to_numpy(dtype=float)
        return cls(grid.ravel(), bias=bias, foreground=foreground)


def predict(w, x):
    return w.predict(x)


def train(features, labels, epochs=100, learning_rate=1.0, seed=0, foreground='', fit_bias=True):
    """Rosenblatt perceptron, w += lr·(t − ŷ)·x, visiting samples in a seeded order.

    Stops at the first error-free epoch. On data that is not linearly
    separable the best epoch seen is kept. The result is normalized.
    With ``fit_bias=False`` the bias stays 0 and the boundary passes
    through the origin.
    """
    X = np.asarray([np.asarray(x, dtype=float).ravel() for x in features])
    if len(X) == 0:
        raise ValueError("no training samples")
    labels = [as_label(label) for label in labels]
    if len(labels) != len(X):
        raise LengthMismatch(f"{len(X)} samples but {len(labels)} labels", samples=len(X), labels=len(labels))
    targets = np.array([label == ClassLabel.MATCH for label in labels], dtype=float)
    rng = np.random.default_rng(seed)
    w = np.zeros(X.shape[1])
    b = 0.0
    best = (-1.0, w.copy(), b)
    for epoch in range(epochs):
        mistakes = 0
        for i in rng.permutation(len(X)):
            predicted = 1.0 if np.dot(w, X[i]) + b > 0 else 0.0
            if predicted != targets[i]:
                step = learning_rate * (targets[i] - predicted)
                w += step * X[i]
                if fit_bias:
                    b += step
                mistakes += 1
        accuracy = float(np.mean(((X @ w + b) > 0) == (targets > 0)))
        if accuracy > best[0]:
            best = (accuracy, w.copy(), b)
        if mistakes == 0:
            logger.debug("perceptron %r converged after %d epochs", foreground, epoch + 1)
            break
    accuracy, w, b = best
    logger.info("perceptron %r: training accuracy %.3f", foreground, accuracy)
    return TrainedClassifier(w, b, foreground=foreground, training_accuracy=accuracy).normalized()


def one_vs_all(features, labels, classes, **kwargs):
    """One classifier per class: that class is Match, every other class Mismatch"""
    return {
        target: train(features, [label == target for label in labels], foreground=target, **kwargs)
        for target in classes
    }
