"""
Binary datasets and their file formats.

A dataset is one bit vector bound to the analyte that will carry it. Files
are either JSON (``{"analyte": 1, "bits": [0, 1, ...]}`` or a list of such
objects) or a plain text grid of 0/1 characters, one image row per line.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from mixtures.solutions import AnalyteRegistry

from .exceptions import AnalyteCollision, DatasetMismatch, MalformedDataset


@dataclass(frozen=True)
class Dataset:
    analyte: int
    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise MalformedDataset(f"dataset for analyte {self.analyte} has no bits", analyte=self.analyte)
        if any(b not in (0, 1) for b in bits):
            raise MalformedDataset(f"dataset for analyte {self.analyte} is not binary", analyte=self.analyte)
        object.__setattr__(self, 'bits', bits)
        object.__setattr__(self, 'analyte', int(self.analyte))

    @property
    def n_bits(self):
        return len(self.bits)

    def as_array(self):
        return np.array(self.bits, dtype=float)

    def to_dict(self):
        return {'analyte': self.analyte, 'bits': list(self.bits)}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(analyte=data['analyte'], bits=data['bits'])
        except (KeyError, TypeError, ValueError) as err:
            if isinstance(err, MalformedDataset):
                raise
            raise MalformedDataset(f"bad dataset record: {err}") from None


def check_batch(datasets, registry=None):
    """A batch shares its length and uses each registered analyte at most once"""
    datasets = list(datasets)
    if not datasets:
        raise DatasetMismatch("no datasets to encode")
    lengths = {d.n_bits for d in datasets}
    if len(lengths) > 1:
        raise DatasetMismatch(f"datasets differ in length: {sorted(lengths)}", lengths=sorted(lengths))
    seen = set()
    for dataset in datasets:
        if dataset.analyte in seen:
            raise AnalyteCollision(f"analyte {dataset.analyte} carries two datasets", analyte=dataset.analyte)
        seen.add(dataset.analyte)
    registry = registry if registry is not None else AnalyteRegistry.from_settings()
    for analyte_id in seen:
        registry[analyte_id]
    return datasets


def load_dataset_json(path):
    """Read one dataset or a list of datasets from a JSON file"""
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except json.JSONDecodeError as err:
        raise MalformedDataset(f"{path}: {err}", path=str(path)) from None
    records = data if isinstance(data, list) else [data]
    return [Dataset.from_dict(record) for record in records]


def write_dataset_json(datasets, path):
    Path(path).write_text(json.dumps([d.to_dict() for d in datasets]) + '\n', encoding='utf-8')


def parse_grid(text):
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise MalformedDataset("empty image grid")
    if len({len(row) for row in rows}) > 1:
        raise MalformedDataset("image grid rows differ in length")
    if any(ch not in '01' for row in rows for ch in row):
        raise MalformedDataset("image grid may only contain 0 and 1")
    return tuple(int(ch) for row in rows for ch in row)


def load_grid(path):
    """Bits of a text grid image, row-major"""
    return parse_grid(Path(path).read_text(encoding='utf-8'))


def load_grid_png(path, size=None):
    """Bits of a PNG image: pixels at or above half of the maximum are 1"""
    with Image.open(path) as image:
        image = image.convert('L')
        if size is not None:
            image = image.resize((size, size), Image.Resampling.NEAREST)
        pixels = np.asarray(image, dtype=float)
    peak = pixels.max()
    if peak <= 0:
        return tuple(0 for _ in range(pixels.size))
    return tuple(int(v) for v in (pixels >= 0.5 * peak).ravel())


def grid_text(bits, width):
    return '\n'.join(
        ''.join(str(b) for b in bits[start:start + width]) for start in range(0, len(bits), width)
    ) + '\n'
