"""
Experiment configuration.

Defaults come from ``settings.CHEMLAB``. A TOML file may override any of it;
its tables are the CHEMLAB sections in lower case::

    experiment = "validate"
    seeds = [0, 1, 2]

    [compiler]
    v_o_ul = 5.0

    [hplc.profiles.1]
    gain = 0.025

Command-line flags (--seed, --noise, --out) are applied last.
"""

import copy

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from django.conf import settings
from django.test.utils import override_settings

from chemlab.exceptions import ConfigError

EXPERIMENTS = ('mnist', 'validate', 'calibrate')
TOP_LEVEL_KEYS = {'experiment', 'seeds', 'seed', 'noise', 'out'}
PATH_KEYS = {'fixtures_dir', 'train_images', 'train_labels', 'dir', 'trials_file'}


def _merge_section(name, base, values):
    merged = copy.deepcopy(base)
    for key, value in values.items():
        upper = key.upper()
        if upper == 'PROFILES' and isinstance(value, dict):
            profiles = merged.setdefault('PROFILES', {})
            for analyte_id, entry in value.items():
                try:
                    analyte_id = int(analyte_id)
                except ValueError:
                    raise ConfigError(f"profile key {analyte_id!r} is not an analyte id") from None
                profiles[analyte_id] = {**profiles.get(analyte_id, {}), **entry}
            continue
        if key not in base and key not in PATH_KEYS:
            raise ConfigError(f"unknown key {key!r} in [{name.lower()}]", section=name.lower(), key=key)
        merged[key] = Path(value) if key in PATH_KEYS and value is not None else value
    return merged


def merge_chemlab(base, overrides):
    """Return a copy of ``base`` with the TOML ``overrides`` applied"""
    merged = copy.deepcopy(base)
    for section, values in overrides.items():
        name = section.upper()
        if name not in base:
            raise ConfigError(f"unknown config section [{section}]", section=section)
        if name == 'ANALYTES':
            if not isinstance(values, list):
                raise ConfigError("[[analytes]] must be an array of tables")
            merged[name] = [dict(entry) for entry in values]
            continue
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table", section=section)
        merged[name] = _merge_section(name, base[name], values)
    return merged


@dataclass
class ExperimentConfig:
    experiment: str = 'validate'
    seeds: list = field(default_factory=lambda: [0])
    noise: bool = True
    out_dir: Path | None = None
    chemlab: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}, expected one of {', '.join(EXPERIMENTS)}",
                experiment=self.experiment,
            )
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        self.seeds = [int(seed) for seed in self.seeds]
        if not self.chemlab:
            self.chemlab = copy.deepcopy(settings.CHEMLAB)
        self.chemlab['NOISE'] = {**self.chemlab['NOISE'], 'enabled': bool(self.noise)}
        if self.out_dir is None:
            self.out_dir = Path(self.chemlab['OUTPUT']['dir'])
        self.out_dir = Path(self.out_dir)

    @property
    def seed(self):
        return self.seeds[0]

    def section(self, name):
        return self.chemlab[name]

    @contextmanager
    def applied(self):
        """Make this configuration the active CHEMLAB settings"""
        with override_settings(CHEMLAB=self.chemlab):
            yield self


def load_toml(path):
    try:
        with open(path, 'rb') as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found", path=str(path)) from None
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path}: {err}", path=str(path)) from None


def build_config(experiment='validate', config_path=None, seed=None, seeds=None, noise=None, out=None):
    """Settings defaults, then the TOML file, then explicit arguments"""
    data = load_toml(config_path) if config_path else {}
    top = {key: data.pop(key) for key in list(data) if key in TOP_LEVEL_KEYS}
    for key, value in list(data.items()):
        if not isinstance(value, (dict, list)):
            raise ConfigError(f"unknown top-level key {key!r}", key=key)
    chemlab = merge_chemlab(settings.CHEMLAB, data)
    chosen_seeds = top.get('seeds') or ([top['seed']] if 'seed' in top else [0])
    if seeds is not None:
        chosen_seeds = list(seeds)
    elif seed is not None:
        chosen_seeds = [seed]
    noise_flag = top.get('noise', chemlab['NOISE']['enabled'])
    if noise is not None:
        noise_flag = noise
    return ExperimentConfig(
        experiment=experiment or top.get('experiment', 'validate'),
        seeds=chosen_seeds,
        noise=noise_flag,
        out_dir=out if out is not None else top.get('out'),
        chemlab=chemlab,
    )
