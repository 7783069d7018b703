"""
Django settings for the chemlab project.

The project has no web surface: Django provides configuration, logging, the
management-command CLI, the run ledger database and the test runner.

Simulator defaults live in the CHEMLAB dict at the bottom of this file. Every
config object in the apps reads its own section through a ``from_settings()``
constructor, so tests can swap values with ``override_settings``.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: nothing here is served, but Django still requires a key.
SECRET_KEY = os.getenv('CHEMLAB_SECRET_KEY', 'chemlab-insecure-3v9#x1m!q4t@b7r2w8k0p6z5')

DEBUG = os.getenv('CHEMLAB_DEBUG', '') == '1'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',

    # Local apps
    'mixtures',
    'encoding',
    'perceptron',
    'protocols',
    'robot',
    'hplc',
    'readout',
    'experiments',
]


# Database
# The run ledger (experiments app) is the only thing stored.

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.getenv('CHEMLAB_DB_PATH', BASE_DIR / 'db.sqlite3'),
    }
}


# Internationalization

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Default primary key field type

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': os.getenv('CHEMLAB_LOG_LEVEL', 'WARNING'),
    },
}


# Simulator defaults
# Units: volumes in µL, masses in mg, concentrations in mg/mL, times in
# minutes unless the key says otherwise, peak areas in AU·min.

CHEMLAB = {
    'PLATE': {
        # 384-well data plate
        'rows': 16,
        'cols': 24,
        'capacity_ul': 120.0,
    },
    'POOL_PLATE': {
        # 96-well deep-well plate receiving the pooled outputs
        'rows': 8,
        'cols': 12,
        'capacity_ul': 2000.0,
    },
    'ANALYTES': [
        {'id': 1, 'name': '2,4,6-tri-tert-butylphenol', 'stock_mg_ml': 62.5},
        {'id': 2, 'name': '2,6-dimethylphenol', 'stock_mg_ml': 62.5},
        {'id': 3, 'name': '4-nitrophenol', 'stock_mg_ml': 62.5},
    ],
    'ENCODING': {
        'write_volume_ul': 20.0,
        'solvent': 'DMSO',
        # analyte id pairs known to react with each other, e.g. [(1, 2)]
        'reactive_pairs': [],
    },
    'COMPILER': {
        'v_o_ul': 6.25,
        'pipette_resolution_ul': 0.05,
        'min_transfer_ul': 0.5,
        'pool_volume_ul': 'auto',
        'pool_step_ul': 5.0,
        'quantize': True,
        'tip_policy': 'per-source',
        'seconds_per_transfer': 45.0,
    },
    'NOISE': {
        'enabled': True,
        'pipette_cv': 0.02,
        'pipette_bias': 0.0,
    },
    'HPLC': {
        'sample_period_s': 0.5,
        'run_length_min': 12.5,
        'injection_cv': 0.01,
        'drift_cv': 0.01,
        'baseline_noise_au': 1e-4,
        'baseline_window_s': 30.0,
        'window_sigmas': 3.0,
        'injection_volume_ul': 5.0,
        # pool samples are made up this many fold with solvent before injection so
        # the pooled peaks stay in the detector's linear range
        'sample_dilution': 10.0,
        # Retention times and pulse width from the 12.5 min water/acetonitrile
        # gradient; gains are the 214 nm responses.
        'PROFILES': {
            1: {'retention_min': 3.41, 'sigma_min': 0.0375, 'gain': 0.020, 'saturation_area': 2.0},
            2: {'retention_min': 4.53, 'sigma_min': 0.0375, 'gain': 0.030, 'saturation_area': 3.0},
            3: {'retention_min': 9.31, 'sigma_min': 0.0375, 'gain': 0.035, 'saturation_area': 3.5},
        },
    },
    'CALIBRATION': {
        'stock_mg_ml': 12.0,
        'dilution_steps': 11,
        'dilution_factor': 2.0,
        'sample_volume_ul': 100.0,
        # fraction of each analyte's saturation_area above which ladder points
        # are left out of the linear fit
        'saturation_cutoff': 0.01,
    },
    'VALIDATION': {
        'trials': 16,
        'n_bits': 16,
        'pool_volume_ul': 100.0,
        'boundary_fraction': 0.1,
        'boundary_floor': 0.02,
        'strong_fraction': 0.3,
        'max_attempts': 2000,
        'target_three_sigma': 0.3,
        # JSON list of {weights, vectors, kinds}; trials are generated from the seed when unset
        'trials_file': None,
    },
    'MNIST': {
        'fixtures_dir': BASE_DIR / 'experiments' / 'fixtures',
        'digits': ['0', '1', '2'],
        'images': [('zero_a', '0'), ('zero_b', '0'), ('one', '1')],
        'train_images': None,
        'train_labels': None,
        'train_per_class': 100,
        'epochs': 100,
        'learning_rate': 1.0,
        # digit classifiers are trained through the origin so no bias well is needed
        'fit_bias': False,
    },
    'OUTPUT': {
        'dir': BASE_DIR / 'out',
        'float_format': '%.6f',
    },
}
