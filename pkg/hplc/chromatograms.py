"""
Chromatogram synthesis and peak integration.

A measured sample is the sum of one Gaussian pulse per profiled analyte,
each with the area the detector reports for that analyte's concentration,
plus white baseline noise. Injection-volume error and slow gain drift scale
every peak of a run by the same factor.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings
from scipy.integrate import trapezoid
from scipy.stats import norm

from chemlab.plotting import new_figure, save_svg
from mixtures.exceptions import EmptySolution

from .exceptions import WindowOutOfRange

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InjectionModel:
    injection_cv: float = 0.01
    drift_cv: float = 0.01
    baseline_noise: float = 1e-4
    enabled: bool = True

    def __post_init__(self):
        if min(self.injection_cv, self.drift_cv, self.baseline_noise) < 0:
            raise ValueError("injection noise parameters must be non-negative")

    @classmethod
    def from_settings(cls, enabled=None):
        section = settings.CHEMLAB['HPLC']
        return cls(
            injection_cv=float(section['injection_cv']),
            drift_cv=float(section['drift_cv']),
            baseline_noise=float(section['baseline_noise_au']),
            enabled=settings.CHEMLAB['NOISE']['enabled'] if enabled is None else enabled,
        )

    @classmethod
    def off(cls):
        return cls(enabled=False)


@dataclass
class Chromatogram:
    absorbance: np.ndarray
    sample_period_s: float = 0.5
    label: str = ''

    def __post_init__(self):
        self.absorbance = np.asarray(self.absorbance, dtype=float)
        if not np.all(np.isfinite(self.absorbance)):
            raise ValueError("chromatogram contains non-finite samples")

    def __len__(self):
        return len(self.absorbance)

    @property
    def times(self):
        """Sample times in minutes"""
        return np.arange(len(self.absorbance)) * self.sample_period_s / 60.0

    @property
    def run_length(self):
        return (len(self.absorbance) - 1) * self.sample_period_s / 60.0

    def to_frame(self):
        return pd.DataFrame({'time_min': self.times, 'absorbance_au': self.absorbance})

    def to_csv(self, path, float_format='%.6f'):
        self.to_frame().to_csv(path, index=False, float_format=float_format, lineterminator='\n')

    @classmethod
    def from_csv(cls, path, label=''):
        frame = pd.read_csv(path)
        times = frame['time_min'].to_numpy()
        # the time column is rounded on write; take the period from the full span
        period = float(np.round((times[-1] - times[0]) * 60.0 / (len(times) - 1), 6)) if len(times) > 1 else 0.5
        return cls(frame['absorbance_au'].to_numpy(), sample_period_s=period, label=label or Path(path).stem)

    def to_svg(self, path, profile=None):
        fig, ax = new_figure()
        ax.plot(self.times, self.absorbance, linewidth=0.8, color='black')
        if profile is not None:
            for peak in profile:
                ax.axvline(peak.retention_time, linestyle=':', linewidth=0.6, color='grey')
                ax.annotate(str(peak.analyte), (peak.retention_time, ax.get_ylim()[1]),
                            ha='center', va='top', fontsize=8)
        ax.set_xlabel('Time (min)')
        ax.set_ylabel('Absorbance (AU)')
        if self.label:
            ax.set_title(self.label)
        return save_svg(fig, path)


def sample_count(profile):
    return int(round(profile.run_length * 60.0 / profile.sample_period_s)) + 1


def measure(sol, profile, inj=None, seed=None, label=''):
    """Synthesize the chromatogram of one injection of ``sol``.

    ``seed`` may be an int, a SeedSequence or a Generator. Draw order is
    gain drift, injection error, then the baseline noise trace.
    """
    if sol.volume <= 0:
        raise EmptySolution("cannot inject an empty sample")
    inj = inj if inj is not None else InjectionModel.from_settings()
    rng = np.random.default_rng(seed)
    times = np.arange(sample_count(profile)) * profile.sample_period_s / 60.0
    drift = inj.drift_cv * rng.standard_normal() if inj.enabled else 0.0
    injected = inj.injection_cv * rng.standard_normal() if inj.enabled else 0.0
    scale = max((1.0 + drift) * (1.0 + injected), 0.0)
    signal = np.zeros_like(times)
    for peak in profile:
        concentration = sol.concentration(peak.analyte)
        if concentration <= 0:
            continue
        area = peak.saturate(peak.linear_area(concentration) * scale)
        signal += area * norm.pdf(times, loc=peak.retention_time, scale=peak.peak_sigma)
    if inj.enabled and inj.baseline_noise > 0:
        signal += rng.normal(0.0, inj.baseline_noise, size=times.shape)
    return Chromatogram(signal, profile.sample_period_s, label=label)


def peak_height(area, sigma):
    return area / (sigma * math.sqrt(2 * math.pi))


def integrate_peak(chrom, window, baseline_window_s=30.0):
    """Trapezoidal area of the baseline-subtracted trace over ``window`` (minutes).

    The baseline is the median of the first ``baseline_window_s`` seconds;
    window edges are interpolated so the result does not jump with sampling.
    """
    lo, hi = window
    times = chrom.times
    if len(times) < 2 or lo >= hi or lo < times[0] or hi > times[-1]:
        raise WindowOutOfRange(
            f"window {lo:.3f}-{hi:.3f} min is outside the {chrom.run_length:.2f} min run",
            window=[lo, hi], run_length=chrom.run_length,
        )
    head = chrom.absorbance[times <= baseline_window_s / 60.0]
    baseline = float(np.median(head)) if len(head) else 0.0
    trace = chrom.absorbance - baseline
    inside = (times > lo) & (times < hi)
    t = np.concatenate(([lo], times[inside], [hi]))
    y = np.concatenate(([np.interp(lo, times, trace)], trace[inside], [np.interp(hi, times, trace)]))
    return float(trapezoid(y, t))


def integrate_all(chrom, profile):
    """Area for every profiled analyte"""
    if profile.overlaps():
        logger.warning("integration windows overlap for %s", profile.overlaps())
    return {
        analyte_id: integrate_peak(chrom, profile.window(analyte_id), profile.baseline_window_s)
        for analyte_id in profile.analytes
    }
