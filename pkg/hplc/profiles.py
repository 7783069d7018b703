"""
Per-analyte detector profiles.

Each analyte elutes as a Gaussian pulse at a fixed retention time. Its peak
area is proportional to concentration (``response_gain``, AU·min per mg/mL)
until the detector saturates; saturation is a monotone soft clip
A_sat·(1 − exp(−A/A_sat)).
"""

import logging
import math
from dataclasses import dataclass, replace

from django.conf import settings

from .exceptions import MissingCalibration

logger = logging.getLogger(__name__)

# retention times closer than this many peak widths are not resolvable
SEPARATION_SIGMAS = 4.0


@dataclass(frozen=True)
class PeakProfile:
    analyte: int
    retention_time: float
    peak_sigma: float
    response_gain: float
    saturation_area: float | None = None

    def __post_init__(self):
        if self.retention_time <= 0 or self.peak_sigma <= 0:
            raise ValueError(f"retention time and peak width must be positive (analyte {self.analyte})")
        if self.response_gain <= 0:
            raise ValueError(f"response gain must be positive (analyte {self.analyte})")
        if self.saturation_area is not None and self.saturation_area <= 0:
            raise ValueError(f"saturation area must be positive (analyte {self.analyte})")

    def window(self, sigmas=3.0):
        return (self.retention_time - sigmas * self.peak_sigma, self.retention_time + sigmas * self.peak_sigma)

    def saturate(self, area):
        if self.saturation_area is None:
            return area
        return self.saturation_area * -math.expm1(-area / self.saturation_area)

    def linear_area(self, concentration):
        return self.response_gain * concentration

    def area(self, concentration):
        return self.saturate(self.linear_area(concentration))


class HplcProfile:
    """The instrument method: run length, sampling and every analyte's peak"""

    def __init__(self, peaks, run_length=12.5, sample_period_s=0.5, window_sigmas=3.0, baseline_window_s=30.0):
        self.peaks = {peak.analyte: peak for peak in peaks}
        if len(self.peaks) != len(peaks):
            raise ValueError("two peak profiles for the same analyte")
        self.run_length = float(run_length)
        self.sample_period_s = float(sample_period_s)
        self.window_sigmas = float(window_sigmas)
        self.baseline_window_s = float(baseline_window_s)
        for a, b in self.overlaps():
            logger.warning("analytes %s and %s elute too close together to resolve", a, b)

    @classmethod
    def from_settings(cls):
        section = settings.CHEMLAB['HPLC']
        peaks = [
            PeakProfile(
                analyte=int(analyte_id),
                retention_time=float(entry['retention_min']),
                peak_sigma=float(entry['sigma_min']),
                response_gain=float(entry['gain']),
                saturation_area=entry.get('saturation_area'),
            )
            for analyte_id, entry in section['PROFILES'].items()
        ]
        return cls(
            peaks,
            run_length=section['run_length_min'],
            sample_period_s=section['sample_period_s'],
            window_sigmas=section['window_sigmas'],
            baseline_window_s=section['baseline_window_s'],
        )

    def __getitem__(self, analyte_id):
        try:
            return self.peaks[analyte_id]
        except KeyError:
            raise MissingCalibration(f"no peak profile for analyte {analyte_id}", analyte=analyte_id) from None

    def __contains__(self, analyte_id):
        return analyte_id in self.peaks

    def __iter__(self):
        return iter(sorted(self.peaks.values(), key=lambda p: p.analyte))

    @property
    def analytes(self):
        return sorted(self.peaks)

    @property
    def max_sigma(self):
        return max((p.peak_sigma for p in self.peaks.values()), default=0.0)

    def overlaps(self):
        """Analyte pairs whose retention times are not resolvable"""
        gap = SEPARATION_SIGMAS * self.max_sigma
        ordered = list(self)
        return [
            (a.analyte, b.analyte)
            for i, a in enumerate(ordered)
            for b in ordered[i + 1:]
            if abs(a.retention_time - b.retention_time) < gap
        ]

    def window(self, analyte_id):
        return self[analyte_id].window(self.window_sigmas)

    def linear(self):
        """The same method with detector saturation switched off"""
        return HplcProfile(
            [replace(p, saturation_area=None) for p in self],
            run_length=self.run_length,
            sample_period_s=self.sample_period_s,
            window_sigmas=self.window_sigmas,
            baseline_window_s=self.baseline_window_s,
        )


def resolvable_capacity(profile):
    """How many analytes fit in one run at one resolvable peak spacing apart"""
    return int(profile.run_length // (SEPARATION_SIGMAS * profile.max_sigma))
