"""
Zero-intercept calibration curves: concentration = slope · peak area.

Ladder points whose area is above a fraction of the detector's saturation
area are left out of the fit, so the slope describes the linear regime.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings

from chemlab.plotting import new_figure, save_svg

from .chromatograms import integrate_all
from .exceptions import DegenerateSeries, MissingCalibration

logger = logging.getLogger(__name__)

MIN_POINTS = 3


def dilution_ladder(stock, steps=11, factor=2.0):
    """The stock followed by ``steps`` serial dilutions: steps + 1 samples"""
    if stock <= 0 or factor <= 1 or steps < 0:
        raise ValueError("dilution ladder needs a positive stock and a factor above 1")
    return [stock / factor ** k for k in range(steps + 1)]


def fit_slope(series, area_limit=None):
    """Least-squares slope s of C = s·A through the origin, s = ΣAC / ΣA²"""
    points = [(float(c), float(a)) for c, a in series]
    if any(c <= 0 for c, _ in points):
        raise DegenerateSeries("calibration concentrations must be positive")
    if area_limit is not None:
        points = [(c, a) for c, a in points if a <= area_limit]
    if len(points) < MIN_POINTS:
        raise DegenerateSeries(
            f"{len(points)} usable calibration points, {MIN_POINTS} needed", points=len(points),
        )
    conc = np.array([c for c, _ in points])
    area = np.array([a for _, a in points])
    denominator = float(np.dot(area, area))
    if denominator <= 0:
        raise DegenerateSeries("every calibration area is zero")
    slope = float(np.dot(area, conc)) / denominator
    if slope <= 0:
        raise DegenerateSeries(f"non-positive calibration slope {slope:g}")
    return slope


@dataclass
class CalibrationCurve:
    slopes: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)

    def __post_init__(self):
        for analyte_id, slope in self.slopes.items():
            if slope <= 0:
                raise ValueError(f"calibration slope for analyte {analyte_id} must be positive")

    def slope(self, analyte_id):
        try:
            return self.slopes[analyte_id]
        except KeyError:
            raise MissingCalibration(f"analyte {analyte_id} is not calibrated", analyte=analyte_id) from None

    def concentration(self, analyte_id, area):
        return self.slope(analyte_id) * area

    def covers(self, analyte_ids):
        return all(a in self.slopes for a in analyte_ids)

    def residuals(self, analyte_id):
        slope = self.slope(analyte_id)
        return [c - slope * a for c, a in self.series.get(analyte_id, [])]

    def to_dict(self):
        return {
            'units': 'mg/mL per AU*min',
            'slopes': {str(a): s for a, s in sorted(self.slopes.items())},
            'series': {str(a): [[c, area] for c, area in pts] for a, pts in sorted(self.series.items())},
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)

    def write(self, path):
        Path(path).write_text(self.to_json() + '\n', encoding='utf-8')

    @classmethod
    def from_dict(cls, data):
        return cls(
            slopes={int(a): float(s) for a, s in data['slopes'].items()},
            series={int(a): [tuple(p) for p in pts] for a, pts in data.get('series', {}).items()},
        )

    @classmethod
    def read(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding='utf-8')))

    @classmethod
    def ideal(cls, profile):
        """Exact inverse gains, for runs that skip the dilution ladder"""
        return cls({peak.analyte: 1.0 / peak.response_gain for peak in profile})

    def to_frame(self):
        rows = []
        for analyte_id, points in sorted(self.series.items()):
            for conc, area in points:
                rows.append({
                    'analyte': analyte_id,
                    'concentration_mg_ml': conc,
                    'area_au_min': area,
                    'fitted_mg_ml': self.slopes[analyte_id] * area,
                })
        return pd.DataFrame(rows, columns=['analyte', 'concentration_mg_ml', 'area_au_min', 'fitted_mg_ml'])

    def to_svg(self, path, profile=None):
        fig, ax = new_figure(5.0, 3.8)
        for analyte_id, points in sorted(self.series.items()):
            conc = np.array([c for c, _ in points])
            area = np.array([a for _, a in points])
            line = ax.plot(conc, area, 'o', markersize=3, label=f"analyte {analyte_id}")[0]
            grid = np.linspace(0, conc.max(), 50)
            ax.plot(grid, grid / self.slopes[analyte_id], '-', linewidth=0.7, color=line.get_color())
        ax.set_xlabel('Concentration (mg/mL)')
        ax.set_ylabel('Peak area (AU·min)')
        ax.legend(frameon=False)
        return save_svg(fig, path)


def fit_calibration(series, profile=None, cutoff=None):
    """Fit one slope per analyte from ``{analyte: [(concentration, area), ...]}``.

    With a profile, points above ``cutoff`` times the analyte's saturation
    area are excluded.
    """
    if cutoff is None:
        cutoff = settings.CHEMLAB['CALIBRATION']['saturation_cutoff']
    slopes = {}
    for analyte_id, points in sorted(series.items()):
        limit = None
        if profile is not None and analyte_id in profile and profile[analyte_id].saturation_area:
            limit = cutoff * profile[analyte_id].saturation_area
        slopes[analyte_id] = fit_slope(points, area_limit=limit)
        logger.info("analyte %s calibrated: %.4f mg/mL per AU*min", analyte_id, slopes[analyte_id])
    return CalibrationCurve(slopes, {a: list(p) for a, p in series.items()})


def quantify(chrom, cal, profile):
    """Concentration of every profiled analyte from its peak area"""
    missing = [a for a in profile.analytes if a not in cal.slopes]
    if missing:
        raise MissingCalibration(f"no calibration for analytes {missing}", analytes=missing)
    return {a: cal.slopes[a] * area for a, area in integrate_all(chrom, profile).items()}
