"""
Instrument calibration: an equimolar stock is serially diluted 2:1 on a
plate, every sample is injected, and a zero-intercept line is fitted per
analyte.
"""

import logging
from dataclasses import dataclass, field

from django.conf import settings

from chemlab.seeding import seed_sequence
from hplc.calibration import dilution_ladder, fit_calibration
from hplc.chromatograms import InjectionModel, integrate_all, measure
from hplc.profiles import HplcProfile
from mixtures.plates import PlateState, WellAddress
from mixtures.solutions import SolutionState

from . import reports

logger = logging.getLogger(__name__)


def prepare_ladder(stock, steps, factor, volume, analyte_ids):
    """Serial dilution on a plate row by row; returns the plate and the sample wells.

    Each step moves volume/factor µL of the previous sample into
    volume·(1 − 1/factor) µL of solvent.
    """
    n_samples = steps + 1
    cols = 12
    plate = PlateState(rows=-(-n_samples // cols), cols=cols, capacity=2 * volume, name='ladder')
    wells = [WellAddress(i // cols, i % cols) for i in range(n_samples)]
    plate.dispense(wells[0], SolutionState.of(volume, {a: stock for a in analyte_ids}))
    carry = volume / factor
    for previous, current in zip(wells, wells[1:]):
        plate.dispense(current, plate.aspirate(previous, carry))
        plate.dispense(current, SolutionState.solvent(volume - carry))
    return plate, wells


@dataclass
class CalibrationReport:
    concentrations: list
    series: dict
    curve: object
    chromatograms: list = field(default_factory=list)
    seed: int | None = None
    noise: bool = False

    experiment = 'calibrate'

    def ledger_rows(self):
        return []

    def summary(self):
        return {
            'experiment': self.experiment,
            'seed': self.seed,
            'noise': self.noise,
            'samples': len(self.concentrations),
            'highest_mg_ml': max(self.concentrations),
            'lowest_mg_ml': min(self.concentrations),
            'slopes': {str(a): s for a, s in sorted(self.curve.slopes.items())},
        }

    def write(self, out_dir, profile=None):
        out_dir = reports.ensure_dir(out_dir)
        profile = profile if profile is not None else HplcProfile.from_settings()
        self.curve.write(out_dir / 'calibration.json')
        frame = self.curve.to_frame()
        reports.write_csv(frame, out_dir / 'calibration.csv')
        self.curve.to_svg(out_dir / 'calibration.svg', profile)
        for index, chrom in enumerate(self.chromatograms):
            chrom.to_csv(out_dir / f"ladder_{index:02d}.csv", reports.float_format())
        if self.chromatograms:
            self.chromatograms[0].to_svg(out_dir / 'ladder_stock.svg', profile)
        reports.write_json(self.summary(), out_dir / 'summary.json')
        reports.write_xlsx({'calibration': frame}, out_dir / 'results.xlsx')
        return out_dir


def run_calibration(seed=None, profile=None, injection=None):
    """Dilution ladder, measurement and fit. Uses the active CHEMLAB settings."""
    section = settings.CHEMLAB['CALIBRATION']
    profile = profile if profile is not None else HplcProfile.from_settings()
    injection = injection if injection is not None else InjectionModel.from_settings()
    analyte_ids = profile.analytes
    plate, wells = prepare_ladder(
        float(section['stock_mg_ml']),
        int(section['dilution_steps']),
        float(section['dilution_factor']),
        float(section['sample_volume_ul']),
        analyte_ids,
    )
    injection_volume = float(settings.CHEMLAB['HPLC']['injection_volume_ul'])
    children = seed_sequence(seed).spawn(len(wells))
    series = {a: [] for a in analyte_ids}
    chromatograms = []
    concentrations = []
    for address, child in zip(wells, children):
        sample = plate.discard(address, injection_volume)
        chrom = measure(sample, profile, injection, seed=child, label=f"ladder {address}")
        areas = integrate_all(chrom, profile)
        concentrations.append(sample.concentration(analyte_ids[0]))
        for analyte_id in analyte_ids:
            series[analyte_id].append((sample.concentration(analyte_id), areas[analyte_id]))
        chromatograms.append(chrom)
    curve = fit_calibration(series, profile, float(section['saturation_cutoff']))
    expected = dilution_ladder(float(section['stock_mg_ml']), int(section['dilution_steps']),
                               float(section['dilution_factor']))
    logger.info("calibration ladder %.3f -> %.5f mg/mL over %d samples", expected[0], expected[-1], len(expected))
    return CalibrationReport(concentrations, series, curve, chromatograms, seed=seed, noise=injection.enabled)


def calibrate_instrument(profile=None, injection=None, seed=None):
    """Calibration curve from a ladder run; noise-free unless an injection model is given"""
    return run_calibration(
        profile=profile, injection=injection if injection is not None else InjectionModel.off(), seed=seed,
    ).curve
