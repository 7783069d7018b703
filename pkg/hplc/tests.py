import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st
from scipy.stats import norm

from mixtures.exceptions import EmptySolution
from mixtures.solutions import SolutionState

from .calibration import CalibrationCurve, dilution_ladder, fit_calibration, fit_slope, quantify
from .chromatograms import Chromatogram, InjectionModel, integrate_all, integrate_peak, measure
from .exceptions import DegenerateSeries, MissingCalibration, WindowOutOfRange
from .profiles import HplcProfile, PeakProfile, resolvable_capacity


def sample(**concentrations):
    return SolutionState.of(100.0, {int(k[1:]): c for k, c in concentrations.items()})


def measured_ladder(profile, analyte_id, stock=12.0, steps=11):
    points = []
    for conc in dilution_ladder(stock, steps):
        chrom = measure(SolutionState.of(100.0, {analyte_id: conc}), profile, InjectionModel.off())
        points.append((conc, integrate_peak(chrom, profile.window(analyte_id))))
    return points


class ProfileTests(SimpleTestCase):

    def test_defaults(self):
        profile = HplcProfile.from_settings()
        self.assertEqual(profile.analytes, [1, 2, 3])
        self.assertEqual([p.retention_time for p in profile], [3.41, 4.53, 9.31])
        self.assertEqual(profile.overlaps(), [])

    def test_capacity_of_one_run(self):
        self.assertEqual(resolvable_capacity(HplcProfile.from_settings()), 83)

    def test_close_peaks_are_flagged(self):
        with self.assertLogs('hplc.profiles', level='WARNING'):
            profile = HplcProfile([PeakProfile(1, 3.41, 0.0375, 0.02), PeakProfile(2, 3.45, 0.0375, 0.03)])
        self.assertEqual(profile.overlaps(), [(1, 2)])

    def test_invalid_peaks(self):
        with self.assertRaises(ValueError):
            PeakProfile(1, 3.41, 0.0375, 0.0)
        with self.assertRaises(ValueError):
            HplcProfile([PeakProfile(1, 3.41, 0.0375, 0.02), PeakProfile(1, 5.0, 0.0375, 0.02)])
        with self.assertRaises(MissingCalibration):
            HplcProfile.from_settings()[9]

    def test_saturation_is_a_soft_clip(self):
        peak = PeakProfile(1, 3.41, 0.0375, 0.02, saturation_area=2.0)
        self.assertAlmostEqual(peak.area(1e-3), 2e-5, places=9)
        self.assertLess(peak.area(1000.0), 2.0)
        self.assertEqual(peak.linear_area(100.0), 2.0)


class MeasureTests(SimpleTestCase):

    def setUp(self):
        self.profile = HplcProfile.from_settings()

    def test_three_analyte_sample(self):
        chrom = measure(sample(a1=7.0, a2=5.0, a3=8.5), self.profile, InjectionModel.off())
        self.assertEqual(len(chrom), 1501)
        for peak in self.profile:
            lo, hi = self.profile.window(peak.analyte)
            inside = (chrom.times > lo) & (chrom.times < hi)
            apex = chrom.times[inside][np.argmax(chrom.absorbance[inside])]
            self.assertAlmostEqual(apex, peak.retention_time, delta=0.5 / 60)
        areas = integrate_all(chrom, self.profile)
        self.assertLess(areas[1], areas[2])
        self.assertLess(areas[2], areas[3])

    def test_blank_is_baseline_only(self):
        inj = InjectionModel.from_settings(enabled=True)
        chrom = measure(SolutionState.solvent(100.0), self.profile, inj, seed=3)
        for analyte_id, area in integrate_all(chrom, self.profile).items():
            lo, hi = self.profile.window(analyte_id)
            self.assertLessEqual(abs(area), 3 * inj.baseline_noise * (hi - lo))

    def test_empty_sample(self):
        with self.assertRaises(EmptySolution):
            measure(SolutionState(), self.profile)

    def test_doubling_doubles_the_area(self):
        linear = self.profile.linear()
        one = integrate_all(measure(sample(a1=2.0), linear, InjectionModel.off()), linear)[1]
        two = integrate_all(measure(sample(a1=4.0), linear, InjectionModel.off()), linear)[1]
        self.assertAlmostEqual(two / one, 2.0, delta=0.002)

    def test_seeded_noise_replays(self):
        a = measure(sample(a1=1.0), self.profile, seed=11)
        b = measure(sample(a1=1.0), self.profile, seed=11)
        c = measure(sample(a1=1.0), self.profile, seed=12)
        np.testing.assert_array_equal(a.absorbance, b.absorbance)
        self.assertFalse(np.array_equal(a.absorbance, c.absorbance))

    def test_windows_do_not_leak(self):
        chrom = measure(sample(a1=10.0), self.profile, InjectionModel.off())
        areas = integrate_all(chrom, self.profile)
        self.assertLess(abs(areas[2]), 1e-3 * areas[1])
        self.assertLess(abs(areas[3]), 1e-3 * areas[1])

    def test_monotonic_over_a_concentration_grid(self):
        areas = [
            integrate_all(measure(sample(a3=c), self.profile, InjectionModel.off()), self.profile)[3]
            for c in np.linspace(0.1, 200.0, 50)
        ]
        self.assertTrue(all(b > a for a, b in zip(areas, areas[1:])))
        self.assertLess(areas[-1], self.profile[3].saturation_area)

    @hypothesis_settings(max_examples=40, deadline=None)
    @given(low=st.floats(0.01, 50.0), factor=st.floats(1.01, 10.0))
    def test_higher_concentration_never_reads_lower(self, low, factor):
        def read(c):
            return integrate_all(measure(sample(a2=c), self.profile, InjectionModel.off()), self.profile)[2]

        self.assertGreaterEqual(read(low * factor), read(low))


class IntegrateTests(SimpleTestCase):

    def test_gaussian_area(self):
        sigma, centre, period = 0.0375, 3.41, 0.5
        times = np.arange(1501) * period / 60.0
        chrom = Chromatogram(norm.pdf(times, centre, sigma) * sigma * math.sqrt(2 * math.pi), period)
        area = integrate_peak(chrom, (centre - 3 * sigma, centre + 3 * sigma))
        self.assertAlmostEqual(area / (sigma * math.sqrt(2 * math.pi)), 1.0, delta=0.005)

    def test_zero_trace(self):
        self.assertEqual(integrate_peak(Chromatogram(np.zeros(1501)), (3.0, 4.0)), 0.0)

    def test_baseline_is_subtracted(self):
        self.assertAlmostEqual(integrate_peak(Chromatogram(np.full(1501, 0.3)), (3.0, 4.0)), 0.0)

    def test_window_out_of_range(self):
        chrom = Chromatogram(np.zeros(1501))
        for window in ((-0.1, 0.5), (12.0, 13.0), (4.0, 3.0)):
            with self.subTest(window=window), self.assertRaises(WindowOutOfRange):
                integrate_peak(chrom, window)

    def test_csv_and_svg_export(self):
        chrom = measure(sample(a1=7.0), HplcProfile.from_settings(), InjectionModel.off(), label='pool')
        with tempfile.TemporaryDirectory() as tmp:
            chrom.to_csv(Path(tmp) / 'pool.csv')
            chrom.to_svg(Path(tmp) / 'pool.svg', HplcProfile.from_settings())
            clone = Chromatogram.from_csv(Path(tmp) / 'pool.csv')
            self.assertTrue((Path(tmp) / 'pool.svg').read_text().lstrip().startswith('<?xml'))
        self.assertEqual((clone.sample_period_s, clone.label, len(clone)), (0.5, 'pool', len(chrom)))
        np.testing.assert_allclose(clone.absorbance, chrom.absorbance, atol=1e-6)

    def test_csv_keeps_the_sample_period(self):
        with tempfile.TemporaryDirectory() as tmp:
            for period in (0.3, 0.5, 0.8, 1.0 / 3.0):
                with self.subTest(period=period):
                    Chromatogram(np.zeros(1501), sample_period_s=period).to_csv(Path(tmp) / 'trace.csv')
                    clone = Chromatogram.from_csv(Path(tmp) / 'trace.csv')
                    self.assertAlmostEqual(clone.sample_period_s, period, places=6)


class CalibrationTests(SimpleTestCase):

    def setUp(self):
        self.profile = HplcProfile.from_settings()

    def test_ladder(self):
        ladder = dilution_ladder(12.0, 11, 2.0)
        self.assertEqual(len(ladder), 12)
        self.assertAlmostEqual(ladder[-1], 0.005859375)
        with self.assertRaises(ValueError):
            dilution_ladder(12.0, 11, 1.0)

    def test_exact_series_recovers_the_gain(self):
        gain = 0.03
        slope = fit_slope([(c, gain * c) for c in dilution_ladder(6.0)])
        self.assertAlmostEqual(slope, 1 / gain, delta=0.01 / gain)

    def test_measured_ladder_recovers_the_gain(self):
        curve = fit_calibration({1: measured_ladder(self.profile, 1)}, self.profile)
        gain = self.profile[1].response_gain
        self.assertAlmostEqual(curve.slope(1) * gain, 1.0, delta=0.01)

    def test_saturated_points_are_sub_linear_and_left_out(self):
        points = measured_ladder(self.profile, 3, stock=200.0)
        (high_c, high_a), (low_c, low_a) = points[0], points[-1]
        self.assertLess(high_a / high_c, 0.9 * low_a / low_c)
        restricted = fit_calibration({3: points}, self.profile).slope(3)
        everything = fit_calibration({3: points}, self.profile, cutoff=1e9).slope(3)
        self.assertGreater(everything, restricted)

    def test_single_repeated_point(self):
        self.assertAlmostEqual(fit_slope([(1.0, 0.02)] * 3), 50.0)

    def test_degenerate_series(self):
        for series in ([(1.0, 0.0)] * 3, [(1.0, 0.02)] * 2, [(0.0, 0.02)] * 3):
            with self.subTest(series=series), self.assertRaises(DegenerateSeries):
                fit_slope(series)

    def test_zero_residuals_on_exact_data(self):
        curve = fit_calibration({2: [(c, 0.03 * c) for c in (0.1, 0.2, 0.4)]})
        np.testing.assert_allclose(curve.residuals(2), 0.0, atol=1e-12)

    def test_json_round_trip(self):
        curve = fit_calibration({1: [(c, 0.02 * c) for c in (0.1, 0.2, 0.4)]})
        with tempfile.TemporaryDirectory() as tmp:
            curve.write(Path(tmp) / 'calibration.json')
            clone = CalibrationCurve.read(Path(tmp) / 'calibration.json')
        self.assertEqual(clone.slopes, curve.slopes)
        self.assertEqual(clone.series[1], curve.series[1])

    def test_slopes_must_be_positive(self):
        with self.assertRaises(ValueError):
            CalibrationCurve({1: -2.0})


class QuantifyTests(SimpleTestCase):

    def setUp(self):
        self.profile = HplcProfile.from_settings()
        self.curve = fit_calibration(
            {a: measured_ladder(self.profile, a) for a in self.profile.analytes}, self.profile,
        )

    def test_round_trip_in_the_linear_regime(self):
        truth = {1: 0.5, 2: 0.3, 3: 0.2}
        chrom = measure(SolutionState.of(100.0, truth), self.profile, InjectionModel.off())
        for analyte_id, conc in quantify(chrom, self.curve, self.profile).items():
            self.assertAlmostEqual(conc / truth[analyte_id], 1.0, delta=0.01)

    def test_hundred_random_maps(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            truth = {a: float(c) for a, c in zip(self.profile.analytes, rng.uniform(0.01, 1.0, 3))}
            chrom = measure(SolutionState.of(100.0, truth), self.profile, InjectionModel.off())
            recovered = quantify(chrom, self.curve, self.profile)
            for analyte_id, conc in truth.items():
                self.assertAlmostEqual(recovered[analyte_id] / conc, 1.0, delta=0.01)

    def test_blank_reads_zero(self):
        chrom = measure(SolutionState.solvent(100.0), self.profile, InjectionModel.off())
        self.assertEqual(quantify(chrom, self.curve, self.profile), {1: 0.0, 2: 0.0, 3: 0.0})

    def test_saturation_under_reports_but_keeps_order(self):
        low = quantify(measure(sample(a1=40.0), self.profile, InjectionModel.off()), self.curve, self.profile)[1]
        high = quantify(measure(sample(a1=80.0), self.profile, InjectionModel.off()), self.curve, self.profile)[1]
        self.assertLess(high, 80.0)
        self.assertGreater(high, low)

    def test_missing_calibration(self):
        chrom = measure(sample(a1=1.0), self.profile, InjectionModel.off())
        with self.assertRaises(MissingCalibration):
            quantify(chrom, CalibrationCurve({1: 50.0, 2: 33.0}), self.profile)
        with self.assertRaises(MissingCalibration):
            CalibrationCurve({1: 50.0}).slope(3)

    def test_ideal_curve(self):
        curve = CalibrationCurve.ideal(self.profile)
        self.assertAlmostEqual(curve.slope(1), 50.0)
        self.assertTrue(curve.covers([1, 2, 3]))
