import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from encoding.datasets import Dataset
from encoding.plans import layout
from experiments.pipeline import run_pipeline
from hplc.calibration import CalibrationCurve
from hplc.chromatograms import InjectionModel
from hplc.profiles import HplcProfile
from perceptron.classifiers import ClassLabel, TrainedClassifier, predict
from protocols.compiler import CompileConfig
from robot.executor import NoiseModel

from .differential import RESULT_COLUMNS, PoolPair, differential, error_statistics, results_frame
from .exceptions import KeyMismatch

concentrations = st.dictionaries(st.integers(1, 3), st.floats(0, 20), min_size=1)


class DifferentialTests(SimpleTestCase):

    def test_equal_pools_mismatch(self):
        result = differential(PoolPair({1: 0.7}, {1: 0.7}, 100.0))
        self.assertEqual(result[1], 0.0)
        self.assertEqual(result.labels[1], ClassLabel.MISMATCH)

    def test_positive_excess_matches(self):
        result = differential(PoolPair({1: 2.0}, {1: 0.5}, 100.0))
        self.assertEqual(result.z, {1: 1.5})
        self.assertEqual(result.labels[1], ClassLabel.MATCH)

    def test_key_sets_must_agree(self):
        with self.assertRaises(KeyMismatch) as ctx:
            PoolPair({1: 1.0, 2: 1.0}, {1: 1.0}, 100.0)
        self.assertEqual(ctx.exception.detail['negative'], [1])

    def test_pool_volume_must_be_positive(self):
        with self.assertRaises(ValueError):
            PoolPair({1: 1.0}, {1: 1.0}, 0.0)

    @hypothesis_settings(max_examples=100, deadline=None)
    @given(positive=concentrations, data=st.data())
    def test_swapping_pools_negates_z(self, positive, data):
        negative = {a: data.draw(st.floats(0, 20)) for a in positive}
        pair = PoolPair(positive, negative, 100.0)
        forward, backward = differential(pair), differential(pair.swapped())
        for analyte_id, z in forward.z.items():
            self.assertEqual(backward[analyte_id], -z)
            if z != 0:
                self.assertNotEqual(forward.labels[analyte_id], backward.labels[analyte_id])


class ResultsFrameTests(SimpleTestCase):

    def test_columns_and_labels(self):
        frame = results_frame([
            {'trial': 0, 'analyte': 1, 'expected_z': 0.4, 'measured_z': 0.35},
            {'trial': 0, 'analyte': 2, 'expected_z': -0.1, 'measured_z': 0.02},
        ])
        self.assertEqual(list(frame.columns), RESULT_COLUMNS)
        self.assertEqual(list(frame['expected_label']), ['match', 'mismatch'])
        self.assertEqual(list(frame['correct']), [True, False])

    def test_error_statistics(self):
        stats = error_statistics([0.1, -0.1, 0.1, -0.1])
        self.assertAlmostEqual(stats.mean, 0.0)
        self.assertAlmostEqual(stats.sd, 0.1)
        self.assertAlmostEqual(stats.three_sigma, 0.3)
        self.assertEqual(error_statistics([]).to_dict()['n'], 0)


bit_cases = st.integers(min_value=1, max_value=16).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(-1, 1, allow_subnormal=False), min_size=n, max_size=n),
        st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=1, max_size=3),
    )
)


class OracleSignTests(SimpleTestCase):

    @hypothesis_settings(max_examples=25, deadline=None)
    @given(case=bit_cases)
    def test_noise_free_labels_follow_the_dot_product(self, case):
        weights, bit_rows = case
        datasets = [Dataset(a, tuple(bits)) for a, bits in zip((1, 2, 3), bit_rows)]
        classifier = TrainedClassifier(np.array(weights))
        profile = HplcProfile.from_settings()
        result = run_pipeline(
            datasets, [classifier], layout(len(weights)), seed=0,
            compile_cfg=CompileConfig(quantize=False), noise=NoiseModel.off(), injection=InjectionModel.off(),
            profile=profile, calibration=CalibrationCurve.ideal(profile),
        )
        z = result.runs[0].result.z
        for dataset in datasets:
            oracle = predict(classifier, dataset.bits)
            if abs(oracle) > 1e-6:
                self.assertEqual(np.sign(z[dataset.analyte]), np.sign(oracle))
