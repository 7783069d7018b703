import tempfile
from pathlib import Path

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from encoding.datasets import load_grid

from .classifiers import ClassLabel, TrainedClassifier, as_label, one_vs_all, predict, threshold, train
from .exceptions import LengthMismatch
from .images import binarize_resize

AND_FEATURES = [(0, 0), (0, 1), (1, 0), (1, 1)]
AND_LABELS = [ClassLabel.MISMATCH, ClassLabel.MISMATCH, ClassLabel.MISMATCH, ClassLabel.MATCH]


class ThresholdTests(SimpleTestCase):

    def test_strict_inequality(self):
        self.assertEqual(threshold(0.01), ClassLabel.MATCH)
        self.assertEqual(threshold(0.0), ClassLabel.MISMATCH)
        self.assertEqual(threshold(-0.3), ClassLabel.MISMATCH)

    def test_label_coercion(self):
        self.assertEqual(as_label(True), ClassLabel.MATCH)
        self.assertEqual(as_label('mismatch'), ClassLabel.MISMATCH)


class PredictTests(SimpleTestCase):

    def test_cancellation_is_a_mismatch(self):
        w = TrainedClassifier([1.0, -1.0])
        self.assertEqual(predict(w, [1, 1]), 0.0)
        self.assertEqual(w.classify([1, 1]), ClassLabel.MISMATCH)

    def test_positive_weight(self):
        w = TrainedClassifier([0.5, -0.5])
        self.assertEqual(predict(w, [1, 0]), 0.5)
        self.assertEqual(w.classify([1, 0]), ClassLabel.MATCH)

    def test_bias_is_added(self):
        self.assertAlmostEqual(predict(TrainedClassifier([0.25, 0.5], bias=-0.5), [1, 1]), 0.25)

    def test_length_mismatch(self):
        with self.assertRaises(LengthMismatch):
            predict(TrainedClassifier([1.0, 2.0]), [1, 0, 1])

    @hypothesis_settings(max_examples=100, deadline=None)
    @given(
        weights=st.lists(st.floats(-1, 1), min_size=8, max_size=8),
        bias=st.floats(-1, 1),
        bits=st.lists(st.integers(0, 1), min_size=8, max_size=8),
        factor=st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_positive_rescale_keeps_labels(self, weights, bias, bits, factor):
        w = TrainedClassifier(weights, bias)
        scaled = TrainedClassifier(np.array(weights) * factor, bias * factor)
        z = predict(w, bits)
        if abs(z) > 1e-9:
            self.assertEqual(w.classify(bits), scaled.classify(bits))
            self.assertEqual(w.classify(bits), w.normalized().classify(bits))

    @hypothesis_settings(max_examples=100, deadline=None)
    @given(
        weights=st.lists(st.floats(-1, 1), min_size=10, max_size=10),
        bias=st.floats(-1, 1),
        split=st.lists(st.integers(0, 2), min_size=10, max_size=10),
    )
    def test_linear_over_disjoint_supports(self, weights, bias, split):
        w = TrainedClassifier(weights, bias)
        x = [int(s == 1) for s in split]
        y = [int(s == 2) for s in split]
        both = [a + b for a, b in zip(x, y)]
        self.assertAlmostEqual(predict(w, both), predict(w, x) + predict(w, y) - bias, places=9)


class TrainTests(SimpleTestCase):

    def test_and_converges(self):
        w = train(AND_FEATURES, AND_LABELS, epochs=50, seed=1)
        self.assertEqual(w.training_accuracy, 1.0)
        self.assertEqual(w.accuracy(AND_FEATURES, AND_LABELS), 1.0)
        self.assertTrue(w.is_normalized)
        self.assertLessEqual(abs(w.bias), 1.0)

    def test_seed_determinism(self):
        a = train(AND_FEATURES, AND_LABELS, seed=5)
        b = train(AND_FEATURES, AND_LABELS, seed=5)
        np.testing.assert_array_equal(a.weights, b.weights)
        self.assertEqual(a.bias, b.bias)

    def test_xor_returns_best_effort(self):
        labels = [ClassLabel.MISMATCH, ClassLabel.MATCH, ClassLabel.MATCH, ClassLabel.MISMATCH]
        w = train(AND_FEATURES, labels, epochs=20, seed=0)
        self.assertLess(w.training_accuracy, 1.0)

    def test_bias_can_be_held_at_zero(self):
        w = train(AND_FEATURES, AND_LABELS, epochs=20, seed=1, fit_bias=False)
        self.assertEqual(w.bias, 0.0)
        self.assertLess(w.training_accuracy, 1.0)
        through_origin = train([(1, 0), (0, 1), (2, 1)], [True, False, True], epochs=20, seed=1, fit_bias=False)
        self.assertEqual(through_origin.bias, 0.0)
        self.assertEqual(through_origin.training_accuracy, 1.0)

    def test_label_count_must_match(self):
        with self.assertRaises(LengthMismatch):
            train(AND_FEATURES, AND_LABELS[:3])

    def test_digit_grids_separate(self):
        base = Path(settings.CHEMLAB['MNIST']['fixtures_dir'])
        grids = {name: load_grid(base / f"{name}.txt") for name in ('zero_a', 'zero_b', 'one')}
        features = list(grids.values())
        labels = ['0', '0', '1']
        classifiers = one_vs_all(features, labels, ['0', '1'], epochs=100, seed=0)
        self.assertEqual([c.foreground for c in classifiers.values()], ['0', '1'])
        self.assertEqual(classifiers['0'].training_accuracy, 1.0)
        self.assertEqual(classifiers['0'].classify(grids['one']), ClassLabel.MISMATCH)
        self.assertEqual(classifiers['1'].classify(grids['one']), ClassLabel.MATCH)


class SerializationTests(SimpleTestCase):

    def test_json_round_trip(self):
        w = TrainedClassifier([0.5, -0.25, 1.0, 0.0], bias=-0.125, foreground='2', training_accuracy=0.97)
        clone = TrainedClassifier.from_json(w.to_json())
        np.testing.assert_array_equal(clone.weights, w.weights)
        self.assertEqual((clone.bias, clone.foreground, clone.training_accuracy), (-0.125, '2', 0.97))

    def test_weight_map_csv(self):
        w = TrainedClassifier(np.linspace(-1, 1, 16), foreground='0')
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'weights.csv'
            w.weight_map_csv(path)
            self.assertEqual(len(path.read_text().splitlines()), 4)
            clone = TrainedClassifier.from_weight_csv(path, foreground='0')
        np.testing.assert_allclose(clone.weights, w.weights, atol=1e-6)

    def test_weight_map_shape(self):
        self.assertEqual(TrainedClassifier(np.zeros(256)).weight_map().shape, (16, 16))
        with self.assertRaises(LengthMismatch):
            TrainedClassifier(np.zeros(10)).weight_map(4)

    def test_bundled_weight_maps_are_normalized(self):
        base = Path(settings.CHEMLAB['MNIST']['fixtures_dir'])
        for digit in ('0', '1', '2'):
            w = TrainedClassifier.from_weight_csv(base / f"weights_{digit}.csv", foreground=digit)
            self.assertEqual(len(w), 256)
            self.assertTrue(w.is_normalized)

    def test_normalized_rescales_by_largest_magnitude(self):
        w = TrainedClassifier([2.0, -4.0], bias=8.0).normalized()
        np.testing.assert_array_equal(w.weights, [0.25, -0.5])
        self.assertEqual(w.bias, 1.0)


class BinarizeTests(SimpleTestCase):

    def test_28_to_16(self):
        image = np.zeros((28, 28), dtype=np.uint8)
        image[4:24, 12:16] = 255
        image[0, 0] = 100
        bits = binarize_resize(image)
        self.assertEqual(len(bits), 256)
        grid = np.array(bits).reshape(16, 16)
        self.assertTrue(grid[8, 7] or grid[8, 8])
        self.assertEqual(grid[0, 0], 0)
        self.assertEqual(grid[15, 0], 0)

    def test_blank_image(self):
        self.assertEqual(sum(binarize_resize(np.zeros((28, 28)))), 0)
