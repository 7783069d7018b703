import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings, tag

from chemlab.exceptions import ConfigError
from chemlab.seeding import seed_sequence
from encoding.datasets import Dataset
from encoding.plans import layout, written_concentration
from hplc.chromatograms import InjectionModel, measure
from hplc.profiles import HplcProfile
from mixtures.solutions import SolutionState
from perceptron.classifiers import ClassLabel, TrainedClassifier
from protocols.compiler import CompileConfig
from robot.executor import NoiseModel

from .calibration import run_calibration
from .config import ExperimentConfig, build_config
from .exceptions import BadMagic, MissingFixtures, TruncatedFile
from .idx import ingest_idx, parse_idx, write_idx
from .mnist import load_images, majority_table, run_mnist, training_set
from .models import ClassificationRecord, ExperimentRun
from .pipeline import run_pipeline
from .validation import KINDS, generate_trials, reach, run_validation, write_trials

QUIET = {'noise': NoiseModel.off(), 'injection': InjectionModel.off()}


def synthetic_digits(n_per_digit=12, seed=0):
    """28x28 images: a ring for 0, a vertical bar for 1, plus speckle"""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[:28, :28]
    ring = (np.abs(np.hypot(yy - 14, xx - 14) - 8) < 2.5).astype(np.uint8) * 255
    bar = ((np.abs(xx - 14) < 2) & (yy > 4) & (yy < 24)).astype(np.uint8) * 255
    images, labels = [], []
    for label, shape in ((0, ring), (1, bar)):
        for _ in range(n_per_digit):
            speckle = (rng.random((28, 28)) < 0.02).astype(np.uint8) * 255
            images.append(np.maximum(shape, speckle))
            labels.append(label)
    return np.array(images, dtype=np.uint8), np.array(labels, dtype=np.uint8)


class ConfigTests(SimpleTestCase):

    def write_toml(self, text):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        path = Path(tmp.name) / 'config.toml'
        path.write_text(text)
        return path

    def test_defaults(self):
        config = build_config()
        self.assertEqual((config.experiment, config.seeds, config.seed), ('validate', [0], 0))
        self.assertEqual(config.out_dir, Path(settings.CHEMLAB['OUTPUT']['dir']))

    def test_toml_overrides(self):
        path = self.write_toml(
            'experiment = "mnist"\nseeds = [1, 2]\n\n[compiler]\nv_o_ul = 5.0\n\n[hplc.profiles.1]\ngain = 0.025\n'
        )
        config = build_config(experiment=None, config_path=path)
        self.assertEqual((config.experiment, config.seeds), ('mnist', [1, 2]))
        self.assertEqual(config.section('HPLC')['PROFILES'][1], {**settings.CHEMLAB['HPLC']['PROFILES'][1],
                                                                 'gain': 0.025})
        with config.applied():
            self.assertEqual(CompileConfig.from_settings().v_o, 5.0)
            self.assertEqual(HplcProfile.from_settings()[1].response_gain, 0.025)
        self.assertEqual(CompileConfig.from_settings().v_o, 6.25)

    def test_flags_win_over_the_file(self):
        path = self.write_toml('seeds = [4, 5]\nnoise = true\n')
        config = build_config(config_path=path, seed=9, noise=False, out='elsewhere')
        self.assertEqual(config.seeds, [9])
        self.assertFalse(config.section('NOISE')['enabled'])
        self.assertEqual(config.out_dir, Path('elsewhere'))
        with config.applied():
            self.assertFalse(NoiseModel.from_settings().enabled)
            self.assertFalse(InjectionModel.from_settings().enabled)

    def test_bad_files(self):
        for text in ('[bogus]\nx = 1\n', '[compiler]\nspeed = 1\n', 'colour = "red"\n', 'x = \n',
                     '[hplc.profiles.first]\ngain = 1.0\n'):
            with self.subTest(text=text), self.assertRaises(ConfigError):
                build_config(config_path=self.write_toml(text))
        with self.assertRaises(ConfigError):
            build_config(config_path='/nonexistent/config.toml')

    def test_invalid_values(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig(experiment='benchmark')
        with self.assertRaises(ConfigError):
            build_config(seeds=[])


class IdxTests(SimpleTestCase):

    def test_four_image_round_trip(self):
        rng = np.random.default_rng(0)
        images = rng.integers(0, 256, (4, 28, 28), dtype=np.uint8)
        labels = np.array([3, 1, 4, 1], dtype=np.uint8)
        with tempfile.TemporaryDirectory() as tmp:
            write_idx(Path(tmp) / 'images.idx', images)
            write_idx(Path(tmp) / 'labels.idx', labels)
            np.testing.assert_array_equal(ingest_idx(Path(tmp) / 'images.idx'), images)
            np.testing.assert_array_equal(ingest_idx(Path(tmp) / 'labels.idx'), labels)
            self.assertEqual((Path(tmp) / 'images.idx').read_bytes()[:4], b'\x00\x00\x08\x03')

    def test_empty_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'empty.idx'
            path.write_bytes(b'')
            with self.assertRaises(TruncatedFile):
                ingest_idx(path)

    def test_wrong_magic(self):
        with self.assertRaises(BadMagic):
            parse_idx(b'\x00\x00\x08\x02' + b'\x00' * 12)

    def test_short_payload(self):
        header = np.array([0x803, 2, 28, 28], dtype='>u4').tobytes()
        with self.assertRaises(TruncatedFile) as ctx:
            parse_idx(header + b'\x00' * 100)
        self.assertEqual(ctx.exception.detail['expected'], 16 + 2 * 28 * 28)
        with self.assertRaises(TruncatedFile):
            parse_idx(header[:8])

    def test_only_images_and_labels(self):
        with tempfile.TemporaryDirectory() as tmp, self.assertRaises(ValueError):
            write_idx(Path(tmp) / 'matrix.idx', np.zeros((3, 3)))


class TrainingTests(SimpleTestCase):

    def test_training_set_balances_classes(self):
        images, labels = synthetic_digits()
        features, targets = training_set(images, labels, '0', 5, np.random.default_rng(0))
        self.assertEqual(len(features), 10)
        self.assertTrue(all(len(f) == 256 for f in features))
        self.assertEqual(targets.count(ClassLabel.MATCH), 5)

    def test_too_few_images(self):
        images, labels = synthetic_digits(n_per_digit=3)
        with self.assertRaises(MissingFixtures):
            training_set(images, labels, '1', 5, np.random.default_rng(0))

    def test_missing_fixture_directory(self):
        with tempfile.TemporaryDirectory() as tmp:
            section = {**settings.CHEMLAB['MNIST'], 'fixtures_dir': Path(tmp)}
            with self.assertRaises(MissingFixtures):
                load_images(section)


class MnistTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.report = run_mnist(seed=0, **QUIET)

    def test_noise_free_table(self):
        table = self.report.table()
        self.assertEqual(list(table.index), ['0', '1', '2'])
        self.assertEqual(list(table.columns), ['zero_a', 'zero_b', 'one'])
        matches = {(c, i) for c in table.index for i in table.columns if table.loc[c, i] == ClassLabel.MATCH.value}
        self.assertEqual(matches, {('0', 'zero_a'), ('0', 'zero_b'), ('1', 'one')})
        self.assertEqual((self.report.n_correct, self.report.n_total), (9, 9))

    def test_chemical_labels_follow_the_oracle(self):
        frame = self.report.results
        self.assertTrue((frame['expected_label'] == frame['measured_label']).all())

    def test_write_cost(self):
        self.assertEqual(len(self.report.result.writes), 768)
        self.assertEqual(self.report.result.writes.n_tips, 6)
        self.assertEqual(self.report.cost.by_op['hplc_injection'], 6)
        self.assertEqual(self.report.cost.operations['silicon']['total'], 1535)

    def test_outputs(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = self.report.write(Path(tmp) / 'mnist')
            for name in ('results.csv', 'table.csv', 'weights_0.csv', 'weights_2.svg', 'chromatogram_1_negative.csv',
                         'execution_log.csv', 'plate.png', 'cost.json', 'summary.json', 'results.xlsx'):
                self.assertTrue((out / name).exists(), name)
            summary = json.loads((out / 'summary.json').read_text())
        self.assertEqual(summary['table']['0']['zero_a'], 'match')

    def test_majority_of_identical_runs(self):
        majority = majority_table([self.report] * 3)
        self.assertEqual(majority[('1', 'one')], 'match')
        self.assertEqual(majority[('2', 'zero_b')], 'mismatch')

    def test_same_seed_same_files(self):
        first = run_mnist(seed=3)
        second = run_mnist(seed=3)
        with tempfile.TemporaryDirectory() as tmp:
            a = first.write(Path(tmp) / 'a')
            b = second.write(Path(tmp) / 'b')
            for name in ('results.csv', 'execution_log.csv', 'chromatogram_0_positive.csv'):
                self.assertEqual((a / name).read_bytes(), (b / name).read_bytes(), name)

    def test_trains_when_idx_files_are_configured(self):
        images, labels = synthetic_digits()
        with tempfile.TemporaryDirectory() as tmp:
            write_idx(Path(tmp) / 'images.idx', images)
            write_idx(Path(tmp) / 'labels.idx', labels)
            mnist = {**settings.CHEMLAB['MNIST'], 'digits': ['0', '1'], 'train_images': Path(tmp) / 'images.idx',
                     'train_labels': Path(tmp) / 'labels.idx', 'train_per_class': 8, 'epochs': 20}
            with override_settings(CHEMLAB={**settings.CHEMLAB, 'MNIST': mnist}):
                report = run_mnist(seed=1, **QUIET)
        self.assertEqual([c.foreground for c in report.classifiers], ['0', '1'])
        self.assertEqual([c.bias for c in report.classifiers], [0.0, 0.0])
        self.assertEqual(report.n_total, 6)

    @tag('slow')
    def test_noisy_majority_matches_noise_free(self):
        noisy = [run_mnist(seed=seed) for seed in range(100)]
        expected = {(r['classifier'], r['image']): r['measured_label'] for r in self.report.rows}
        self.assertEqual(majority_table(noisy), expected)
        self.assertGreaterEqual(sum(r.n_correct >= 8 for r in noisy), 90)


class ValidationTests(SimpleTestCase):

    def test_trials_have_one_vector_of_each_kind(self):
        section = settings.CHEMLAB['VALIDATION']
        for trial in generate_trials(16, 16, seed=0):
            self.assertEqual(sorted(trial.kinds), sorted(KINDS))
            weights = np.array(trial.weights)
            self.assertEqual(len(weights), 16)
            self.assertTrue(np.all(np.abs(weights) <= 1))
            span = reach(weights)
            margins = {kind: float(weights @ np.array(v)) for kind, v in zip(trial.kinds, trial.vectors)}
            self.assertLessEqual(margins['mismatch'], -section['strong_fraction'] * span)
            self.assertGreaterEqual(margins['match'], section['strong_fraction'] * span)
            self.assertLessEqual(abs(margins['boundary']), section['boundary_fraction'] * span)

    def test_trials_are_seeded(self):
        self.assertEqual(generate_trials(3, 16, seed=5), generate_trials(3, 16, seed=5))

    def test_spawned_seed_sequences_drive_a_run(self):
        child = np.random.SeedSequence(0).spawn(1)[0]
        self.assertIs(seed_sequence(child), child)
        self.assertEqual(seed_sequence(7).entropy, 7)
        datasets = [Dataset(1, (1, 0, 1, 1)), Dataset(2, (0, 1, 1, 0))]
        classifier = TrainedClassifier(np.array([0.5, -0.25, 1.0, -1.0]))
        runs = [run_pipeline(datasets, [classifier], layout(4), seed=np.random.SeedSequence(0).spawn(1)[0])
                for _ in range(2)]
        z = [result.runs[0].result.z for result in runs]
        self.assertEqual(z[0], z[1])

    def test_noise_free_run_is_perfect(self):
        report = run_validation(seed=0, **QUIET)
        self.assertEqual((report.n_correct, report.n_total), (48, 48))
        frame = report.results
        self.assertEqual(list(frame.columns[-1:]), ['kind'])
        self.assertEqual(sorted(frame['kind'].value_counts().to_dict().values()), [16, 16, 16])

    def test_noise_free_z_lies_on_the_identity_line(self):
        report = run_validation(seed=0, **QUIET)
        frame = report.results
        cfg = CompileConfig.from_settings()
        c_max = written_concentration(62.5, 3)
        bound = 16 * cfg.resolution / settings.CHEMLAB['VALIDATION']['pool_volume_ul'] * c_max
        self.assertLessEqual((frame['measured_z'] - frame['expected_z']).abs().max(), bound)
        pools = report.pool_frame()
        for polarity in ('pos', 'neg'):
            np.testing.assert_allclose(pools[f'measured_{polarity}'], pools[f'expected_{polarity}'],
                                       rtol=0.01, atol=1e-9)

    def test_pooled_peaks_stay_linear_after_dilution(self):
        report = run_validation(seed=0, **QUIET)
        profile = HplcProfile.from_settings()
        dilution = settings.CHEMLAB['HPLC']['sample_dilution']
        highest = max(report.pool_frame()[['expected_pos', 'expected_neg']].max())
        for peak in profile:
            self.assertLess(peak.linear_area(highest / dilution), 0.02 * peak.saturation_area)
        with override_settings(CHEMLAB={**settings.CHEMLAB,
                                        'HPLC': {**settings.CHEMLAB['HPLC'], 'sample_dilution': 1.0}}):
            undiluted = run_validation(seed=0, **QUIET)
        error = (undiluted.results['measured_z'] - undiluted.results['expected_z']).abs().max()
        diluted = (report.results['measured_z'] - report.results['expected_z']).abs().max()
        self.assertLess(diluted, error)

    def test_trial_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'trials.json'
            write_trials(generate_trials(2, 16, seed=1), path)
            validation = {**settings.CHEMLAB['VALIDATION'], 'trials_file': path}
            with override_settings(CHEMLAB={**settings.CHEMLAB, 'VALIDATION': validation}):
                report = run_validation(seed=0, **QUIET)
        self.assertEqual(report.n_total, 6)

    def test_missing_trial_file(self):
        validation = {**settings.CHEMLAB['VALIDATION'], 'trials_file': Path('/nonexistent/trials.json')}
        with override_settings(CHEMLAB={**settings.CHEMLAB, 'VALIDATION': validation}):
            with self.assertRaises(MissingFixtures):
                run_validation(seed=0, **QUIET)

    def test_outputs(self):
        report = run_validation(seed=2, trials=generate_trials(2, 16, seed=2))
        with tempfile.TemporaryDirectory() as tmp:
            out = report.write(tmp)
            for name in ('results.csv', 'pools.csv', 'errors.csv', 'pool_scatter.svg', 'differential_errors.svg',
                         'trials.json', 'cost.json', 'summary.json', 'results.xlsx'):
                self.assertTrue((out / name).exists(), name)
            summary = json.loads((out / 'summary.json').read_text())
        self.assertEqual(summary['vectors'], 6)
        self.assertIn('three_sigma', summary['differential_error'])

    @tag('slow')
    def test_noisy_sweep_statistics(self):
        reports_ = [run_validation(seed=seed) for seed in range(200)]
        ranked = sorted(reports_, key=lambda r: r.n_correct)
        median = ranked[len(ranked) // 2]
        self.assertGreaterEqual(median.n_correct, 44)
        small = np.percentile(np.abs(median.results['expected_z']), 25)
        self.assertTrue((np.abs(median.misclassified()['expected_z']) < small).all())
        errors = np.concatenate([r.differential_errors() for r in reports_])
        self.assertLessEqual(abs(errors.mean()), 0.05)
        self.assertTrue(0.2 <= 3 * errors.std() <= 0.4)


class CalibrationRunTests(SimpleTestCase):

    def test_noise_free_ladder(self):
        report = run_calibration(seed=0, injection=InjectionModel.off())
        self.assertEqual(len(report.concentrations), 12)
        self.assertAlmostEqual(report.concentrations[0], 12.0)
        self.assertAlmostEqual(report.concentrations[-1], 0.005859375)
        profile = HplcProfile.from_settings()
        for peak in profile:
            self.assertAlmostEqual(report.curve.slope(peak.analyte) * peak.response_gain, 1.0, delta=0.01)
        self.assertEqual(report.ledger_rows(), [])

    def test_outputs(self):
        report = run_calibration(seed=0)
        with tempfile.TemporaryDirectory() as tmp:
            out = report.write(tmp)
            for name in ('calibration.json', 'calibration.csv', 'calibration.svg', 'ladder_00.csv',
                         'ladder_11.csv', 'ladder_stock.svg', 'summary.json', 'results.xlsx'):
                self.assertTrue((out / name).exists(), name)


class LedgerTests(TestCase):

    def test_validation_report(self):
        report = run_validation(seed=0, trials=generate_trials(2, 16, seed=0), **QUIET)
        run = ExperimentRun.record(report, out_dir='out/validate')
        self.assertEqual((run.n_vectors, run.n_correct, run.accuracy), (6, 6, 1.0))
        self.assertEqual(run.n_transfers, report.cost.n_transfers)
        self.assertFalse(run.noise)
        self.assertEqual(run.records.count(), 6)
        self.assertEqual(set(run.records.values_list('trial', flat=True)), {'1', '2'})

    def test_mnist_report(self):
        run = ExperimentRun.record(run_mnist(seed=0, **QUIET))
        record = run.records.get(trial='1/one')
        self.assertEqual((record.expected_label, record.measured_label, record.correct), ('match', 'match', True))
        self.assertEqual(ClassificationRecord.objects.filter(correct=True).count(), 9)

    def test_calibration_report(self):
        run = ExperimentRun.record(run_calibration(seed=0))
        self.assertEqual((run.n_vectors, run.accuracy, run.n_transfers), (0, None, 0))
        self.assertIn('calibrate', str(run))


class CommandTests(TestCase):

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def call(self, *args):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO())
        return out.getvalue()

    def test_same_seed_gives_identical_csvs(self):
        self.call('experiment', 'validate', '--seed', '7', '--out', str(self.tmp / 'a'))
        self.call('experiment', 'validate', '--seed', '7', '--out', str(self.tmp / 'b'))
        for name in ('results.csv', 'pools.csv', 'errors.csv'):
            self.assertEqual((self.tmp / 'a' / name).read_bytes(), (self.tmp / 'b' / name).read_bytes(), name)

    def test_seed_sweep_with_ledger(self):
        output = self.call('experiment', 'validate', '--seeds', '2', '--seed', '3', '--noise', 'off',
                           '--record', '--out', str(self.tmp))
        self.assertIn('48/48', output)
        sweep = pd.read_csv(self.tmp / 'sweep.csv')
        self.assertEqual(list(sweep['seed']), [3, 4])
        self.assertTrue((self.tmp / 'seed_0003' / 'results.csv').exists())
        self.assertEqual(ExperimentRun.objects.count(), 2)

    def test_mnist_and_calibrate(self):
        self.call('experiment', 'mnist', '--noise', 'off', '--out', str(self.tmp / 'mnist'))
        table = pd.read_csv(self.tmp / 'mnist' / 'table.csv', index_col='classifier', dtype={'classifier': str})
        self.assertEqual(table.loc['0', 'zero_a'], 'match')
        self.call('experiment', 'calibrate', '--out', str(self.tmp / 'cal'))
        self.assertTrue((self.tmp / 'cal' / 'calibration.json').exists())

    def test_errors_are_one_json_line(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('experiment', 'validate', '--config', str(self.tmp / 'missing.toml'))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertEqual(json.loads(str(ctx.exception))['error'], 'ConfigError')

    def test_config_file_reaches_the_run(self):
        path = self.tmp / 'small.toml'
        path.write_text('[validation]\ntrials = 2\n')
        output = self.call('experiment', 'validate', '--config', str(path), '--noise', 'off',
                           '--out', str(self.tmp / 'v'))
        self.assertIn('6/6', output)
        self.assertEqual(len(pd.read_csv(self.tmp / 'v' / 'results.csv')), 6)

    def test_quantify_usage_errors_are_json(self):
        profile = HplcProfile.from_settings()
        measure(SolutionState.of(100.0, {1: 0.5}), profile, InjectionModel.off()).to_csv(self.tmp / 'one.csv')
        for args in (('--sample', 'pools/A1'), (str(self.tmp / 'one.csv'), '--differential')):
            with self.subTest(args=args), self.assertRaises(CommandError) as ctx:
                self.call('quantify', *args, '--out', str(self.tmp / 'q'))
            self.assertEqual(ctx.exception.returncode, 2)
            self.assertEqual(json.loads(str(ctx.exception))['error'], 'ConfigError')

    def test_encode_compile_run_quantify(self):
        fixtures = Path(settings.CHEMLAB['MNIST']['fixtures_dir'])
        enc, comp, ran, quant = (self.tmp / name for name in ('enc', 'comp', 'ran', 'quant'))
        self.call('encode', str(fixtures / 'zero_a.txt'), str(fixtures / 'one.txt'), '--noise', 'off', '--out', str(enc))
        for name in ('plan.json', 'writes.jsonl', 'deck.json', 'plate.png', 'cost.json', 'chemistry.json'):
            self.assertTrue((enc / name).exists(), name)
        self.assertEqual(json.loads((enc / 'cost.json').read_text())['n_transfers'], 512)

        self.call('compile', str(fixtures / 'weights_0.csv'), '--plan', str(enc / 'plan.json'),
                  '--deck', str(enc / 'deck.json'), '--out', str(comp))
        self.call('run', str(comp / 'program.jsonl'), '--deck', str(enc / 'deck.json'), '--noise', 'off',
                  '--out', str(ran))
        output = self.call('quantify', '--deck', str(ran / 'deck.json'), '--sample', 'pools/A1',
                           '--sample', 'pools/A2', '--differential', '--noise', 'off', '--out', str(quant))
        differential = pd.read_csv(quant / 'differential.csv')
        self.assertEqual(list(differential['label']), ['match', 'mismatch', 'mismatch'])
        self.assertEqual(differential['z'].iloc[2], 0.0)
        self.assertIn('analyte 1', output)
        self.assertEqual(len(pd.read_csv(quant / 'concentrations.csv')), 6)

    def test_quantify_chromatogram_files(self):
        profile = HplcProfile.from_settings()
        chrom = measure(SolutionState.of(100.0, {1: 0.5, 2: 0.3, 3: 0.2}), profile, InjectionModel.off())
        chrom.to_csv(self.tmp / 'sample.csv')
        self.call('quantify', str(self.tmp / 'sample.csv'), '--out', str(self.tmp / 'q'))
        frame = pd.read_csv(self.tmp / 'q' / 'concentrations.csv')
        self.assertEqual(list(frame['analyte']), [1, 2, 3])
        np.testing.assert_allclose(frame['concentration_mg_ml'], [0.5, 0.3, 0.2], rtol=0.01)

    def test_run_without_encoded_wells_fails(self):
        fixtures = Path(settings.CHEMLAB['MNIST']['fixtures_dir'])
        self.call('encode', str(fixtures / 'one.txt'), '--out', str(self.tmp / 'enc'))
        self.call('compile', str(fixtures / 'weights_1.csv'), '--plan', str(self.tmp / 'enc' / 'plan.json'),
                  '--out', str(self.tmp / 'comp'))
        with self.assertRaises(CommandError) as ctx:
            self.call('run', str(self.tmp / 'comp' / 'program.jsonl'), '--out', str(self.tmp / 'ran'))
        self.assertEqual(json.loads(str(ctx.exception))['error'], 'BudgetExceeded')

    def test_train(self):
        images, labels = synthetic_digits()
        write_idx(self.tmp / 'images.idx', images)
        write_idx(self.tmp / 'labels.idx', labels)
        self.call('train', '--images', str(self.tmp / 'images.idx'), '--labels', str(self.tmp / 'labels.idx'),
                  '--digit', '0', '--digit', '1', '--per-class', '6', '--epochs', '10', '--out', str(self.tmp / 't'))
        for name in ('classifier_0.json', 'weights_1.csv', 'weights_1.svg'):
            self.assertTrue((self.tmp / 't' / name).exists(), name)
        self.assertEqual(json.loads((self.tmp / 't' / 'classifier_0.json').read_text())['bias'], 0.0)
