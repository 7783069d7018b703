import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase, tag

from mixtures.plates import Deck, PlateState, WellAddress
from protocols.exceptions import BudgetExceeded
from protocols.instructions import Instruction, InstructionSequence, Location, Op, assign_tips

from .executor import LOG_COLUMNS, ExecutionLog, NoiseModel, execute


def well(row, col, plate='data'):
    return Location.well(plate, WellAddress(row, col))


def random_sequence(rng, rows=4, cols=4, length=40):
    """Writes into every well, then well-to-well transfers that stay within the intended volumes"""
    volumes = {}
    instructions = []
    for row in range(rows):
        for col in range(cols):
            address = WellAddress(row, col)
            for _ in range(int(rng.integers(1, 3))):
                volume = float(rng.uniform(5, 20))
                if rng.random() < 0.5:
                    src, op = Location.stock(int(rng.integers(1, 4))), Op.TRANSFER_STOCK
                else:
                    src, op = Location.solvent(), Op.TRANSFER_SOLVENT
                instructions.append(Instruction(op, src, Location.well('data', address), volume))
                volumes[address] = volumes.get(address, 0.0) + volume
    addresses = list(volumes)
    for _ in range(length):
        src, dst = (addresses[i] for i in rng.choice(len(addresses), 2, replace=False))
        if volumes[dst] > 50:
            continue
        volume = float(rng.uniform(0, volumes[src] / 2))
        instructions.append(Instruction(Op.TRANSFER_FROM_WELL, Location.well('data', src),
                                        Location.well('data', dst), volume))
        volumes[src] -= volume
        volumes[dst] += volume
    return InstructionSequence(assign_tips(instructions, 'per-source'))


class NoiseModelTests(SimpleTestCase):

    def test_disabled_delivers_exactly(self):
        rng = np.random.default_rng(0)
        self.assertEqual(NoiseModel.off().delivered(3.1, rng), 3.1)

    def test_spread_of_twenty_microlitre_transfers(self):
        rng = np.random.default_rng(1)
        noise = NoiseModel(pipette_cv=0.02)
        delivered = np.array([noise.delivered(20.0, rng) for _ in range(10_000)])
        self.assertAlmostEqual(delivered.std(ddof=1), 0.4, delta=0.02)
        self.assertAlmostEqual(delivered.mean(), 20.0, delta=0.02)

    def test_bias_shifts_the_mean(self):
        rng = np.random.default_rng(2)
        noise = NoiseModel(pipette_cv=0.0, pipette_bias=0.01)
        self.assertAlmostEqual(noise.delivered(10.0, rng), 10.1)

    def test_never_negative(self):
        rng = np.random.default_rng(3)
        noise = NoiseModel(pipette_cv=5.0)
        self.assertTrue(all(noise.delivered(1.0, rng) >= 0 for _ in range(200)))

    def test_from_settings(self):
        noise = NoiseModel.from_settings(enabled=False)
        self.assertEqual((noise.pipette_cv, noise.enabled), (0.02, False))
        with self.assertRaises(ValueError):
            NoiseModel(pipette_cv=-0.1)


class ExecuteTests(SimpleTestCase):

    def test_noise_off_replays_the_intended_volumes(self):
        seq = random_sequence(np.random.default_rng(5))
        plate = PlateState(4, 4)
        result, log = execute(seq, plate, NoiseModel.off())
        self.assertEqual([e.delivered_ul for e in log], [e.intended_ul for e in log])
        expected = {}
        for instruction in seq:
            if instruction.src.is_well:
                expected[instruction.src.address] = expected.get(instruction.src.address, 0.0) - instruction.volume
            expected[instruction.dst.address] = expected.get(instruction.dst.address, 0.0) + instruction.volume
        for address, volume in expected.items():
            self.assertAlmostEqual(result.well(address).volume, volume, places=9)
        self.assertEqual(plate.total_volume(), 0.0)

    def test_same_seed_same_run(self):
        seq = random_sequence(np.random.default_rng(6))
        _, first = execute(seq, PlateState(4, 4), NoiseModel(pipette_cv=0.02), seed=42)
        _, second = execute(seq, PlateState(4, 4), NoiseModel(pipette_cv=0.02), seed=42)
        _, other = execute(seq, PlateState(4, 4), NoiseModel(pipette_cv=0.02), seed=43)
        pd.testing.assert_frame_equal(first.to_frame(), second.to_frame())
        self.assertNotEqual(first.total_delivered, other.total_delivered)

    def test_noisy_overdraw_is_truncated(self):
        plate = PlateState(1, 2)
        plate.wells[WellAddress(0, 0)].volume = 10.0
        seq = InstructionSequence([Instruction(Op.TRANSFER_FROM_WELL, well(0, 0), well(0, 1), 10.0, new_tip=True)])
        with self.assertLogs('robot.executor', level='WARNING'):
            result, log = execute(seq, plate, NoiseModel(pipette_cv=0.0, pipette_bias=0.5))
        entry = log.entries[0]
        self.assertTrue(entry.truncated)
        self.assertEqual(entry.delivered_ul, 10.0)
        self.assertEqual(log.n_truncated, 1)
        self.assertEqual(result.well(WellAddress(0, 0)).volume, 0.0)
        self.assertEqual(result.well(WellAddress(0, 1)).volume, 10.0)

    def test_intended_overdraw_fails_before_moving_anything(self):
        plate = PlateState(1, 2)
        seq = InstructionSequence([Instruction(Op.TRANSFER_FROM_WELL, well(0, 0), well(0, 1), 1.0)])
        with self.assertRaises(BudgetExceeded):
            execute(seq, plate, NoiseModel.off())

    def test_tip_ids_follow_new_tip_flags(self):
        seq = random_sequence(np.random.default_rng(7))
        _, log = execute(seq, PlateState(4, 4), NoiseModel.off())
        self.assertEqual(log.n_tips, seq.n_tips)

    def test_stock_draws_are_ledgered(self):
        deck = Deck([PlateState(1, 1)])
        seq = InstructionSequence([Instruction(Op.TRANSFER_STOCK, Location.stock(2), well(0, 0), 20.0)])
        result, _ = execute(seq, deck, NoiseModel.off())
        self.assertAlmostEqual(result.supplied.mass(2), 62.5 * 20 / 1000)
        self.assertAlmostEqual(result.total_mass(2), result.supplied.mass(2))
        self.assertEqual(deck.supplied.volume, 0.0)

    def check_conservation(self, seed):
        rng = np.random.default_rng(seed)
        seq = random_sequence(rng)
        noise = NoiseModel(pipette_cv=0.02) if seed % 2 else NoiseModel.off()
        deck, _ = execute(seq, Deck([PlateState(4, 4)]), noise, seed=seed)
        for analyte_id in (1, 2, 3):
            supplied = deck.supplied.mass(analyte_id)
            self.assertLessEqual(abs(deck.total_mass(analyte_id) - supplied), 1e-12 * supplied)
        self.assertLessEqual(abs(deck.total_volume() - deck.supplied.volume), 1e-12 * deck.supplied.volume)

    def test_mass_is_conserved(self):
        for seed in range(20):
            with self.subTest(seed=seed):
                self.check_conservation(seed)

    @tag('slow')
    def test_mass_is_conserved_over_a_thousand_runs(self):
        for seed in range(1000):
            self.check_conservation(seed)


class ExecutionLogTests(SimpleTestCase):

    def test_csv_columns(self):
        seq = random_sequence(np.random.default_rng(8), length=5)
        _, log = execute(seq, PlateState(4, 4), NoiseModel.off())
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'log.csv'
            log.to_csv(path)
            frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), LOG_COLUMNS)
        self.assertEqual(len(frame), len(seq))

    def test_extend_offsets_indices_and_tips(self):
        seq = random_sequence(np.random.default_rng(9), length=3)
        _, log = execute(seq, PlateState(4, 4), NoiseModel.off())
        merged = ExecutionLog().extend(log).extend(log)
        self.assertEqual(len(merged), 2 * len(log))
        self.assertEqual(merged.entries[len(log)].index, len(log))
        self.assertEqual(merged.n_tips, 2 * log.n_tips)
        self.assertAlmostEqual(merged.total_intended, 2 * log.total_intended)
