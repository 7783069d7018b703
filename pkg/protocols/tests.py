from pathlib import Path

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, tag
from hypothesis import given, settings as hypothesis_settings, strategies as st

from chemlab.exceptions import ConfigError
from encoding.datasets import Dataset
from encoding.plans import emit_write_instructions, layout, written_concentration
from mixtures.exceptions import PlateMismatch
from mixtures.plates import Deck, PlateState, WellAddress
from perceptron.classifiers import TrainedClassifier
from perceptron.exceptions import LengthMismatch
from robot.executor import NoiseModel, execute

from .compiler import (
    CompileConfig, CostReport, check_budget, compile_classifier, count_feasible_passes, operation_counts,
    plate_for, pool_volume, quantize, realizable, write_cost,
)
from .exceptions import BudgetExceeded, InfeasiblePool, MalformedInstruction, MissingBiasWell
from .instructions import Instruction, InstructionSequence, Location, Op, assign_tips

EXACT = CompileConfig(quantize=False)


def pool_deck(plan, volume=60.0):
    return Deck([plate_for(plan, volume), PlateState.from_settings('POOL_PLATE', 'pools')])


def pools_of(deck, program):
    positive = Location.parse(program.metadata['pools']['positive'])
    negative = Location.parse(program.metadata['pools']['negative'])
    return (deck.plate(positive.plate).well(positive.address), deck.plate(negative.plate).well(negative.address))


class QuantizeTests(SimpleTestCase):

    def test_half_to_even_on_the_grid(self):
        cfg = CompileConfig()
        self.assertEqual(quantize(3.125, cfg), 3.1)
        self.assertEqual(quantize(3.175, cfg), 3.2)
        self.assertEqual(quantize(6.25, cfg), 6.25)

    def test_below_minimum_is_dropped(self):
        with self.assertLogs('protocols.compiler', level='WARNING'):
            self.assertEqual(quantize(0.02, CompileConfig()), 0.0)

    def test_disabled_quantization_is_exact(self):
        self.assertEqual(quantize(3.125, EXACT), 3.125)

    def test_negative_volume(self):
        with self.assertRaises(ValueError):
            quantize(-1.0, CompileConfig())

    def test_realizable_weights(self):
        w = realizable(TrainedClassifier([0.5, -0.5, 0.01, 1.0]), CompileConfig())
        np.testing.assert_allclose(w.weights, [3.1 / 6.25, -3.1 / 6.25, 0.0, 1.0])


class CompileConfigTests(SimpleTestCase):

    def test_from_settings(self):
        cfg = CompileConfig.from_settings(pool_volume=100.0)
        self.assertEqual((cfg.v_o, cfg.resolution, cfg.min_transfer, cfg.pool_volume), (6.25, 0.05, 0.5, 100.0))

    def test_invalid_values(self):
        for kwargs in ({'v_o': 0}, {'resolution': -0.1}, {'pool_volume': -5.0}, {'tip_policy': 'never'}):
            with self.subTest(**kwargs), self.assertRaises(ConfigError):
                CompileConfig(**kwargs)


class PoolVolumeTests(SimpleTestCase):

    def test_auto_takes_the_next_five_microlitres(self):
        self.assertEqual(float(pool_volume(12.0, 7.5, CompileConfig())), 15.0)
        self.assertEqual(float(pool_volume(0.0, 0.0, CompileConfig())), 5.0)

    def test_auto_avoids_unpipettable_top_ups(self):
        self.assertEqual(float(pool_volume(14.8, 3.0, CompileConfig())), 20.0)

    def test_fixed_volume_must_hold_the_draws(self):
        with self.assertRaises(InfeasiblePool):
            pool_volume(12.0, 7.5, CompileConfig(pool_volume=10.0))
        self.assertEqual(float(pool_volume(12.0, 7.5, CompileConfig(pool_volume=100.0))), 100.0)


class CompileTests(SimpleTestCase):

    def test_two_weights(self):
        plan = layout(2)
        program = compile_classifier(TrainedClassifier([0.5, -0.5]), plan, CompileConfig())
        ops = [i.op for i in program]
        self.assertEqual(ops, [Op.TRANSFER_FROM_WELL, Op.TRANSFER_FROM_WELL, Op.TRANSFER_SOLVENT, Op.TRANSFER_SOLVENT])
        self.assertEqual([i.volume for i in program][:2], [3.1, 3.1])
        self.assertEqual(program[0].dst.label, 'pools/A1')
        self.assertEqual(program[1].dst.label, 'pools/A2')
        self.assertAlmostEqual(program[2].volume, 1.9)
        self.assertEqual(program.metadata['pool_volume_ul'], 5.0)

    def test_zero_weights_give_solvent_pools(self):
        plan = layout(4)
        program = compile_classifier(TrainedClassifier(np.zeros(4)), plan, CompileConfig())
        self.assertEqual(program.count(Op.TRANSFER_FROM_WELL), 0)
        self.assertEqual(program.count(Op.TRANSFER_SOLVENT), 2)
        deck, _ = execute(program, pool_deck(plan), NoiseModel.off())
        positive, negative = pools_of(deck, program)
        self.assertEqual(positive.masses, {})
        self.assertEqual(positive.volume, negative.volume)

    def test_bundled_256_weight_classifier(self):
        base = Path(settings.CHEMLAB['MNIST']['fixtures_dir'])
        w = TrainedClassifier.from_weight_csv(base / 'weights_0.csv', foreground='0')
        plan = layout(256)
        program = compile_classifier(w, plan)
        draws = program.count(Op.TRANSFER_FROM_WELL)
        self.assertLessEqual(draws, 256)
        self.assertLessEqual(len(program), 256 + 2)
        self.assertEqual(write_cost(program).n_transfers, len(program))
        self.assertEqual(draws + program.metadata['dropped_weights'], int(np.count_nonzero(w.weights)))

    def test_length_mismatch(self):
        with self.assertRaises(LengthMismatch):
            compile_classifier(TrainedClassifier([0.5]), layout(2))

    def test_bias_needs_a_bias_well(self):
        with self.assertRaises(MissingBiasWell):
            compile_classifier(TrainedClassifier([0.5, 0.5], bias=-0.5), layout(2))
        plan = layout(2, bias=True)
        program = compile_classifier(TrainedClassifier([0.5, 0.5], bias=-0.5), plan)
        bias_draws = [i for i in program if i.src.is_well and i.src.address == plan.bias_well]
        self.assertEqual(len(bias_draws), 1)
        self.assertEqual(bias_draws[0].dst.label, 'pools/A2')

    def test_pools_end_at_equal_volume(self):
        plan = layout(16)
        rng = np.random.default_rng(4)
        program = compile_classifier(TrainedClassifier(rng.uniform(-1, 1, 16)), plan)
        deck, _ = execute(program, pool_deck(plan), NoiseModel.off())
        positive, negative = pools_of(deck, program)
        self.assertAlmostEqual(positive.volume, program.metadata['pool_volume_ul'], places=9)
        self.assertAlmostEqual(negative.volume, program.metadata['pool_volume_ul'], places=9)

    def test_volumes_sit_on_the_resolution_grid(self):
        plan = layout(64)
        program = compile_classifier(TrainedClassifier(np.random.default_rng(8).uniform(-1, 1, 64)), plan)
        for instruction in program:
            steps = instruction.volume / 0.05
            self.assertAlmostEqual(steps, round(steps), places=6)
            self.assertGreaterEqual(instruction.volume, 0.5)


def encoded_deck(datasets, plan):
    writes = emit_write_instructions(datasets, plan)
    deck, _ = execute(writes, Deck.standard(), NoiseModel.off())
    return deck


def simulated_z(deck, program, analyte_ids):
    positive, negative = pools_of(deck, program)
    return {a: positive.concentration(a) - negative.concentration(a) for a in analyte_ids}


def oracle_z(w, bits, stock, n_datasets, v_o, v_p):
    return v_o / v_p * written_concentration(stock, n_datasets) * float(np.dot(w, bits))


def check_oracle_equivalence(test, weights, bit_rows, cfg=EXACT):
    n_bits = len(weights)
    datasets = [Dataset(a, tuple(int(b) for b in bits)) for a, bits in zip((1, 2, 3), bit_rows)]
    plan = layout(n_bits)
    w = TrainedClassifier(weights)
    program = compile_classifier(w, plan, cfg)
    deck, _ = execute(program, encoded_deck(datasets, plan), NoiseModel.off())
    v_p = program.metadata['pool_volume_ul']
    realized = realizable(w, cfg).weights
    z = simulated_z(deck, program, [d.analyte for d in datasets])
    for dataset in datasets:
        expected = oracle_z(realized, dataset.bits, 62.5, len(datasets), cfg.v_o, v_p)
        scale = oracle_z(np.abs(realized), np.ones(n_bits), 62.5, len(datasets), cfg.v_o, v_p)
        test.assertLessEqual(abs(z[dataset.analyte] - expected), 1e-9 * max(scale, 1e-12))
    return program, z, datasets, v_p


bit_matrix = st.integers(min_value=1, max_value=64).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(-1, 1, allow_subnormal=False), min_size=n, max_size=n),
        st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=1, max_size=3),
    )
)


class OracleEquivalenceTests(SimpleTestCase):

    @hypothesis_settings(max_examples=60, deadline=None)
    @given(case=bit_matrix)
    def test_unquantized_pools_match_the_oracle(self, case):
        weights, bit_rows = case
        check_oracle_equivalence(self, weights, bit_rows)

    @tag('slow')
    def test_thousand_random_instances(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            n = int(rng.integers(1, 65))
            m = int(rng.integers(1, 4))
            check_oracle_equivalence(self, rng.uniform(-1, 1, n), rng.integers(0, 2, (m, n)))

    @hypothesis_settings(max_examples=40, deadline=None)
    @given(case=bit_matrix, signs=st.lists(st.booleans(), min_size=64, max_size=64))
    def test_quantized_error_bound(self, case, signs):
        weights, bit_rows = case
        # every weight large enough to survive the minimum transfer
        weights = [(0.08 + 0.92 * abs(w)) * (1 if s else -1) for w, s in zip(weights, signs)]
        cfg = CompileConfig()
        program, z, datasets, v_p = check_oracle_equivalence(self, weights, bit_rows, cfg)
        n_bits = len(weights)
        c_max = written_concentration(62.5, len(datasets))
        bound = n_bits * cfg.resolution / v_p * c_max
        for dataset in datasets:
            raw = oracle_z(np.array(weights), dataset.bits, 62.5, len(datasets), cfg.v_o, v_p)
            self.assertLessEqual(abs(z[dataset.analyte] - raw), bound + 1e-9)


class BudgetTests(SimpleTestCase):

    def full_weight_program(self, plan):
        return compile_classifier(TrainedClassifier(np.ones(plan.n_bits)), plan)

    def test_nine_full_passes_fit_sixty_microlitres(self):
        plan = layout(16)
        plate = plate_for(plan, 60.0)
        program = self.full_weight_program(plan)
        nine = InstructionSequence()
        for _ in range(9):
            nine = nine + program
        cost = check_budget(nine, plate)
        self.assertAlmostEqual(cost.max_draw, 56.25)
        with self.assertRaises(BudgetExceeded) as ctx:
            check_budget(nine + program, plate)
        self.assertEqual(ctx.exception.detail['well'], 'data/A1')
        self.assertAlmostEqual(ctx.exception.detail['available'], 3.75)
        self.assertEqual(count_feasible_passes([program] * 12, plate).passes, 9)

    def test_uniform_weights_serve_about_twenty_passes(self):
        plan = layout(256)
        plate = plate_for(plan, 60.0)
        rng = np.random.default_rng(11)
        programs = (compile_classifier(TrainedClassifier(rng.uniform(0, 1, 256)), plan) for _ in range(1000))
        with self.assertLogs('protocols.compiler', level='WARNING'):
            result = count_feasible_passes(programs, plate)
        self.assertGreaterEqual(result.mean_per_well, 17)
        self.assertLessEqual(result.mean_per_well, 22)
        self.assertLess(result.passes, result.mean_per_well)

    def test_empty_sequence_costs_nothing(self):
        cost = check_budget(InstructionSequence(), plate_for(layout(4), 60.0))
        self.assertEqual((cost.n_transfers, cost.n_tips, cost.est_time_min, cost.max_draw), (0, 0, 0.0, 0.0))

    def test_budget_check_does_not_touch_the_plate(self):
        plan = layout(4)
        plate = plate_for(plan, 60.0)
        check_budget(self.full_weight_program(plan), plate)
        self.assertEqual(plate.well(WellAddress(0, 0)).volume, 60.0)

    def test_unknown_plate(self):
        program = self.full_weight_program(layout(4))
        with self.assertRaises(PlateMismatch):
            check_budget(program, PlateState(4, 4, name='other'))


class CostTests(SimpleTestCase):

    def test_operation_counts(self):
        counts = operation_counts(3, 256)
        self.assertEqual(counts['silicon'], {'additions': 767, 'multiplications': 768, 'total': 1535})
        self.assertEqual(counts['chemical'], {'operations': 256, 'total': 256})

    def test_time_model_and_merge(self):
        program = compile_classifier(TrainedClassifier([0.5, -0.5]), layout(2))
        cost = write_cost(program)
        self.assertEqual(cost.est_time_min, 4 * 45 / 60)
        merged = cost.merge(cost)
        self.assertEqual(merged.n_transfers, 8)
        self.assertAlmostEqual(merged.draws['data/A1'], 6.2)
        self.assertEqual(merged.by_op['transfer_solvent'], 4)
        self.assertEqual(CostReport().to_dict()['n_transfers'], 0)


class InstructionFormatTests(SimpleTestCase):

    def test_jsonl_line(self):
        instruction = Instruction(Op.TRANSFER_FROM_WELL, Location.parse('data/A1'), Location.parse('pools/A2'),
                                  3.1, new_tip=True)
        self.assertEqual(
            instruction.to_jsonl(),
            '{"op": "transfer_from_well", "src": "data/A1", "dst": "pools/A2", "vol_ul": 3.100, "new_tip": true}',
        )
        self.assertEqual(Instruction.from_jsonl(instruction.to_jsonl()), instruction)

    def test_sequence_round_trip(self):
        program = compile_classifier(TrainedClassifier([0.5, -0.25, 0.75]), layout(3))
        self.assertEqual(InstructionSequence.from_jsonl(program.to_jsonl()).instructions, program.instructions)

    def test_malformed_lines(self):
        good = '{"op": "transfer_solvent", "src": "solvent", "dst": "data/A1", "vol_ul": 20.000, "new_tip": true}'
        for bad in ('{"op": "transfer_solvent"}', 'not json',
                    good.replace('transfer_solvent', 'shake'),
                    good.replace('"solvent"', '"stock/1"'),
                    good.replace('"data/A1"', '"solvent"'),
                    good.replace('20.000', '-1')):
            with self.subTest(line=bad), self.assertRaises(MalformedInstruction):
                InstructionSequence.from_jsonl(good + '\n' + bad + '\n')
        with self.assertRaises(MalformedInstruction) as ctx:
            InstructionSequence.from_jsonl(good + '\n' + good.replace('data/A1', 'data/') + '\n')
        self.assertEqual(ctx.exception.detail['line'], 2)

    def test_tip_policies(self):
        well = Location.well('data', WellAddress(0, 0))
        other = Location.well('data', WellAddress(0, 1))
        pool = Location.well('pools', WellAddress(0, 0))
        instructions = [
            Instruction(Op.TRANSFER_FROM_WELL, well, pool, 1.0),
            Instruction(Op.TRANSFER_FROM_WELL, well, Location.well('pools', WellAddress(0, 1)), 1.0),
            Instruction(Op.TRANSFER_FROM_WELL, other, pool, 1.0),
        ]
        self.assertEqual(sum(i.new_tip for i in assign_tips(instructions, 'per-source')), 2)
        self.assertEqual(sum(i.new_tip for i in assign_tips(instructions, 'per-destination')), 3)
        self.assertEqual(sum(i.new_tip for i in assign_tips(instructions, 'always')), 3)
        with self.assertRaises(ConfigError):
            assign_tips(instructions, 'sometimes')
