import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, override_settings
from django.conf import settings
from hypothesis import given, settings as hypothesis_settings, strategies as st
from PIL import Image

from mixtures.exceptions import UnknownAnalyte
from mixtures.plates import Deck, PlateState, WellAddress
from mixtures.solutions import Analyte, AnalyteRegistry
from protocols.instructions import Op
from robot.executor import NoiseModel, execute

from .chemistry import INERT, QUANTIFIABLE, Compatibility, validate_chemistry
from .datasets import (
    Dataset, check_batch, grid_text, load_dataset_json, load_grid, load_grid_png, parse_grid, write_dataset_json,
)
from .exceptions import AnalyteCollision, DatasetMismatch, MalformedDataset, PlateTooSmall
from .plans import EncodingPlan, emit_write_instructions, layout, read_bits, reserve_bias_well, written_concentration
from .rendering import WELL_PX, render_plate


class LayoutTests(SimpleTestCase):

    def test_256_bits_fill_a_16x16_block(self):
        plan = layout(256, (16, 24))
        self.assertEqual(len(set(plan.wells)), 256)
        self.assertEqual(plan.wells[0], WellAddress(0, 0))
        self.assertEqual(plan.wells[15], WellAddress(0, 15))
        self.assertEqual(plan.wells[16], WellAddress(1, 0))
        self.assertEqual(plan.wells[255], WellAddress(15, 15))
        self.assertEqual(plan.block_width(), 16)

    def test_single_bit(self):
        self.assertEqual(layout(1, (16, 24)).wells, (WellAddress(0, 0),))

    def test_full_plate(self):
        plan = layout(384, (16, 24))
        self.assertEqual(len(set(plan.wells)), 384)

    def test_plate_too_small(self):
        with self.assertRaises(PlateTooSmall):
            layout(385, (16, 24))

    def test_sixteen_bits_form_a_square(self):
        plan = layout(16)
        self.assertEqual(plan.block_width(), 4)
        self.assertEqual(plan.wells[-1], WellAddress(3, 3))

    def test_bias_well_is_first_free_well(self):
        plan = layout(256, bias=True)
        self.assertEqual(plan.bias_well, WellAddress(0, 16))
        self.assertEqual(reserve_bias_well(plan), plan)

    def test_plan_dict_round_trip(self):
        plan = layout(20, bias=True)
        self.assertEqual(EncodingPlan.from_dict(json.loads(json.dumps(plan.to_dict()))), plan)

    def test_plan_rejects_shared_wells(self):
        with self.assertRaises(ValueError):
            EncodingPlan(wells=(WellAddress(0, 0), WellAddress(0, 0)), plate_dims=(2, 2))

    @hypothesis_settings(max_examples=60, deadline=None)
    @given(n_bits=st.integers(min_value=1, max_value=384))
    def test_layout_is_injective_and_in_bounds(self, n_bits):
        plan = layout(n_bits, (16, 24))
        self.assertEqual(len(set(plan.wells)), n_bits)
        self.assertTrue(all(0 <= a.row < 16 and 0 <= a.col < 24 for a in plan.wells))


class DatasetTests(SimpleTestCase):

    def test_bits_must_be_binary(self):
        with self.assertRaises(MalformedDataset):
            Dataset(1, (0, 2))
        with self.assertRaises(MalformedDataset):
            Dataset(1, ())

    def test_batch_checks(self):
        with self.assertRaises(DatasetMismatch):
            check_batch([])
        with self.assertRaises(DatasetMismatch):
            check_batch([Dataset(1, (1, 0)), Dataset(2, (1,))])
        with self.assertRaises(AnalyteCollision):
            check_batch([Dataset(1, (1, 0)), Dataset(1, (0, 1))])
        with self.assertRaises(UnknownAnalyte):
            check_batch([Dataset(9, (1, 0))])

    def test_json_one_or_many(self):
        with tempfile.TemporaryDirectory() as tmp:
            single = Path(tmp) / 'one.json'
            single.write_text('{"analyte": 2, "bits": [1, 0, 1]}')
            self.assertEqual(load_dataset_json(single), [Dataset(2, (1, 0, 1))])
            many = Path(tmp) / 'many.json'
            write_dataset_json([Dataset(1, (0, 1)), Dataset(3, (1, 1))], many)
            self.assertEqual(load_dataset_json(many), [Dataset(1, (0, 1)), Dataset(3, (1, 1))])

    def test_bad_json_record(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bad.json'
            path.write_text('{"analyte": 1}')
            with self.assertRaises(MalformedDataset):
                load_dataset_json(path)

    def test_grid_parsing(self):
        self.assertEqual(parse_grid("01\n10\n"), (0, 1, 1, 0))
        self.assertEqual(grid_text((0, 1, 1, 0), 2), "01\n10\n")
        with self.assertRaises(MalformedDataset):
            parse_grid("01\n1\n")
        with self.assertRaises(MalformedDataset):
            parse_grid("0x\n")

    def test_bundled_digit_grids(self):
        base = Path(settings.CHEMLAB['MNIST']['fixtures_dir'])
        for name in ('zero_a', 'zero_b', 'one'):
            bits = load_grid(base / f"{name}.txt")
            self.assertEqual(len(bits), 256)
            self.assertTrue(0 < sum(bits) < 256)

    def test_png_thresholds_at_half_maximum(self):
        pixels = np.array([[0, 100], [127, 200]], dtype=np.uint8)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'digit.png'
            Image.fromarray(pixels).save(path)
            self.assertEqual(load_grid_png(path), (0, 1, 1, 1))
            self.assertEqual(load_grid_png(path, size=4).count(1), 12)


class WriteInstructionTests(SimpleTestCase):

    def test_one_dataset_two_bits(self):
        plan = layout(2, (1, 2))
        writes = emit_write_instructions([Dataset(1, (1, 0))], plan)
        self.assertEqual(len(writes), 2)
        first, second = writes
        self.assertEqual((first.op, first.dst.address, first.volume), (Op.TRANSFER_STOCK, WellAddress(0, 0), 20.0))
        self.assertEqual((second.op, second.dst.address, second.volume),
                         (Op.TRANSFER_SOLVENT, WellAddress(0, 1), 20.0))

    def test_three_images_make_768_writes_of_60_ul(self):
        rng = np.random.default_rng(3)
        datasets = [Dataset(a, tuple(rng.integers(0, 2, 256))) for a in (1, 2, 3)]
        plan = layout(256)
        writes = emit_write_instructions(datasets, plan)
        self.assertEqual(len(writes), 768)
        self.assertEqual(writes.n_tips, 6)
        deck, _ = execute(writes, Deck.standard(), NoiseModel.off())
        plate = deck.plate('data')
        for address in plan.wells:
            self.assertAlmostEqual(plate.well(address).volume, 60.0)
        one = next(i for i, b in enumerate(datasets[0].bits) if b)
        self.assertAlmostEqual(plate.well(plan.wells[one]).concentration(1), 62.5 * 20 / 60)
        self.assertAlmostEqual(written_concentration(62.5, 3), 20.833333333333332)

    def test_write_count_ignores_bit_values(self):
        plan = layout(8)
        zeros = emit_write_instructions([Dataset(1, (0,) * 8)], plan)
        ones = emit_write_instructions([Dataset(1, (1,) * 8)], plan)
        self.assertEqual(len(zeros), len(ones))

    def test_bias_well_takes_stock_from_every_dataset(self):
        plan = layout(4, bias=True)
        writes = emit_write_instructions([Dataset(1, (0, 0, 0, 0)), Dataset(2, (0, 0, 0, 0))], plan)
        bias_writes = [i for i in writes if i.dst.address == plan.bias_well]
        self.assertEqual([i.op for i in bias_writes], [Op.TRANSFER_STOCK, Op.TRANSFER_STOCK])

    def test_length_must_match_plan(self):
        with self.assertRaises(DatasetMismatch):
            emit_write_instructions([Dataset(1, (1, 0, 1))], layout(2))

    @hypothesis_settings(max_examples=40, deadline=None)
    @given(bits=st.lists(st.lists(st.integers(0, 1), min_size=24, max_size=24), min_size=1, max_size=3))
    def test_decode_after_encode(self, bits):
        datasets = [Dataset(a, tuple(b)) for a, b in zip((1, 2, 3), bits)]
        plan = layout(24)
        deck, _ = execute(emit_write_instructions(datasets, plan), Deck.standard(), NoiseModel.off())
        decoded = read_bits(deck.plate('data'), plan, [d.analyte for d in datasets], AnalyteRegistry.from_settings())
        for dataset in datasets:
            self.assertEqual(decoded[dataset.analyte], dataset.bits)


class ChemistryTests(SimpleTestCase):

    def test_default_phenols_pass(self):
        report = validate_chemistry(list(AnalyteRegistry.from_settings()))
        self.assertTrue(report.ok)

    def test_reactive_flag(self):
        report = validate_chemistry([Analyte(1, 'reactive', inert=False)])
        self.assertEqual([v.criterion for v in report.violations], [INERT])

    def test_reactive_pair(self):
        registry = AnalyteRegistry.from_settings()
        report = validate_chemistry(list(registry), Compatibility(reactive_pairs=frozenset({(1, 2)})))
        self.assertEqual(sorted(v.analyte for v in report.violations), [1, 2])

    def test_reactive_pairs_come_from_settings(self):
        encoding = {**settings.CHEMLAB['ENCODING'], 'reactive_pairs': [[2, 3]]}
        with override_settings(CHEMLAB={**settings.CHEMLAB, 'ENCODING': encoding}):
            self.assertEqual(Compatibility.from_settings().reactive_pairs, frozenset({(2, 3)}))
            report = validate_chemistry(list(AnalyteRegistry.from_settings()))
        self.assertEqual(sorted(v.analyte for v in report.violations), [2, 3])

    @override_settings(CHEMLAB={**settings.CHEMLAB, 'ANALYTES': [{'id': 7, 'name': 'unprofiled'}]})
    def test_missing_profile_violates_quantifiable(self):
        report = validate_chemistry(list(AnalyteRegistry.from_settings()))
        self.assertEqual([v.criterion for v in report.for_analyte(7)], [QUANTIFIABLE])
        self.assertFalse(report.to_dict()['ok'])


class RenderingTests(SimpleTestCase):

    def test_image_size_and_tint(self):
        plate = PlateState(rows=2, cols=3)
        deck = Deck([plate])
        plate.dispense(WellAddress(0, 0), deck.draw_stock(1, 20.0))
        image = render_plate(plate)
        self.assertEqual(image.size, (3 * WELL_PX + 2, 2 * WELL_PX + 2))
        centre = image.getpixel((1 + WELL_PX // 2, 1 + WELL_PX // 2))
        self.assertGreater(centre[0], centre[2])
        self.assertEqual(image.getpixel((1 + WELL_PX + WELL_PX // 2, 1 + WELL_PX // 2)), (245, 245, 245))
