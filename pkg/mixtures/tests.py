import json
import math

from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from .exceptions import AddressOutOfBounds, EmptySolution, InsufficientVolume, PlateMismatch, WellOverflow
from .plates import Deck, PlateState, WellAddress, aspirate, dispense
from .solutions import Analyte, AnalyteRegistry, SolutionState, concentration_of

A1 = WellAddress(0, 0)
A2 = WellAddress(0, 1)


def small_plate(**kwargs):
    return PlateState(rows=2, cols=3, capacity=kwargs.pop('capacity', 120.0), **kwargs)


class SolutionStateTests(SimpleTestCase):

    def test_concentration_from_mass_and_volume(self):
        self.assertAlmostEqual(concentration_of(SolutionState(20.0, {1: 0.4}), 1), 20.0)

    def test_absent_analyte_reads_zero(self):
        self.assertEqual(concentration_of(SolutionState(60.0, {1: 1.0}), 2), 0.0)

    def test_empty_solution_has_no_concentration(self):
        with self.assertRaises(EmptySolution):
            concentration_of(SolutionState(), 1)

    def test_invalid_states_rejected(self):
        with self.assertRaises(ValueError):
            SolutionState(-1.0)
        with self.assertRaises(ValueError):
            SolutionState(0.0, {1: 0.5})
        with self.assertRaises(ValueError):
            SolutionState(5.0, {1: -0.1})

    def test_serial_dilution_chain(self):
        plate = small_plate()
        plate.dispense(A1, SolutionState.of(20.0, {1: 6.0}))
        for _ in range(10):
            plate.dispense(A2, plate.aspirate(A1, 10.0))
            plate.dispense(A2, SolutionState.solvent(10.0))
            plate.discard(A1, plate.well(A1).volume)
            plate.dispense(A1, plate.aspirate(A2, 20.0))
        self.assertAlmostEqual(plate.well(A1).concentration(1), 6.0 / 2 ** 10, places=12)
        self.assertAlmostEqual(plate.well(A1).concentration(1), 0.00586, places=5)


class AnalyteRegistryTests(SimpleTestCase):

    def test_defaults_are_the_three_phenols(self):
        registry = AnalyteRegistry.from_settings()
        self.assertEqual(registry.ids, [1, 2, 3])
        self.assertTrue(all(a.stock_concentration == 62.5 for a in registry))

    def test_duplicate_ids_rejected(self):
        with self.assertRaises(ValueError):
            AnalyteRegistry([Analyte(1, 'a'), Analyte(1, 'b')])

    def test_stock_must_be_positive(self):
        with self.assertRaises(ValueError):
            Analyte(4, 'nothing', stock_concentration=0)


class AspirateDispenseTests(SimpleTestCase):

    def setUp(self):
        self.plate = small_plate()
        self.plate.wells[A1] = SolutionState(60.0, {1: 1.25})

    def test_aspirate_is_proportional(self):
        aliquot = aspirate(self.plate, A1, 6.0)
        self.assertAlmostEqual(aliquot.volume, 6.0)
        self.assertAlmostEqual(aliquot.mass(1), 0.125)
        self.assertAlmostEqual(self.plate.well(A1).volume, 54.0)
        self.assertAlmostEqual(self.plate.well(A1).mass(1), 1.125)
        self.assertAlmostEqual(aliquot.concentration(1), self.plate.well(A1).concentration(1))

    def test_aspirate_nothing(self):
        aliquot = aspirate(self.plate, A1, 0.0)
        self.assertTrue(aliquot.is_empty)
        self.assertEqual(self.plate.well(A1), SolutionState(60.0, {1: 1.25}))

    def test_aspirate_everything(self):
        self.plate.wells[A1] = SolutionState(20.0, {1: 0.7})
        aliquot = aspirate(self.plate, A1, 20.0)
        self.assertEqual(aliquot.mass(1), 0.7)
        self.assertEqual(self.plate.well(A1), SolutionState())

    def test_overdraw_raises(self):
        with self.assertRaises(InsufficientVolume) as ctx:
            aspirate(self.plate, A1, 60.5)
        self.assertEqual(ctx.exception.detail['well'], 'A1')

    def test_out_of_bounds(self):
        with self.assertRaises(AddressOutOfBounds):
            self.plate.well(WellAddress(2, 0))

    def test_two_to_one_dilution(self):
        self.plate.wells[A2] = SolutionState.of(10.0, {1: 2.0})
        dispense(self.plate, A2, SolutionState.solvent(10.0))
        self.assertAlmostEqual(self.plate.well(A2).volume, 20.0)
        self.assertAlmostEqual(self.plate.well(A2).concentration(1), 1.0)

    def test_dispense_empty_aliquot(self):
        before = self.plate.well(A1).copy()
        dispense(self.plate, A1, SolutionState())
        self.assertEqual(self.plate.well(A1), before)

    def test_overflow(self):
        with self.assertRaises(WellOverflow):
            dispense(self.plate, A1, SolutionState.solvent(60.5))

    def test_pooling_matches_mixing_rule(self):
        sources = [(3.0, 20.0), (1.5, 10.0), (6.25, 4.0), (0.5, 0.0)]
        plate = PlateState(rows=1, cols=5, capacity=200.0)
        for col, (_, conc) in enumerate(sources):
            plate.wells[WellAddress(0, col)] = SolutionState.of(60.0, {2: conc})
        dest = WellAddress(0, 4)
        for col, (volume, _) in enumerate(sources):
            plate.dispense(dest, plate.aspirate(WellAddress(0, col), volume))
        v_f = sum(v for v, _ in sources)
        expected = sum(v / v_f * c for v, c in sources)
        ledger = sum(v * c / 1000.0 for v, c in sources) * 1000.0 / v_f
        self.assertAlmostEqual(plate.well(dest).concentration(2), expected, places=12)
        self.assertAlmostEqual(expected, ledger, places=12)


class PlateSnapshotTests(SimpleTestCase):

    def test_json_round_trip_is_lossless(self):
        plate = small_plate(name='data')
        plate.wells[A1] = SolutionState(60.0, {1: 1.0 / 3.0, 3: 0.1 + 0.2})
        plate.wells[A2] = SolutionState(7.123456789012345, {2: math.pi / 100})
        plate.discard(A2, 1.1)
        clone = PlateState.from_json(plate.to_json())
        self.assertEqual(clone.dims, plate.dims)
        self.assertEqual(clone.wells, plate.wells)
        self.assertEqual(clone.waste, plate.waste)

    def test_snapshot_layout(self):
        plate = small_plate()
        plate.wells[A2] = SolutionState(5.0, {1: 0.5})
        data = plate.to_dict()
        self.assertEqual(data['dims'], [2, 3])
        self.assertEqual(data['wells'], [{'row': 0, 'col': 1, 'volume_ul': 5.0, 'masses_mg': {'1': 0.5}}])

    def test_labels(self):
        self.assertEqual(WellAddress(15, 23).label, 'P24')
        self.assertEqual(WellAddress.parse('b3'), WellAddress(1, 2))


class DeckTests(SimpleTestCase):

    def test_standard_deck(self):
        deck = Deck.standard()
        self.assertEqual(deck.plate('data').dims, (16, 24))
        self.assertEqual(deck.plate('pools').capacity, 2000.0)
        with self.assertRaises(PlateMismatch):
            deck.plate('missing')

    def test_stock_draw_is_ledgered(self):
        deck = Deck.standard()
        aliquot = deck.draw_stock(1, 20.0)
        self.assertAlmostEqual(aliquot.concentration(1), 62.5)
        deck.plate('data').dispense(A1, aliquot)
        deck.plate('data').dispense(A1, deck.draw_solvent(40.0))
        self.assertAlmostEqual(deck.plate('data').well(A1).concentration(1), 62.5 * 20 / 60)
        self.assertAlmostEqual(deck.total_mass(1), deck.supplied.mass(1))
        self.assertAlmostEqual(deck.total_volume(), deck.supplied.volume)

    def test_json_round_trip(self):
        deck = Deck.standard()
        deck.plate('data').dispense(A1, deck.draw_stock(2, 20.0))
        deck.plate('pools').dispense(A2, deck.draw_solvent(100.0))
        clone = Deck.from_dict(json.loads(json.dumps(deck.to_dict())))
        self.assertEqual(sorted(clone.plates), ['data', 'pools'])
        self.assertEqual(clone.plate('data').wells, deck.plate('data').wells)
        self.assertEqual(clone.supplied, deck.supplied)


transfer = st.tuples(
    st.integers(min_value=0, max_value=5),
    st.integers(min_value=0, max_value=5),
    st.floats(min_value=0.0, max_value=1.0),
    st.booleans(),
)
masses = st.lists(st.floats(min_value=0.0, max_value=2.0), min_size=6, max_size=6)


def run_program(plate, program):
    addresses = plate.addresses()
    for src, dst, fraction, to_waste in program:
        source = addresses[src]
        volume = fraction * plate.well(source).volume
        if to_waste:
            plate.discard(source, volume)
            continue
        room = max(plate.capacity - plate.well(addresses[dst]).volume, 0.0)
        plate.dispense(addresses[dst], plate.aspirate(source, min(volume, room)))
    return plate


def seeded_plate(mass_values, analyte_id=1):
    plate = PlateState(rows=2, cols=3, capacity=120.0)
    for address, mass in zip(plate.addresses(), mass_values):
        plate.wells[address] = SolutionState(30.0, {analyte_id: mass} if mass else {})
    return plate


class ConservationPropertyTests(SimpleTestCase):

    @hypothesis_settings(max_examples=200, deadline=None)
    @given(mass_values=masses, program=st.lists(transfer, max_size=40))
    def test_mass_and_volume_conserved(self, mass_values, program):
        plate = seeded_plate(mass_values)
        mass_before, volume_before = plate.total_mass(1), plate.total_volume()
        run_program(plate, program)
        self.assertLessEqual(abs(plate.total_mass(1) - mass_before), 1e-12 * max(mass_before, 1e-300))
        self.assertAlmostEqual(plate.total_volume(), volume_before, delta=1e-12 * volume_before)
        for well in plate.wells.values():
            self.assertGreaterEqual(well.volume, 0.0)
            self.assertTrue(all(m >= 0 for m in well.masses.values()))

    @hypothesis_settings(max_examples=100, deadline=None)
    @given(a=masses, b=masses, program=st.lists(transfer, max_size=30))
    def test_linear_superposition(self, a, b, program):
        plate_a = seeded_plate(a)
        plate_b = seeded_plate(b)
        combined = plate_a.superpose(plate_b)
        # a well can be drained to a sliver, so the bound is taken on the plate total
        scale = max(combined.total_mass(1), 1e-300)
        run_program(plate_a, program)
        run_program(plate_b, program)
        run_program(combined, program)
        for address in combined.addresses():
            expected = plate_a.well(address).mass(1) + plate_b.well(address).mass(1)
            self.assertAlmostEqual(combined.well(address).mass(1), expected, delta=1e-12 * scale)
