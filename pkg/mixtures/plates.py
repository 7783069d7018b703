"""
Well plates: the chemical memory of the simulator.

A PlateState is a grid of SolutionState wells plus a waste reservoir, so that
every microliter that leaves a well is accounted for somewhere. A Deck groups
the plates the robot works on together with the stock and solvent reservoirs.
"""

import json
import logging
import string
from dataclasses import dataclass

from django.conf import settings

from .exceptions import AddressOutOfBounds, InsufficientVolume, PlateMismatch, WellOverflow
from .solutions import VOLUME_ATOL, VOLUME_RTOL, AnalyteRegistry, SolutionState

logger = logging.getLogger(__name__)

ROW_LETTERS = string.ascii_uppercase


@dataclass(frozen=True, order=True)
class WellAddress:
    row: int
    col: int

    @property
    def label(self):
        """Plate-map label, A1 is (0, 0)"""
        return f"{ROW_LETTERS[self.row]}{self.col + 1}"

    @classmethod
    def parse(cls, label):
        label = label.strip().upper()
        if len(label) < 2 or label[0] not in ROW_LETTERS or not label[1:].isdigit():
            raise ValueError(f"bad well label {label!r}")
        return cls(ROW_LETTERS.index(label[0]), int(label[1:]) - 1)

    def __str__(self):
        return self.label


class PlateState:
    def __init__(self, rows=16, cols=24, capacity=120.0, name='data'):
        if rows < 1 or cols < 1 or rows > len(ROW_LETTERS):
            raise ValueError(f"unsupported plate geometry {rows}x{cols}")
        self.name = name
        self.rows = rows
        self.cols = cols
        self.capacity = float(capacity)
        self.wells = {address: SolutionState() for address in self.addresses()}
        self.waste = SolutionState()

    @classmethod
    def from_settings(cls, section='PLATE', name='data'):
        geometry = settings.CHEMLAB[section]
        return cls(geometry['rows'], geometry['cols'], geometry['capacity_ul'], name=name)

    def __repr__(self):
        return f"<PlateState {self.name} {self.rows}x{self.cols}>"

    @property
    def dims(self):
        return (self.rows, self.cols)

    def addresses(self):
        """All wells in row-major order"""
        return [WellAddress(r, c) for r in range(self.rows) for c in range(self.cols)]

    def contains(self, address):
        return 0 <= address.row < self.rows and 0 <= address.col < self.cols

    def well(self, address):
        if not self.contains(address):
            raise AddressOutOfBounds(
                f"{address} is outside the {self.rows}x{self.cols} plate {self.name}",
                plate=self.name, row=address.row, col=address.col,
            )
        return self.wells[address]

    def aspirate(self, address, volume):
        """Draw ``volume`` µL from a well; the aliquot has the well's concentrations"""
        if volume < 0:
            raise ValueError(f"cannot aspirate a negative volume ({volume})")
        well = self.well(address)
        if volume > well.volume * (1 + VOLUME_RTOL) + VOLUME_ATOL:
            raise InsufficientVolume(
                f"{self.name}/{address} holds {well.volume:.3f} uL, {volume:.3f} uL requested",
                plate=self.name, well=address.label, available=well.volume, requested=volume,
            )
        return well.take(volume)

    def dispense(self, address, aliquot):
        well = self.well(address)
        if well.volume + aliquot.volume > self.capacity * (1 + VOLUME_RTOL) + VOLUME_ATOL:
            raise WellOverflow(
                f"{self.name}/{address} would hold {well.volume + aliquot.volume:.3f} uL "
                f"(capacity {self.capacity:g} uL)",
                plate=self.name, well=address.label, capacity=self.capacity,
            )
        well.absorb(aliquot)

    def discard(self, address, volume):
        """Move liquid from a well to the waste; returns a copy of what was removed"""
        aliquot = self.aspirate(address, volume)
        removed = aliquot.copy()
        self.waste.absorb(aliquot)
        return removed

    def total_mass(self, analyte_id):
        return sum(well.mass(analyte_id) for well in self.wells.values()) + self.waste.mass(analyte_id)

    def total_volume(self):
        return sum(well.volume for well in self.wells.values()) + self.waste.volume

    def analyte_ids(self):
        ids = set(self.waste.masses)
        for well in self.wells.values():
            ids.update(well.masses)
        return sorted(ids)

    def filled(self):
        return [(address, well) for address, well in self.wells.items() if well.volume > 0]

    def copy(self):
        clone = PlateState(self.rows, self.cols, self.capacity, name=self.name)
        clone.wells = {address: well.copy() for address, well in self.wells.items()}
        clone.waste = self.waste.copy()
        return clone

    def superpose(self, other):
        """Per-well mass sum of two plates holding the same volumes"""
        if self.dims != other.dims:
            raise PlateMismatch(f"cannot superpose {self.dims} and {other.dims} plates")
        combined = self.copy()
        for address, well in other.wells.items():
            target = combined.wells[address]
            if abs(target.volume - well.volume) > VOLUME_ATOL + VOLUME_RTOL * well.volume:
                raise PlateMismatch(f"volumes differ at {address}", well=address.label)
            for analyte_id, mass in well.masses.items():
                target.masses[analyte_id] = target.masses.get(analyte_id, 0.0) + mass
        for analyte_id, mass in other.waste.masses.items():
            combined.waste.masses[analyte_id] = combined.waste.masses.get(analyte_id, 0.0) + mass
        return combined

    def to_dict(self):
        wells = []
        for address, well in self.filled():
            entry = {'row': address.row, 'col': address.col}
            entry.update(well.to_dict())
            wells.append(entry)
        return {
            'name': self.name,
            'dims': [self.rows, self.cols],
            'capacity_ul': self.capacity,
            'wells': wells,
            'waste': self.waste.to_dict(),
        }

    def to_json(self, indent=None):
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data):
        rows, cols = data['dims']
        plate = cls(rows, cols, data.get('capacity_ul', 120.0), name=data.get('name', 'data'))
        for entry in data['wells']:
            address = WellAddress(int(entry['row']), int(entry['col']))
            plate.well(address)
            plate.wells[address] = SolutionState.from_dict(entry)
        if 'waste' in data:
            plate.waste = SolutionState.from_dict(data['waste'])
        return plate

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def aspirate(plate, address, volume):
    return plate.aspirate(address, volume)


def dispense(plate, address, aliquot):
    plate.dispense(address, aliquot)


class Deck:
    """The plates in reach of the robot plus its stock and solvent reservoirs.

    ``supplied`` is a ledger of everything drawn from the reservoirs, so that
    wells + waste == initial contents + supplied holds for every analyte.
    """

    def __init__(self, plates, registry=None):
        self.plates = {plate.name: plate for plate in plates}
        self.registry = registry if registry is not None else AnalyteRegistry.from_settings()
        self.supplied = SolutionState()

    @classmethod
    def standard(cls, registry=None):
        return cls(
            [PlateState.from_settings('PLATE', 'data'), PlateState.from_settings('POOL_PLATE', 'pools')],
            registry=registry,
        )

    def __contains__(self, name):
        return name in self.plates

    def plate(self, name):
        try:
            return self.plates[name]
        except KeyError:
            raise PlateMismatch(f"no plate named {name!r} on the deck", plate=name) from None

    def draw_stock(self, analyte_id, volume):
        analyte = self.registry[analyte_id]
        aliquot = SolutionState.of(volume, {analyte_id: analyte.stock_concentration})
        self.supplied.absorb(aliquot)
        return aliquot.copy()

    def draw_solvent(self, volume):
        aliquot = SolutionState.solvent(volume)
        self.supplied.absorb(aliquot)
        return aliquot.copy()

    def total_mass(self, analyte_id):
        return sum(plate.total_mass(analyte_id) for plate in self.plates.values())

    def total_volume(self):
        return sum(plate.total_volume() for plate in self.plates.values())

    def copy(self):
        clone = Deck([plate.copy() for plate in self.plates.values()], registry=self.registry)
        clone.supplied = self.supplied.copy()
        return clone

    def to_dict(self):
        return {
            'plates': [plate.to_dict() for plate in self.plates.values()],
            'supplied': self.supplied.to_dict(),
        }

    @classmethod
    def from_dict(cls, data, registry=None):
        deck = cls([PlateState.from_dict(entry) for entry in data['plates']], registry=registry)
        if 'supplied' in data:
            deck.supplied = SolutionState.from_dict(data['supplied'])
        return deck

    def write(self, path):
        with open(path, 'w', encoding='utf-8') as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write('\n')

    @classmethod
    def read(cls, path, registry=None):
        with open(path, encoding='utf-8') as fh:
            return cls.from_dict(json.load(fh), registry=registry)
