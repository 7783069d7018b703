"""
Solutions and analytes.

Masses are stored (mg) and concentrations derived from them, so a solution
that is split or topped up never accumulates rounding drift in its
concentrations. 1 mg/mL = 1 mg per 1000 µL.
"""

import copy
from dataclasses import dataclass, field

from django.conf import settings

from .exceptions import EmptySolution, UnknownAnalyte

# relative slack when comparing volumes that went through float arithmetic
VOLUME_RTOL = 1e-12
VOLUME_ATOL = 1e-12


@dataclass(frozen=True)
class Analyte:
    id: int
    name: str
    stock_concentration: float = 62.5
    # chemistry flags checked by encoding.chemistry.validate_chemistry
    miscible: bool = True
    inert: bool = True
    quantifiable: bool = True

    def __post_init__(self):
        if not isinstance(self.id, int) or self.id < 1:
            raise ValueError(f"invalid analyte id {self.id!r}")
        if self.stock_concentration <= 0:
            raise ValueError(f"stock concentration must be positive for analyte {self.id}")

    def __str__(self):
        return f"{self.name} (analyte {self.id}, {self.stock_concentration:g} mg/mL stock)"


class AnalyteRegistry:
    """Analytes available to encode datasets, keyed by id"""

    def __init__(self, analytes=()):
        self._analytes = {}
        for analyte in analytes:
            self.register(analyte)

    def register(self, analyte):
        if analyte.id in self._analytes:
            raise ValueError(f"analyte id {analyte.id} is already registered")
        self._analytes[analyte.id] = analyte
        return analyte

    def __getitem__(self, analyte_id):
        try:
            return self._analytes[analyte_id]
        except KeyError:
            raise UnknownAnalyte(f"analyte {analyte_id} is not registered", analyte=analyte_id) from None

    def __contains__(self, analyte_id):
        return analyte_id in self._analytes

    def __iter__(self):
        return iter(sorted(self._analytes.values(), key=lambda a: a.id))

    def __len__(self):
        return len(self._analytes)

    @property
    def ids(self):
        return sorted(self._analytes)

    @classmethod
    def from_settings(cls):
        analytes = []
        for entry in settings.CHEMLAB['ANALYTES']:
            analytes.append(Analyte(
                id=int(entry['id']),
                name=entry['name'],
                stock_concentration=float(entry.get('stock_mg_ml', 62.5)),
                miscible=entry.get('miscible', True),
                inert=entry.get('inert', True),
                quantifiable=entry.get('quantifiable', True),
            ))
        return cls(analytes)


@dataclass
class SolutionState:
    volume: float = 0.0
    masses: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.volume < 0:
            raise ValueError(f"negative volume {self.volume}")
        for analyte_id, mass in self.masses.items():
            if mass < 0:
                raise ValueError(f"negative mass {mass} for analyte {analyte_id}")
        if self.volume == 0 and any(self.masses.values()):
            raise ValueError("an empty solution cannot carry dissolved mass")

    @classmethod
    def solvent(cls, volume):
        return cls(volume=float(volume))

    @classmethod
    def of(cls, volume, concentrations):
        """Build a solution from mg/mL concentrations"""
        volume = float(volume)
        return cls(volume=volume, masses={
            analyte_id: conc * volume / 1000.0 for analyte_id, conc in concentrations.items() if conc
        })

    @property
    def is_empty(self):
        return self.volume == 0

    def mass(self, analyte_id):
        return self.masses.get(analyte_id, 0.0)

    def concentration(self, analyte_id):
        return concentration_of(self, analyte_id)

    def concentrations(self):
        if self.volume <= 0:
            raise EmptySolution("solution has no volume")
        return {analyte_id: mass * 1000.0 / self.volume for analyte_id, mass in sorted(self.masses.items())}

    def take(self, volume):
        """Remove ``volume`` µL and return it as a new solution (perfect mixing)"""
        if volume <= 0:
            return SolutionState()
        if volume >= self.volume * (1 - VOLUME_RTOL) - VOLUME_ATOL:
            # exhaustion: hand over everything so no residue of rounding stays behind
            aliquot = SolutionState(volume=self.volume, masses=dict(self.masses))
            self.volume = 0.0
            self.masses = {}
            return aliquot
        fraction = volume / self.volume
        moved = {analyte_id: mass * fraction for analyte_id, mass in self.masses.items()}
        for analyte_id, mass in moved.items():
            self.masses[analyte_id] = max(self.masses[analyte_id] - mass, 0.0)
        self.volume -= volume
        return SolutionState(volume=float(volume), masses=moved)

    def absorb(self, other):
        self.volume += other.volume
        for analyte_id, mass in other.masses.items():
            self.masses[analyte_id] = self.masses.get(analyte_id, 0.0) + mass

    def copy(self):
        return copy.deepcopy(self)

    def to_dict(self):
        return {
            'volume_ul': self.volume,
            'masses_mg': {str(analyte_id): mass for analyte_id, mass in sorted(self.masses.items())},
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            volume=float(data['volume_ul']),
            masses={int(analyte_id): float(mass) for analyte_id, mass in data.get('masses_mg', {}).items()},
        )


def concentration_of(sol, analyte_id):
    """Concentration of one analyte in mg/mL; 0 when the analyte is absent"""
    if sol.volume <= 0:
        raise EmptySolution("concentration of an empty solution is undefined", analyte=analyte_id)
    return sol.masses.get(analyte_id, 0.0) * 1000.0 / sol.volume
