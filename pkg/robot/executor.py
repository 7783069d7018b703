"""
The liquid handler.

Executes an InstructionSequence on a copy of a plate or deck. Each transfer
delivers volume·(1 + bias + cv·g), g a standard normal draw from the run's
own generator, so a fixed seed replays the same run exactly.
"""

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd
from django.conf import settings

from mixtures.plates import Deck, PlateState
from protocols.compiler import check_budget
from protocols.instructions import Op

logger = logging.getLogger(__name__)

LOG_COLUMNS = ['index', 'op', 'src', 'dst', 'intended_ul', 'delivered_ul', 'tip_id', 'truncated']


@dataclass(frozen=True)
class NoiseModel:
    pipette_cv: float = 0.02
    pipette_bias: float = 0.0
    enabled: bool = True

    def __post_init__(self):
        if self.pipette_cv < 0:
            raise ValueError(f"pipette cv must be non-negative, got {self.pipette_cv}")

    @classmethod
    def from_settings(cls, enabled=None, **overrides):
        section = settings.CHEMLAB['NOISE']
        values = dict(
            pipette_cv=float(section['pipette_cv']),
            pipette_bias=float(section['pipette_bias']),
            enabled=section['enabled'] if enabled is None else enabled,
        )
        values.update(overrides)
        return cls(**values)

    @classmethod
    def off(cls):
        return cls(enabled=False)

    def delivered(self, volume, rng):
        if not self.enabled:
            return volume
        return max(volume * (1.0 + self.pipette_bias + self.pipette_cv * rng.standard_normal()), 0.0)


@dataclass(frozen=True)
class LogEntry:
    index: int
    op: str
    src: str
    dst: str
    intended_ul: float
    delivered_ul: float
    tip_id: int
    truncated: bool = False


@dataclass
class ExecutionLog:
    entries: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def n_tips(self):
        return max((entry.tip_id for entry in self.entries), default=0)

    @property
    def n_truncated(self):
        return sum(1 for entry in self.entries if entry.truncated)

    @property
    def total_intended(self):
        return sum(entry.intended_ul for entry in self.entries)

    @property
    def total_delivered(self):
        return sum(entry.delivered_ul for entry in self.entries)

    def extend(self, other):
        offset_index = len(self.entries)
        offset_tip = self.n_tips
        for entry in other:
            self.entries.append(LogEntry(**{
                **asdict(entry),
                'index': entry.index + offset_index,
                'tip_id': entry.tip_id + offset_tip,
            }))
        return self

    def to_frame(self):
        return pd.DataFrame([asdict(entry) for entry in self.entries], columns=LOG_COLUMNS)

    def to_csv(self, path, float_format='%.6f'):
        self.to_frame().to_csv(path, index=False, float_format=float_format, lineterminator='\n')


def execute(seq, target, noise=None, seed=None, check=True):
    """Run ``seq`` on a copy of ``target`` (a Deck or a PlateState).

    Returns the new target and the execution log. The intended volumes are
    budget-checked first; a noisy draw that exceeds what is left in the
    source well is truncated to the available volume and logged.
    """
    noise = noise if noise is not None else NoiseModel.from_settings()
    if check:
        check_budget(seq, target)
    if isinstance(target, PlateState):
        deck = Deck([target.copy()])
    else:
        deck = target.copy()
    rng = np.random.default_rng(seed)
    log = ExecutionLog()
    tip_id = 0
    for index, instruction in enumerate(seq):
        if instruction.new_tip or tip_id == 0:
            tip_id += 1
        delivered = noise.delivered(instruction.volume, rng)
        truncated = False
        if instruction.op == Op.TRANSFER_FROM_WELL:
            source = deck.plate(instruction.src.plate)
            available = source.well(instruction.src.address).volume
            if delivered > available:
                logger.warning(
                    "instruction %d: %.3f uL requested from %s, only %.3f uL left; draw truncated",
                    index, delivered, instruction.src, available,
                )
                delivered = available
                truncated = True
            aliquot = source.aspirate(instruction.src.address, delivered)
        elif instruction.op == Op.TRANSFER_STOCK:
            aliquot = deck.draw_stock(instruction.src.analyte, delivered)
        else:
            aliquot = deck.draw_solvent(delivered)
        deck.plate(instruction.dst.plate).dispense(instruction.dst.address, aliquot)
        log.entries.append(LogEntry(
            index=index,
            op=instruction.op.value,
            src=instruction.src.label,
            dst=instruction.dst.label,
            intended_ul=instruction.volume,
            delivered_ul=delivered,
            tip_id=tip_id,
            truncated=truncated,
        ))
        logger.debug("%d %s %s -> %s %.3f uL", index, instruction.op.value, instruction.src, instruction.dst, delivered)
    if isinstance(target, PlateState):
        return deck.plate(target.name), log
    return deck, log
