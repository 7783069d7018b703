"""
Volumetric transfer instructions and their JSON-lines wire format.

A compiled program is an ordered list of transfers. Sources are a plate well,
an analyte stock reservoir or the solvent reservoir; destinations are always
plate wells. Locations print as ``data/A1``, ``stock/2`` and ``solvent``.
"""

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from django.db import models

from chemlab.exceptions import ConfigError
from mixtures.plates import WellAddress

from .exceptions import MalformedInstruction

TIP_POLICIES = ('per-source', 'per-destination', 'always')


class Op(models.TextChoices):
    TRANSFER_FROM_WELL = 'transfer_from_well', 'Transfer from well'
    TRANSFER_STOCK = 'transfer_stock', 'Transfer stock'
    TRANSFER_SOLVENT = 'transfer_solvent', 'Transfer solvent'


@dataclass(frozen=True)
class Location:
    kind: str
    plate: str = ''
    address: WellAddress | None = None
    analyte: int | None = None

    @classmethod
    def well(cls, plate, address):
        return cls('well', plate=plate, address=address)

    @classmethod
    def stock(cls, analyte_id):
        return cls('stock', analyte=int(analyte_id))

    @classmethod
    def solvent(cls):
        return cls('solvent')

    @property
    def is_well(self):
        return self.kind == 'well'

    @property
    def label(self):
        if self.kind == 'well':
            return f"{self.plate}/{self.address.label}"
        if self.kind == 'stock':
            return f"stock/{self.analyte}"
        return 'solvent'

    @classmethod
    def parse(cls, label):
        if label == 'solvent':
            return cls.solvent()
        head, sep, tail = label.partition('/')
        if not sep or not tail:
            raise MalformedInstruction(f"unreadable location {label!r}", location=label)
        try:
            if head == 'stock':
                return cls.stock(int(tail))
            return cls.well(head, WellAddress.parse(tail))
        except ValueError:
            raise MalformedInstruction(f"unreadable location {label!r}", location=label) from None

    def __str__(self):
        return self.label


SOURCE_KINDS = {
    Op.TRANSFER_FROM_WELL: 'well',
    Op.TRANSFER_STOCK: 'stock',
    Op.TRANSFER_SOLVENT: 'solvent',
}


@dataclass(frozen=True)
class Instruction:
    op: Op
    src: Location
    dst: Location
    volume: float
    new_tip: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, 'op', Op(self.op))
        except ValueError:
            raise MalformedInstruction(f"unknown op {self.op!r}", op=self.op) from None
        if not math.isfinite(self.volume) or self.volume < 0:
            raise MalformedInstruction(f"invalid volume {self.volume!r}", volume=self.volume)
        if self.src.kind != SOURCE_KINDS[self.op]:
            raise MalformedInstruction(f"{self.op.value} cannot draw from {self.src}", op=self.op.value)
        if not self.dst.is_well:
            raise MalformedInstruction(f"destination {self.dst} is not a well", dst=self.dst.label)

    def to_jsonl(self):
        """One line, fixed key order, volume with three decimals"""
        return (
            f'{{"op": {json.dumps(self.op.value)}, "src": {json.dumps(self.src.label)}, '
            f'"dst": {json.dumps(self.dst.label)}, "vol_ul": {self.volume:.3f}, '
            f'"new_tip": {"true" if self.new_tip else "false"}}}'
        )

    @classmethod
    def from_jsonl(cls, line):
        try:
            data = json.loads(line)
            return cls(
                op=data['op'],
                src=Location.parse(data['src']),
                dst=Location.parse(data['dst']),
                volume=float(data['vol_ul']),
                new_tip=bool(data.get('new_tip', False)),
            )
        except MalformedInstruction:
            raise
        except (ValueError, KeyError, TypeError) as err:
            raise MalformedInstruction(f"bad instruction line: {err}", line=line) from None


def assign_tips(instructions, policy='per-source'):
    """Return the instructions with ``new_tip`` set according to the tip policy.

    per-source: a fresh tip whenever the source changes.
    per-destination: a fresh tip whenever the destination changes.
    always: a fresh tip for every transfer.
    """
    if policy not in TIP_POLICIES:
        raise ConfigError(f"unknown tip policy {policy!r}", policy=policy)
    result = []
    previous = None
    for instruction in instructions:
        if policy == 'always' or previous is None:
            fresh = True
        elif policy == 'per-source':
            fresh = instruction.src != previous.src
        else:
            fresh = instruction.dst != previous.dst
        result.append(replace(instruction, new_tip=fresh))
        previous = instruction
    return result


@dataclass
class InstructionSequence:
    instructions: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def __getitem__(self, index):
        return self.instructions[index]

    def __add__(self, other):
        metadata = {**self.metadata, **other.metadata}
        return InstructionSequence(list(self.instructions) + list(other.instructions), metadata)

    @property
    def n_tips(self):
        return sum(1 for instruction in self.instructions if instruction.new_tip)

    def count(self, op):
        return sum(1 for instruction in self.instructions if instruction.op == op)

    def with_tips(self, policy):
        return InstructionSequence(assign_tips(self.instructions, policy), dict(self.metadata, tip_policy=policy))

    def to_jsonl(self):
        return ''.join(instruction.to_jsonl() + '\n' for instruction in self.instructions)

    @classmethod
    def from_jsonl(cls, text):
        instructions = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                instructions.append(Instruction.from_jsonl(line))
            except MalformedInstruction as err:
                err.detail['line'] = lineno
                raise
        return cls(instructions)

    def write(self, path):
        Path(path).write_text(self.to_jsonl(), encoding='utf-8')

    @classmethod
    def read(cls, path):
        return cls.from_jsonl(Path(path).read_text(encoding='utf-8'))
