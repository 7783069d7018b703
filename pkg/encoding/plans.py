"""
Bit-to-well layout and the write phase.

Bits are laid out row-major inside a near-square block in the top left corner
of the data plate, so 256 bits on a 16x24 plate occupy rows 0-15 and columns
0-15 and a 16x16 image keeps its shape on the plate.
"""

import logging
import math
from dataclasses import dataclass, replace

from django.conf import settings

from mixtures.plates import WellAddress
from protocols.instructions import Instruction, InstructionSequence, Location, Op, assign_tips

from .datasets import check_batch
from .exceptions import DatasetMismatch, PlateTooSmall

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EncodingSettings:
    write_volume_ul: float = 20.0
    solvent: str = 'DMSO'

    @classmethod
    def from_settings(cls):
        section = settings.CHEMLAB['ENCODING']
        return cls(float(section['write_volume_ul']), section.get('solvent', 'DMSO'))


@dataclass(frozen=True)
class EncodingPlan:
    wells: tuple
    plate_dims: tuple
    write_volume: float = 20.0
    solvent: str = 'DMSO'
    plate: str = 'data'
    bias_well: WellAddress | None = None

    def __post_init__(self):
        rows, cols = self.plate_dims
        used = list(self.wells) + ([self.bias_well] if self.bias_well is not None else [])
        if len(set(used)) != len(used):
            raise ValueError("encoding plan maps two bits to one well")
        for address in used:
            if not (0 <= address.row < rows and 0 <= address.col < cols):
                raise PlateTooSmall(f"{address} is outside the {rows}x{cols} plate", well=address.label)
        if self.write_volume <= 0:
            raise ValueError("write volume must be positive")

    @property
    def n_bits(self):
        return len(self.wells)

    def address(self, index):
        return self.wells[index]

    def block_width(self):
        return max((a.col for a in self.wells), default=-1) + 1

    def to_dict(self):
        return {
            'plate': self.plate,
            'plate_dims': list(self.plate_dims),
            'write_volume_ul': self.write_volume,
            'solvent': self.solvent,
            'wells': [a.label for a in self.wells],
            'bias_well': self.bias_well.label if self.bias_well is not None else None,
        }

    @classmethod
    def from_dict(cls, data):
        bias = data.get('bias_well')
        return cls(
            wells=tuple(WellAddress.parse(label) for label in data['wells']),
            plate_dims=tuple(data['plate_dims']),
            write_volume=float(data.get('write_volume_ul', 20.0)),
            solvent=data.get('solvent', 'DMSO'),
            plate=data.get('plate', 'data'),
            bias_well=WellAddress.parse(bias) if bias else None,
        )


def layout(n_bits, plate_dims=None, write_volume=None, bias=False):
    """Assign bit i to a well, row-major within a near-square block"""
    if plate_dims is None:
        plate_dims = (settings.CHEMLAB['PLATE']['rows'], settings.CHEMLAB['PLATE']['cols'])
    rows, cols = plate_dims
    if n_bits < 1:
        raise ValueError("nothing to lay out")
    if n_bits > rows * cols:
        raise PlateTooSmall(
            f"{n_bits} bits do not fit a {rows}x{cols} plate", n_bits=n_bits, wells=rows * cols,
        )
    width = min(max(math.isqrt(n_bits - 1) + 1, -(-n_bits // rows)), cols)
    wells = tuple(WellAddress(i // width, i % width) for i in range(n_bits))
    encoding = EncodingSettings.from_settings()
    plan = EncodingPlan(
        wells=wells,
        plate_dims=(rows, cols),
        write_volume=float(write_volume if write_volume is not None else encoding.write_volume_ul),
        solvent=encoding.solvent,
    )
    return reserve_bias_well(plan) if bias else plan


def reserve_bias_well(plan):
    """Add the constant-1 well: the first free well in row-major order"""
    if plan.bias_well is not None:
        return plan
    rows, cols = plan.plate_dims
    taken = set(plan.wells)
    for index in range(rows * cols):
        address = WellAddress(index // cols, index % cols)
        if address not in taken:
            return replace(plan, bias_well=address)
    raise PlateTooSmall(f"no free well for the bias input on a {rows}x{cols} plate")


def written_concentration(stock_concentration, n_datasets):
    """Concentration of a '1' bit once all M equal-volume writes are in the well"""
    return stock_concentration / n_datasets


def emit_write_instructions(datasets, plan, registry=None, tip_policy=None):
    """Stock for each 1 bit, solvent for each 0 bit, one dataset after the other.

    Every well receives exactly one write per dataset, so all wells finish at
    M times the write volume whatever the bits are.
    """
    datasets = check_batch(datasets, registry)
    if datasets[0].n_bits != plan.n_bits:
        raise DatasetMismatch(
            f"datasets hold {datasets[0].n_bits} bits, the plan {plan.n_bits}",
            dataset_bits=datasets[0].n_bits, plan_bits=plan.n_bits,
        )
    instructions = []
    for dataset in datasets:
        ones = [plan.wells[i] for i, bit in enumerate(dataset.bits) if bit]
        zeros = [plan.wells[i] for i, bit in enumerate(dataset.bits) if not bit]
        if plan.bias_well is not None:
            ones.append(plan.bias_well)
        stock = Location.stock(dataset.analyte)
        for address in ones:
            instructions.append(Instruction(
                Op.TRANSFER_STOCK, stock, Location.well(plan.plate, address), plan.write_volume,
            ))
        for address in zeros:
            instructions.append(Instruction(
                Op.TRANSFER_SOLVENT, Location.solvent(), Location.well(plan.plate, address), plan.write_volume,
            ))
    policy = tip_policy or settings.CHEMLAB['COMPILER']['tip_policy']
    sequence = InstructionSequence(
        assign_tips(instructions, policy),
        metadata={
            'phase': 'write',
            'analytes': [d.analyte for d in datasets],
            'n_bits': plan.n_bits,
            'write_volume_ul': plan.write_volume,
            'tip_policy': policy,
        },
    )
    logger.debug("write phase: %d datasets x %d bits -> %d transfers", len(datasets), plan.n_bits, len(sequence))
    return sequence


def read_bits(plate, plan, analyte_ids, registry):
    """Decode each analyte's bits back from well concentrations.

    The threshold sits halfway between an empty bit and a written bit.
    """
    decoded = {}
    n_datasets = len(analyte_ids)
    for analyte_id in analyte_ids:
        cutoff = written_concentration(registry[analyte_id].stock_concentration, n_datasets) / 2
        decoded[analyte_id] = tuple(
            int(plate.well(address).concentration(analyte_id) > cutoff) for address in plan.wells
        )
    return decoded
