"""
Lowering a trained perceptron to pipetting.

Each weight becomes a draw of |w_i|·V_o from the data well holding bit i,
into the positive pool when w_i > 0 and the negative pool when w_i < 0. Both
pools are then topped up with solvent to the same volume V_p, so the
difference of their concentrations is proportional to w·x for every analyte
on the plate at once.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from decimal import ROUND_CEILING, ROUND_HALF_EVEN, Decimal

import numpy as np
from django.conf import settings

from chemlab.exceptions import ConfigError
from mixtures.exceptions import PlateMismatch
from mixtures.plates import PlateState, WellAddress
from mixtures.solutions import VOLUME_ATOL, VOLUME_RTOL, SolutionState
from perceptron.exceptions import LengthMismatch

from .exceptions import BudgetExceeded, InfeasiblePool, MissingBiasWell
from .instructions import TIP_POLICIES, Instruction, InstructionSequence, Location, Op, assign_tips

logger = logging.getLogger(__name__)

POSITIVE_POOL = WellAddress(0, 0)
NEGATIVE_POOL = WellAddress(0, 1)


@dataclass(frozen=True)
class CompileConfig:
    v_o: float = 6.25
    resolution: float = 0.05
    min_transfer: float = 0.5
    pool_volume: float | str = 'auto'
    pool_step: float = 5.0
    quantize: bool = True
    tip_policy: str = 'per-source'
    seconds_per_transfer: float = 45.0
    pool_plate: str = 'pools'

    def __post_init__(self):
        if self.v_o <= 0:
            raise ConfigError("V_o must be positive", v_o=self.v_o)
        if self.resolution <= 0:
            raise ConfigError("pipette resolution must be positive", resolution=self.resolution)
        if self.min_transfer < 0 or self.pool_step <= 0:
            raise ConfigError("minimum transfer and pool step must be non-negative and positive")
        if self.pool_volume != 'auto' and (not isinstance(self.pool_volume, (int, float)) or self.pool_volume <= 0):
            raise ConfigError(f"pool volume must be 'auto' or a positive volume, got {self.pool_volume!r}")
        if self.tip_policy not in TIP_POLICIES:
            raise ConfigError(f"unknown tip policy {self.tip_policy!r}", policy=self.tip_policy)

    @classmethod
    def from_settings(cls, **overrides):
        section = settings.CHEMLAB['COMPILER']
        pool_volume = section['pool_volume_ul']
        values = dict(
            v_o=float(section['v_o_ul']),
            resolution=float(section['pipette_resolution_ul']),
            min_transfer=float(section['min_transfer_ul']),
            pool_volume=pool_volume if pool_volume == 'auto' else float(pool_volume),
            pool_step=float(section['pool_step_ul']),
            quantize=bool(section['quantize']),
            tip_policy=section['tip_policy'],
            seconds_per_transfer=float(section['seconds_per_transfer']),
        )
        values.update(overrides)
        return cls(**values)


def _dec(value):
    if isinstance(value, Decimal):
        return value
    return Decimal(repr(float(value)))


def _snap(volume, cfg):
    if volume < 0:
        raise ValueError(f"cannot quantize a negative volume ({volume})")
    if not cfg.quantize:
        return float(volume)
    step = _dec(cfg.resolution)
    steps = (_dec(volume) / step).quantize(Decimal(1), rounding=ROUND_HALF_EVEN)
    snapped = float(steps * step)
    return 0.0 if snapped < cfg.min_transfer else snapped


def quantize(volume, cfg):
    """Round to the pipette's resolution grid, half to even; below the minimum transfer becomes 0"""
    snapped = _snap(volume, cfg)
    if volume > 0 and snapped == 0:
        logger.warning("dropped a %.4f uL draw below the %.2f uL minimum transfer", volume, cfg.min_transfer)
    return snapped


def realizable(classifier, cfg):
    """The classifier whose weights are exactly the volumes the robot will move, divided by V_o"""
    weights = np.array([math.copysign(_snap(abs(w) * cfg.v_o, cfg), w) / cfg.v_o for w in classifier.weights])
    bias = math.copysign(_snap(abs(classifier.bias) * cfg.v_o, cfg), classifier.bias) / cfg.v_o
    return replace(classifier, weights=weights + 0.0, bias=bias + 0.0)


def pool_volume(positive, negative, cfg):
    """V_p for pools holding ``positive`` and ``negative`` µL of draws"""
    need = max(_dec(positive), _dec(negative))
    step = _dec(cfg.pool_step)
    if cfg.pool_volume != 'auto':
        v_p = _dec(cfg.pool_volume)
        if v_p < need:
            raise InfeasiblePool(
                f"pool volume {cfg.pool_volume} uL is below the {float(need):.3f} uL of weighted draws",
                pool_volume=cfg.pool_volume, required=float(need),
            )
        return v_p
    v_p = max(step, (need / step).to_integral_value(rounding=ROUND_CEILING) * step)
    if cfg.quantize:
        minimum = _dec(cfg.min_transfer)
        # a top-up the robot cannot pipette is avoided by taking the next step
        while any(Decimal(0) < v_p - total < minimum for total in (_dec(positive), _dec(negative))):
            v_p += step
    return v_p


def compile_classifier(w, plan, cfg=None, pools=(POSITIVE_POOL, NEGATIVE_POOL)):
    """Lower classifier ``w`` against the bit layout ``plan`` into an InstructionSequence"""
    cfg = cfg or CompileConfig.from_settings()
    if len(w) != plan.n_bits:
        raise LengthMismatch(
            f"classifier has {len(w)} weights, the plate holds {plan.n_bits} bits",
            weights=len(w), bits=plan.n_bits,
        )
    inputs = list(zip(plan.wells, w.weights))
    if w.bias != 0:
        if plan.bias_well is None:
            raise MissingBiasWell("classifier has a bias but the plate has no constant-1 well", bias=w.bias)
        inputs.append((plan.bias_well, w.bias))
    positive_pool, negative_pool = (Location.well(cfg.pool_plate, address) for address in pools)
    draws = []
    totals = {positive_pool: Decimal(0), negative_pool: Decimal(0)}
    dropped = 0
    for address, weight in inputs:
        volume = quantize(abs(float(weight)) * cfg.v_o, cfg)
        if volume <= 0:
            dropped += weight != 0
            continue
        pool = positive_pool if weight > 0 else negative_pool
        draws.append(Instruction(Op.TRANSFER_FROM_WELL, Location.well(plan.plate, address), pool, volume))
        totals[pool] += _dec(volume)
    v_p = pool_volume(totals[positive_pool], totals[negative_pool], cfg)
    top_ups = []
    for pool in (positive_pool, negative_pool):
        fill = float(v_p - totals[pool])
        if fill > 0:
            top_ups.append(Instruction(Op.TRANSFER_SOLVENT, Location.solvent(), pool, fill))
    sequence = InstructionSequence(
        assign_tips(draws + top_ups, cfg.tip_policy),
        metadata={
            'phase': 'pool',
            'classifier': w.foreground,
            'v_o_ul': cfg.v_o,
            'pool_volume_ul': float(v_p),
            'pools': {'positive': positive_pool.label, 'negative': negative_pool.label},
            'dropped_weights': int(dropped),
            'tip_policy': cfg.tip_policy,
        },
    )
    logger.info(
        "compiled classifier %r: %d draws, %d top-ups, V_p %.2f uL, %d weights dropped",
        w.foreground, len(draws), len(top_ups), float(v_p), dropped,
    )
    return sequence


def operation_counts(n_datasets, n_bits):
    """Operations needed to classify M inputs of N bits, scalar silicon against parallel mixtures"""
    m, n = n_datasets, n_bits
    return {
        'silicon': {'additions': m * n - 1, 'multiplications': m * n, 'total': 2 * m * n - 1},
        'chemical': {'operations': n, 'total': n},
    }


@dataclass
class CostReport:
    n_transfers: int = 0
    n_tips: int = 0
    est_time_min: float = 0.0
    draws: dict = field(default_factory=dict)
    by_op: dict = field(default_factory=dict)
    operations: dict = field(default_factory=dict)

    @property
    def max_draw(self):
        return max(self.draws.values(), default=0.0)

    def merge(self, other):
        draws = dict(self.draws)
        for label, volume in other.draws.items():
            draws[label] = draws.get(label, 0.0) + volume
        by_op = dict(self.by_op)
        for op, count in other.by_op.items():
            by_op[op] = by_op.get(op, 0) + count
        return CostReport(
            n_transfers=self.n_transfers + other.n_transfers,
            n_tips=self.n_tips + other.n_tips,
            est_time_min=self.est_time_min + other.est_time_min,
            draws=draws,
            by_op=by_op,
            operations=self.operations or other.operations,
        )

    def to_dict(self):
        data = asdict(self)
        data['draws'] = dict(sorted(self.draws.items()))
        data['by_op'] = dict(sorted(self.by_op.items()))
        return data

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)


class VolumeLedger:
    """Well volumes only, for checking a program's draws without moving mass"""

    def __init__(self, target):
        plates = target.plates.values() if hasattr(target, 'plates') else [target]
        self.volumes = {}
        self.names = set()
        for plate in plates:
            self.names.add(plate.name)
            for address, well in plate.wells.items():
                self.volumes[(plate.name, address)] = well.volume

    def draw(self, location, volume, index):
        if location.plate not in self.names:
            raise PlateMismatch(f"no plate named {location.plate!r} to draw from", plate=location.plate)
        key = (location.plate, location.address)
        if key not in self.volumes:
            raise PlateMismatch(f"{location} is not on the plate", well=location.label)
        available = self.volumes[key]
        if volume > available * (1 + VOLUME_RTOL) + VOLUME_ATOL:
            raise BudgetExceeded(
                f"instruction {index} draws {volume:.3f} uL from {location}, {available:.3f} uL left",
                well=location.label, requested=volume, available=available, index=index,
            )
        self.volumes[key] = max(available - volume, 0.0)

    def fill(self, location, volume):
        key = (location.plate, location.address)
        if key in self.volumes:
            self.volumes[key] += volume


def write_cost(seq, cfg=None):
    """Transfer, tip and time counts of a sequence without checking its volumes"""
    cfg = cfg or CompileConfig.from_settings()
    by_op = {}
    draws = {}
    for instruction in seq:
        by_op[instruction.op.value] = by_op.get(instruction.op.value, 0) + 1
        if instruction.src.is_well:
            draws[instruction.src.label] = draws.get(instruction.src.label, 0.0) + instruction.volume
    return CostReport(
        n_transfers=len(seq),
        n_tips=seq.n_tips,
        est_time_min=len(seq) * cfg.seconds_per_transfer / 60.0,
        draws=draws,
        by_op=by_op,
    )


def check_budget(seq, target, cfg=None):
    """Replay the volumes of ``seq`` on a plate or deck; BudgetExceeded on the first overdraw"""
    ledger = VolumeLedger(target)
    for index, instruction in enumerate(seq):
        if instruction.src.is_well:
            ledger.draw(instruction.src, instruction.volume, index)
        ledger.fill(instruction.dst, instruction.volume)
    return write_cost(seq, cfg)


@dataclass
class PassCount:
    passes: int
    per_well: dict

    @property
    def mean_per_well(self):
        return float(np.mean(list(self.per_well.values()))) if self.per_well else 0.0


def count_feasible_passes(programs, target, max_passes=1000):
    """Apply successive programs to the same plate until its wells run dry.

    ``passes`` is how many whole programs ran before the first overdraw;
    ``per_well`` is, for every well that was drawn from, how many programs it
    could serve before its own volume ran out.
    """
    ledger = VolumeLedger(target)
    passes = None
    per_well = {}
    exhausted = set()
    seen = set()
    completed = 0
    for number, seq in enumerate(programs, start=1):
        if number > max_passes:
            break
        for index, instruction in enumerate(seq):
            if not instruction.src.is_well:
                ledger.fill(instruction.dst, instruction.volume)
                continue
            label = instruction.src.label
            seen.add(label)
            if label in exhausted:
                continue
            try:
                ledger.draw(instruction.src, instruction.volume, index)
            except BudgetExceeded:
                exhausted.add(label)
                per_well[label] = number - 1
                if passes is None:
                    passes = number - 1
        completed = number
        if seen and exhausted == seen:
            break
    for label in seen - exhausted:
        per_well[label] = completed
    return PassCount(passes if passes is not None else completed, per_well)


def plate_for(plan, volume):
    """A data plate whose bit wells all hold ``volume`` µL of solvent, for budget checks"""
    rows, cols = plan.plate_dims
    plate = PlateState(rows, cols, name=plan.plate)
    wells = list(plan.wells) + ([plan.bias_well] if plan.bias_well is not None else [])
    for address in wells:
        plate.wells[address] = SolutionState.solvent(volume)
    return plate
