"""
One chemical classification run, end to end.

write datasets -> pool for every classifier -> inject each pool -> quantify
-> differential concentrations -> labels. Alongside every measured value the
run carries the electronic oracle for it, computed from the weights the
robot can actually realize.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from chemlab.seeding import seed_sequence
from encoding.plans import emit_write_instructions, written_concentration
from hplc.calibration import quantify
from hplc.chromatograms import InjectionModel, measure
from hplc.profiles import HplcProfile
from mixtures.plates import Deck, WellAddress
from mixtures.solutions import AnalyteRegistry, SolutionState
from protocols.compiler import CompileConfig, CostReport, compile_classifier, operation_counts, realizable, write_cost
from protocols.instructions import Location
from readout.differential import PoolPair, differential
from robot.executor import NoiseModel, execute

from .calibration import calibrate_instrument

logger = logging.getLogger(__name__)


@dataclass
class ClassifierRun:
    classifier: object
    realized: object
    program: object
    pool_volume: float
    pools: PoolPair
    truth: PoolPair
    expected: PoolPair
    result: object
    chromatograms: dict = field(default_factory=dict)

    @property
    def expected_z(self):
        return {a: self.expected.positive[a] - self.expected.negative[a] for a in sorted(self.expected.positive)}


@dataclass
class PipelineResult:
    datasets: list
    runs: list
    deck: Deck
    cost: CostReport
    log: object
    writes: object

    def rows(self, trial=0):
        """One record per (classifier, analyte)"""
        records = []
        for run in self.runs:
            expected_z = run.expected_z
            for analyte_id in sorted(run.result.z):
                records.append({
                    'trial': trial,
                    'classifier': run.classifier.foreground,
                    'analyte': analyte_id,
                    'expected_z': expected_z[analyte_id],
                    'measured_z': run.result.z[analyte_id],
                    'chemical_z': run.truth.positive[analyte_id] - run.truth.negative[analyte_id],
                    'expected_pos': run.expected.positive[analyte_id],
                    'measured_pos': run.pools.positive[analyte_id],
                    'expected_neg': run.expected.negative[analyte_id],
                    'measured_neg': run.pools.negative[analyte_id],
                })
        return records


def pool_wells(index, cols):
    """The positive and negative pool wells of the index-th classifier"""
    first, second = 2 * index, 2 * index + 1
    return WellAddress(first // cols, first % cols), WellAddress(second // cols, second % cols)


def expected_pools(realized, datasets, pool_volume, compile_cfg, registry):
    """Noise-free pool concentrations: (V_o/V_p)·C_written·Σ|w_i|·x_i over each polarity"""
    positive, negative = {}, {}
    weights = np.append(realized.weights, realized.bias)
    for dataset in datasets:
        bits = np.append(dataset.as_array(), 1.0)
        scale = compile_cfg.v_o / pool_volume * written_concentration(
            registry[dataset.analyte].stock_concentration, len(datasets),
        )
        positive[dataset.analyte] = scale * float(np.sum(np.where(weights > 0, weights, 0.0) * bits))
        negative[dataset.analyte] = scale * float(np.sum(np.where(weights < 0, -weights, 0.0) * bits))
    return PoolPair(positive, negative, pool_volume)


def inject(deck, location, profile, injection, volume, seed, label, dilution=1.0):
    """Draw ``volume`` from a well into waste, make it up ``dilution``-fold with solvent and measure it"""
    if dilution < 1:
        raise ValueError(f"sample dilution must be at least 1, got {dilution}")
    plate = deck.plate(location.plate)
    sample = plate.discard(location.address, volume)
    if dilution > 1:
        sample.absorb(SolutionState.solvent(volume * (dilution - 1.0)))
    return measure(sample, profile, injection, seed=seed, label=label)


def run_pipeline(
    datasets, classifiers, plan, seed=None, compile_cfg=None, noise=None, injection=None,
    profile=None, calibration=None, registry=None,
):
    """Write, pool, measure and read out every classifier against every dataset"""
    compile_cfg = compile_cfg or CompileConfig.from_settings()
    noise = noise if noise is not None else NoiseModel.from_settings()
    injection = injection if injection is not None else InjectionModel.from_settings()
    profile = profile if profile is not None else HplcProfile.from_settings()
    registry = registry if registry is not None else AnalyteRegistry.from_settings()
    calibration = calibration if calibration is not None else calibrate_instrument(profile)
    injection_volume = float(settings.CHEMLAB['HPLC']['injection_volume_ul'])
    dilution = float(settings.CHEMLAB['HPLC']['sample_dilution'])
    analyte_ids = sorted(d.analyte for d in datasets)

    write_seed, pool_seed, hplc_seed = seed_sequence(seed).spawn(3)
    deck = Deck.standard(registry)
    writes = emit_write_instructions(datasets, plan, registry, tip_policy=compile_cfg.tip_policy)
    deck, log = execute(writes, deck, noise, seed=write_seed)
    cost = write_cost(writes, compile_cfg)

    pool_plate = deck.plate(compile_cfg.pool_plate)
    pool_seeds = pool_seed.spawn(len(classifiers))
    hplc_seeds = hplc_seed.spawn(len(classifiers))
    runs = []
    for index, classifier in enumerate(classifiers):
        program = compile_classifier(classifier, plan, compile_cfg, pools=pool_wells(index, pool_plate.cols))
        deck, pool_log = execute(program, deck, noise, seed=pool_seeds[index])
        log.extend(pool_log)
        cost = cost.merge(write_cost(program, compile_cfg))
        v_p = program.metadata['pool_volume_ul']
        labels = program.metadata['pools']
        positive_well = Location.parse(labels['positive'])
        negative_well = Location.parse(labels['negative'])

        truth = {}
        measured = {}
        chromatograms = {}
        positive_seed, negative_seed = hplc_seeds[index].spawn(2)
        for polarity, location, child in (('positive', positive_well, positive_seed),
                                          ('negative', negative_well, negative_seed)):
            well = deck.plate(location.plate).well(location.address)
            truth[polarity] = {a: well.concentration(a) for a in analyte_ids}
            chrom = inject(deck, location, profile, injection, injection_volume, child,
                           f"classifier {classifier.foreground} {polarity} pool", dilution=dilution)
            chromatograms[polarity] = chrom
            concentrations = quantify(chrom, calibration, profile)
            measured[polarity] = {a: dilution * concentrations[a] for a in analyte_ids}
        pools = PoolPair(measured['positive'], measured['negative'], v_p)
        realized = realizable(classifier, compile_cfg)
        runs.append(ClassifierRun(
            classifier=classifier,
            realized=realized,
            program=program,
            pool_volume=v_p,
            pools=pools,
            truth=PoolPair(truth['positive'], truth['negative'], v_p),
            expected=expected_pools(realized, datasets, v_p, compile_cfg, registry),
            result=differential(pools),
            chromatograms=chromatograms,
        ))

    injections = 2 * len(classifiers)
    cost = cost.merge(CostReport(
        n_transfers=injections,
        n_tips=injections,
        est_time_min=injections * compile_cfg.seconds_per_transfer / 60.0,
        by_op={'hplc_injection': injections},
    ))
    cost.operations = operation_counts(len(datasets), plan.n_bits)
    logger.info("pipeline: %d datasets, %d classifiers, %d transfers", len(datasets), len(classifiers), cost.n_transfers)
    return PipelineResult(datasets=list(datasets), runs=runs, deck=deck, cost=cost, log=log, writes=writes)
