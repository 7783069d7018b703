import pandas as pd
from django.conf import settings

from chemlab.commands import ChemLabCommand
from chemlab.exceptions import ConfigError
from experiments import reports
from experiments.calibration import calibrate_instrument
from experiments.pipeline import inject
from hplc.calibration import CalibrationCurve, quantify
from hplc.chromatograms import Chromatogram, InjectionModel
from hplc.profiles import HplcProfile
from mixtures.plates import Deck
from protocols.instructions import Location
from readout.differential import PoolPair, differential


class Command(ChemLabCommand):
    help = "Quantify chromatograms, or inject deck wells and quantify them"

    def add_command_arguments(self, parser):
        parser.add_argument('chromatograms', nargs='*', help="Chromatogram CSV files (time_min, absorbance_au)")
        parser.add_argument('--deck', help="deck.json holding the wells named by --sample")
        parser.add_argument('--sample', action='append', default=[], help="Well to inject, e.g. pools/A1")
        parser.add_argument('--calibration', help="calibration.json (default: a noise-free ladder fit)")
        parser.add_argument('--differential', action='store_true',
                            help="Treat the two sources as a positive and a negative pool")

    def run(self, config, *args, **options):
        if options['sample'] and not options['deck']:
            raise ConfigError("--sample needs --deck", samples=options['sample'])
        profile = HplcProfile.from_settings()
        curve = (CalibrationCurve.read(options['calibration']) if options['calibration']
                 else calibrate_instrument(profile))
        out = reports.ensure_dir(config.out_dir)

        # (source, chromatogram, fold dilution before injection)
        sources = [(path, Chromatogram.from_csv(path), 1.0) for path in options['chromatograms']]
        if options['sample']:
            deck = Deck.read(options['deck'])
            injection = InjectionModel.from_settings()
            section = settings.CHEMLAB['HPLC']
            volume = float(section['injection_volume_ul'])
            dilution = float(section['sample_dilution'])
            for index, label in enumerate(options['sample']):
                chrom = inject(deck, Location.parse(label), profile, injection, volume, [config.seed, index], label,
                               dilution=dilution)
                chrom.to_csv(out / f"chromatogram_{label.replace('/', '_')}.csv", reports.float_format())
                sources.append((label, chrom, dilution))

        measured = {
            str(source): {a: factor * c for a, c in quantify(chrom, curve, profile).items()}
            for source, chrom, factor in sources
        }
        frame = pd.DataFrame(
            [{'source': source, 'analyte': a, 'concentration_mg_ml': c}
             for source, values in measured.items() for a, c in sorted(values.items())],
            columns=['source', 'analyte', 'concentration_mg_ml'],
        )
        reports.write_csv(frame, out / 'concentrations.csv')

        if options['differential']:
            if len(measured) != 2:
                raise ConfigError("--differential needs exactly two sources, positive pool first",
                                  sources=list(measured))
            positive, negative = measured.values()
            # the pool volume only scales z and is not recorded in a chromatogram
            result = differential(PoolPair(positive, negative, pool_volume=1.0))
            table = pd.DataFrame(
                [{'analyte': a, 'z': z, 'label': result.labels[a].value} for a, z in result.z.items()],
                columns=['analyte', 'z', 'label'],
            )
            reports.write_csv(table, out / 'differential.csv')
            for row in table.itertuples():
                self.report(f"analyte {row.analyte}: z = {row.z:+.4f} mg/mL -> {row.label}")
        else:
            self.report(f"{len(measured)} samples quantified; written to {out}")
