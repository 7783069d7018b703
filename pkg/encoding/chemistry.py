"""
Analyte-set checks.

An analyte set is usable when every member is
 1. miscible in the solvent,
 2. stable and unreactive with the other members,
 3. quantifiable by the read-out instrument (it has an HPLC profile).
"""

from dataclasses import dataclass, field

from django.conf import settings

MISCIBLE = 1
INERT = 2
QUANTIFIABLE = 3


@dataclass(frozen=True)
class Compatibility:
    solvent: str = 'DMSO'
    # analyte id pairs known to react with each other
    reactive_pairs: frozenset = frozenset()

    @classmethod
    def from_settings(cls):
        section = settings.CHEMLAB['ENCODING']
        return cls(
            solvent=section.get('solvent', 'DMSO'),
            reactive_pairs=frozenset(tuple(int(m) for m in pair) for pair in section.get('reactive_pairs', ())),
        )


@dataclass(frozen=True)
class Violation:
    analyte: int
    criterion: int
    message: str


@dataclass
class ChemistryReport:
    analytes: list
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def for_analyte(self, analyte_id):
        return [v for v in self.violations if v.analyte == analyte_id]

    def to_dict(self):
        return {
            'analytes': self.analytes,
            'ok': self.ok,
            'violations': [
                {'analyte': v.analyte, 'criterion': v.criterion, 'message': v.message} for v in self.violations
            ],
        }


def validate_chemistry(analytes, compatibility=None, profiles=None):
    """Check the declared chemistry flags of every analyte; report only"""
    from hplc.profiles import HplcProfile

    compatibility = compatibility or Compatibility.from_settings()
    profiles = profiles if profiles is not None else HplcProfile.from_settings()
    report = ChemistryReport(analytes=[a.id for a in analytes])
    for analyte in analytes:
        if not analyte.miscible:
            report.violations.append(Violation(
                analyte.id, MISCIBLE, f"{analyte.name} is not miscible in {compatibility.solvent}",
            ))
        if not analyte.inert:
            report.violations.append(Violation(analyte.id, INERT, f"{analyte.name} is flagged reactive"))
        for pair in compatibility.reactive_pairs:
            if analyte.id in pair and all(member in report.analytes for member in pair):
                other = next((m for m in pair if m != analyte.id), analyte.id)
                report.violations.append(Violation(
                    analyte.id, INERT, f"{analyte.name} reacts with analyte {other}",
                ))
        if not analyte.quantifiable:
            report.violations.append(Violation(
                analyte.id, QUANTIFIABLE, f"{analyte.name} is flagged as not quantifiable",
            ))
        elif analyte.id not in profiles:
            report.violations.append(Violation(
                analyte.id, QUANTIFIABLE, f"{analyte.name} has no retention-time profile",
            ))
    return report
