from chemlab.exceptions import ChemLabError


class MissingFixtures(ChemLabError):
    pass


class BadMagic(ChemLabError, ValueError):
    pass


class TruncatedFile(ChemLabError, ValueError):
    pass
