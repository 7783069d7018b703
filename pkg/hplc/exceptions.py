from chemlab.exceptions import ChemLabError


class WindowOutOfRange(ChemLabError, ValueError):
    pass


class DegenerateSeries(ChemLabError, ValueError):
    pass


class MissingCalibration(ChemLabError, KeyError):
    pass
