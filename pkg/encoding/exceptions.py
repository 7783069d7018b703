from chemlab.exceptions import ChemLabError


class PlateTooSmall(ChemLabError, ValueError):
    pass


class AnalyteCollision(ChemLabError, ValueError):
    pass


class DatasetMismatch(ChemLabError, ValueError):
    pass


class MalformedDataset(ChemLabError, ValueError):
    pass
