from chemlab.exceptions import ChemLabError


class LengthMismatch(ChemLabError, ValueError):
    pass
