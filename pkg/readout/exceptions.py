from chemlab.exceptions import ChemLabError


class KeyMismatch(ChemLabError, ValueError):
    pass
