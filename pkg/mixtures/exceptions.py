from chemlab.exceptions import ChemLabError


class InsufficientVolume(ChemLabError):
    pass


class WellOverflow(ChemLabError):
    pass


class EmptySolution(ChemLabError, ValueError):
    pass


class AddressOutOfBounds(ChemLabError, ValueError):
    pass


class UnknownAnalyte(ChemLabError, KeyError):
    pass


class PlateMismatch(ChemLabError, ValueError):
    pass
