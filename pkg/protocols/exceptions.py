from chemlab.exceptions import ChemLabError


class BudgetExceeded(ChemLabError):
    pass


class InfeasiblePool(ChemLabError, ValueError):
    pass


class MalformedInstruction(ChemLabError, ValueError):
    pass


class MissingBiasWell(ChemLabError, ValueError):
    pass
