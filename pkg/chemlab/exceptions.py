import json


class ChemLabError(Exception):
    """Base class for every domain error raised by the simulator.

    ``code`` is the error's name and ``detail`` carries the values a caller
    needs to locate the problem (well label, requested volume, ...).
    """

    def __init__(self, message='', **detail):
        super().__init__(message or self.code)
        self.detail = detail

    @property
    def code(self):
        return type(self).__name__

    def as_json(self):
        """One-line machine readable form used by the management commands"""
        return json.dumps(
            {'error': self.code, 'message': str(self), 'detail': self.detail},
            sort_keys=True,
            default=str,
        )


class ConfigError(ChemLabError, ValueError):
    pass
