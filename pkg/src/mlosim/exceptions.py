"""Exception types raised by the simulator."""


class MloSimError(Exception):
    pass


class GenerationError(MloSimError):
    """Scenario generation exhausted its rejection budget."""


class InvalidStationError(MloSimError, ValueError):
    pass


class UnservableSubflowError(MloSimError, ValueError):
    pass


class UnservableFlowError(MloSimError, ValueError):
    pass


class ConfigError(MloSimError, ValueError):
    """Raised with the full list of problems found in a config."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
