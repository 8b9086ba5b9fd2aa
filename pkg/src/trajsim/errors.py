"""Exception types raised by the simulation engine and the model front end."""


class SimulationError(Exception):
    """Base class for every error raised by this package."""


class ModelError(SimulationError):
    """A model is malformed or an operation on it is illegal at run time."""


class ParseError(SimulationError):
    """A model file failed to parse or validate.

    Carries the source location so tools can point at the offending token.
    """

    def __init__(self, message: str, line: int = 0, column: int = 0, path: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.path = path
        super().__init__(str(self))

    def __str__(self) -> str:
        prefix = self.path or "<model>"
        if self.line:
            return f"{prefix}:{self.line}:{self.column}: {self.message}"
        return f"{prefix}: {self.message}"
