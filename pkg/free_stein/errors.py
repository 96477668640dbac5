class FreeSteinError(Exception):
    """Base class for every error raised by free_stein."""


class StructuralError(FreeSteinError):
    """Operands live over different generator systems or have incompatible shapes."""


class DegreeCapExceeded(FreeSteinError):
    def __init__(self, degree: int, cap: int):
        super().__init__(f"degree {degree} exceeds the cap of {cap} letters")
        self.degree = degree
        self.cap = cap


class UnknownLetter(FreeSteinError):
    def __init__(self, letter: str, available: int):
        super().__init__(f"unknown letter {letter}; the system has {available}")
        self.letter = letter
        self.available = available


class ModelSpecError(FreeSteinError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ParseError(FreeSteinError):
    def __init__(self, message: str, position: int, token: str = ""):
        where = f" at token {token!r}" if token else ""
        super().__init__(f"{message}{where} (position {position})")
        self.position = position
        self.token = token


class NumericalDiagnostic(FreeSteinError):
    """A computation finished or stopped in a numerically doubtful state.

    ``partial`` carries whatever report was available when the diagnostic fired.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
