"""Exception hierarchy.

``ValidationError`` subclasses signal bad input (CLI exit code 1); every
other ``DiffAnsatzError`` is a runtime failure (exit code 2).
"""


class DiffAnsatzError(Exception):
    pass


class ValidationError(DiffAnsatzError, ValueError):
    pass


class InvalidLetter(ValidationError):
    pass


class TooManyQubits(ValidationError):
    pass


class AllIdentity(ValidationError):
    pass


class EmptyCircuit(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class InvalidRange(ValidationError):
    pass


class BadTimestep(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class QubitMismatch(ValidationError):
    pass


class MissingParameter(ValidationError):
    pass


class EmptyPopulation(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyDecode(DiffAnsatzError):
    """Decoded image contains no gates."""


class NonFiniteLoss(DiffAnsatzError):
    pass


class CorruptCheckpoint(DiffAnsatzError):
    pass


class NonHermitianResidue(DiffAnsatzError):
    pass


class StageError(DiffAnsatzError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
