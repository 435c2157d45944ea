"""Shared exception hierarchy."""


class PatchProbeError(Exception):
    """Base class for all package errors."""


class InvalidInputError(PatchProbeError):
    """Bad user-supplied data: malformed files, invalid manifests, bad params."""


class MalformedHeader(InvalidInputError):
    pass


class ShapeMismatch(InvalidInputError):
    pass


class NonFiniteValue(InvalidInputError):
    def __init__(self, row: int, col: int):
        super().__init__(f"non-finite value at ({row}, {col})")
        self.row = row
        self.col = col


class InvariantViolation(InvalidInputError):
    pass


class IoFailure(PatchProbeError):
    pass


class DimMismatch(InvalidInputError):
    pass


class PatchCountMismatch(InvalidInputError):
    pass


class DegenerateMean(PatchProbeError):
    pass


class DegenerateMax(PatchProbeError):
    pass


class TooFewPatches(InvalidInputError):
    pass


class BboxOutOfBounds(InvalidInputError):
    pass


class TextDoesNotFit(InvalidInputError):
    pass


class UnsupportedGlyph(InvalidInputError):
    pass


class InvalidParams(InvalidInputError):
    pass


class EmptyInput(InvalidInputError):
    pass
