"""Exception hierarchy.

Every error carries a stable ``code`` (printed by the CLI as
``error<TAB>code<TAB>message``) and the process exit status it maps to.
"""


class HeightforgeError(Exception):
    code = "Error"
    exit_status = 2


class ValidationError(HeightforgeError):
    code = "ValidationError"


class ResourceAbort(HeightforgeError):
    """Raised when a computation would exceed the configured desk-scale budget."""

    code = "ResourceAbort"
    exit_status = 3


# algebra

class ZeroForm(ValidationError):
    code = "ZeroForm"


class DegenerateResultant(ValidationError):
    code = "DegenerateResultant"


class ConstantSubstitution(ValidationError):
    code = "ConstantSubstitution"


class NotExactDivision(ValidationError):
    code = "NotExactDivision"


# dynparse

class ExprSyntaxError(ValidationError):
    code = "SyntaxError"

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownVariable(ExprSyntaxError):
    code = "UnknownVariable"


class NonLiteralExponent(ExprSyntaxError):
    code = "NonLiteralExponent"


class InhomogeneousForm(ValidationError):
    code = "InhomogeneousForm"


class MixedBlockUnsupported(ValidationError):
    code = "MixedBlockUnsupported"


class SpaceMismatch(ValidationError):
    code = "SpaceMismatch"


class UnsupportedSpace(ValidationError):
    code = "UnsupportedSpace"


class AllZeroCoordinates(ValidationError):
    code = "AllZeroCoordinates"


class WrongArity(ValidationError):
    code = "WrongArity"


# projective / correspondence

class IndeterminatePoint(ValidationError):
    code = "IndeterminatePoint"


class InvalidCorrespondence(ValidationError):
    code = "InvalidCorrespondence"


# nslattice / canheight

class UnsupportedSplit(ValidationError):
    code = "UnsupportedSplit"


class NotExpanding(ValidationError):
    code = "NotExpanding"


class NotEigenvector(ValidationError):
    code = "NotEigenvector"


class EmptyEplus(ValidationError):
    code = "EmptyEplus"


# series / northcott

class NoRecurrenceFound(ValidationError):
    code = "NoRecurrenceFound"


class EnumerationTooLarge(ResourceAbort):
    code = "EnumerationTooLarge"


class RationalsNotEnumerable(ValidationError):
    code = "RationalsNotEnumerable"


class HypothesisFailed(ValidationError):
    code = "HypothesisFailed"
