"""Exception hierarchy shared by all treetop modules."""


class TreetopError(Exception):
    """Base class for all library errors."""


class InvalidWOSet(TreetopError, ValueError):
    pass


class NotAnExtension(TreetopError):
    """Raised when a strict initial-segment extension was required."""


class UnknownNode(TreetopError, KeyError):
    pass


class BadParams(TreetopError, ValueError):
    pass


class PayloadMismatch(TreetopError, TypeError):
    pass


class PartialLabel(TreetopError):
    """A label does not cover every node of the tree."""


class NotStrict(TreetopError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotContinuous(TreetopError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotLexStrict(NotStrict):
    pass


class NotMonotone(TreetopError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PickExhausted(TreetopError):
    pass


class PreconditionFailed(TreetopError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class CandidateNotRational(TreetopError):
    pass


class InvalidScheme(TreetopError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class NotBaseLabeled(TreetopError):
    pass


class UnknownPoint(TreetopError, KeyError):
    pass


class SchemaError(TreetopError, ValueError):
    """Input JSON does not match the expected schema."""
