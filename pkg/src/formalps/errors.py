"""Exception hierarchy.

Every solver failure carries the stage that raised it so the CLI can
report a structured payload instead of a bare traceback.
"""


class FPSError(Exception):
    """Base class for structured solver failures."""

    stage = "fps"

    def __init__(self, message, *, stage=None, obj=None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage
        self.obj = obj

    @property
    def kind(self):
        # CamelCase class name -> kebab-case payload tag
        name = type(self).__name__
        if name.endswith("Error"):
            name = name[:-5]
        out = []
        for i, ch in enumerate(name):
            if ch.isupper() and i:
                out.append("-")
            out.append(ch.lower())
        return "".join(out)

    def payload(self):
        return {
            "error": self.kind,
            "stage": self.stage,
            "message": str(self),
            "object": None if self.obj is None else str(self.obj),
        }


class UnknownFunctionError(FPSError):
    stage = "expr"


class NotTermRepresentableError(FPSError):
    stage = "expr"


class MissingRecurrenceError(FPSError):
    stage = "expr"


class InconsistentSystemError(FPSError):
    stage = "linear-solve"


class NoDEFoundError(FPSError):
    stage = "simple-de"


class NotTwoTermError(FPSError):
    stage = "re-solve"


class TuningFailedError(FPSError):
    stage = "re-solve"


class EssentialSingularityError(FPSError):
    stage = "re-solve"


class LimitUndecidedError(FPSError):
    stage = "limits"


class UnfactorableCharacteristicError(FPSError):
    stage = "explike"


class BranchFailedError(FPSError):
    stage = "pipeline"


class LeadingCoefficientZeroError(FPSError):
    stage = "series-model"

    def __init__(self, message, *, index, k, **kw):
        super().__init__(message, **kw)
        self.index = index
        self.k = k


class DomainError(FPSError):
    stage = "series-model"


class OracleError(FPSError):
    stage = "oracle"


class ParseError(FPSError):
    stage = "parse"

    def __init__(self, message, *, line=1, column=1, **kw):
        super().__init__(f"{message} at line {line}, column {column}", **kw)
        self.line = line
        self.column = column
