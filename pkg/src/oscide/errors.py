"""Exception hierarchy shared by every analysis module.

Each class carries a short ``code`` used by the command-line front end when it
prints its final ``ERROR <code>: <message>`` line.
"""


class OscideError(Exception):
    code = "error"


class DomainError(OscideError, ValueError):
    code = "domain"


class SingularMatrix(OscideError):
    code = "singular"

    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(message or f"matrix is singular at pivot {pivot}")


class NonConvergent(OscideError):
    code = "nonconvergent"


class StepTooLarge(OscideError):
    code = "step"


class NonFinite(OscideError):
    code = "nonfinite"

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"state diverged to a non-finite value at t = {time:.6g} s")


class NotOscillating(OscideError):
    code = "not_oscillating"


class FrequencyMismatch(OscideError):
    code = "freq_mismatch"


class OutOfRange(OscideError):
    code = "out_of_range"


class Infeasible(OscideError):
    code = "infeasible"


class NoRoot(OscideError):
    code = "no_root"


class ParseError(OscideError):
    code = "parse"

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class ValidationError(ParseError):
    code = "validation"

    def __init__(self, field: str, message: str, line: int | None = None, path: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}", line=line, path=path)
