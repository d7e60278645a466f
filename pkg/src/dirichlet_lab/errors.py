"""Exception hierarchy shared by every module."""


class LabError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class EmptyPrefix(LabError):
    pass


class OutOfDomain(LabError):
    pass


class DirichletViolatesBound(LabError):
    """t*psi(t) < 1 could not be certified."""


class WindowTooDeep(LabError):
    pass


class PsiTooLarge(LabError):
    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"psi(t) < 1/t cannot be certified at t = {t}")


class ConstructionOverflow(LabError):
    pass


class OrbitTerminated(LabError):
    pass


class BelowS0(LabError):
    pass


class PrecisionExhausted(LabError):
    pass


class InconsistencyFound(LabError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or []
        super().__init__(message)
