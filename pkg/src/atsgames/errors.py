"""Exception hierarchy shared by every module of the package."""


class ATSError(Exception):
    """Base class for all errors raised by atsgames."""


class UnknownAction(ATSError):
    def __init__(self, action):
        super().__init__(f"unknown action {action!r}")
        self.action = action


class InitialStateMismatch(ATSError):
    pass


class InvalidPlay(ATSError):
    pass


class InvalidStrategy(ATSError):
    pass


class MissingResponse(ATSError):
    """A strategy has no response stored for a prime trace."""

    def __init__(self, key):
        shown = " ".join(key) if key else "<empty>"
        super().__init__(f"strategy has no response for prime trace [{shown}]")
        self.key = tuple(key)


class ExplosionCap(ATSError):
    """An enumeration exceeded its configured size cap."""

    def __init__(self, what, cap, diagnostics=None):
        super().__init__(f"{what} exceeded the cap of {cap}")
        self.what = what
        self.cap = cap
        self.diagnostics = diagnostics or {}


class Truncated(ATSError):
    """Some play did not end within the horizon."""


class ParseError(ATSError):
    def __init__(self, reason, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + reason)
        self.reason = reason
        self.line = line
        self.column = column
