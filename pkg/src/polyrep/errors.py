"""Exception types mapped to CLI exit codes."""


class PolyrepError(Exception):
    """Base class for package errors."""


class DispatchError(PolyrepError):
    """An operation was invoked outside its validity class (usage error)."""


class ConfigurationError(PolyrepError):
    """Missing or inconsistent configuration (usage error)."""


class ObstructionError(PolyrepError):
    """A local density vanished; the assembled quantity is zero or undefined."""

    def __init__(self, p: int, context: str = ""):
        self.p = p
        self.context = context
        super().__init__(f"local obstruction at p={p}" + (f": {context}" if context else ""))


class BudgetExceededError(PolyrepError):
    """A computation would exceed its configured work budget."""

    def __init__(self, work, budget, context: str = ""):
        self.work = work
        self.budget = budget
        super().__init__(
            f"work estimate {work:.3g} exceeds budget {budget:.3g}"
            + (f" ({context})" if context else "")
        )
