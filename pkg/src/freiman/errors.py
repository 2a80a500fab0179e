"""Exception hierarchy shared by all modules."""


class FreimanError(Exception):
    """Base class for errors raised by this package."""


class NonPrimeModulus(FreimanError):
    pass


class DegenerateSet(FreimanError):
    pass


class TooLarge(FreimanError):
    """An exhaustive enumeration would exceed its configured budget."""


class NotIsolated(FreimanError):
    pass


class DifferenceSetIncomplete(FreimanError):
    pass


class NotWellDefined(FreimanError):
    pass


class NotAFreimanHom(FreimanError):
    pass


class LevelCapExceeded(FreimanError):
    pass


class ScheduleInvalid(FreimanError):
    def __init__(self, message, failing_j=None, condition=None):
        super().__init__(message)
        self.failing_j = failing_j
        self.condition = condition


class InvalidConfig(FreimanError):
    pass
