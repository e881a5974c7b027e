class RstMrfError(Exception):
    exit_code = 1


class InvalidArgumentError(RstMrfError, ValueError):
    exit_code = 2


class ConfigError(RstMrfError):
    exit_code = 2


class NotApplicableError(RstMrfError):
    exit_code = 2


class TooLargeError(InvalidArgumentError):
    pass


class NoSpanningTreeError(RstMrfError):
    exit_code = 3

    def __init__(self, message: str, steps: int = 0):
        super().__init__(message)
        self.steps = steps


class NumericalBreakdownError(RstMrfError, ArithmeticError):
    exit_code = 3

    def __init__(self, message: str, iteration: int = -1):
        super().__init__(f"{message} (iteration {iteration})" if iteration >= 0 else message)
        self.iteration = iteration


class InterfaceNotFoundError(RstMrfError):
    pass
