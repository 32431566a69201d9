"""Exception types raised across the package."""


class ContractError(ValueError):
    """Input violates a documented precondition (shape, range, finiteness)."""


class SingularKernelError(RuntimeError):
    """Kernel matrix could not be factorized even with maximum jitter."""


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch, value):
        super().__init__(f"surrogate training diverged at epoch {epoch}: loss={value!r}")
        self.epoch = epoch
        self.value = value


class SingularDesignError(RuntimeError):
    """OLS design matrix is rank deficient even after regularization."""


class NotFittedError(RuntimeError):
    pass


class AdapterError(RuntimeError):
    """External model returned something unusable; ``payload`` holds the raw output."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class ParseError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
