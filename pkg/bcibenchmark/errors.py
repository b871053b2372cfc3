"""Exception hierarchy shared by every stage of the benchmark."""


class BenchmarkError(Exception):
    """Base class for all errors raised by bcibenchmark."""


class MalformedInputError(BenchmarkError, ValueError):
    def __init__(self, message, path=None, line=None):
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(location + message)
        self.path = path
        self.line = line


class StructuralError(BenchmarkError, ValueError):
    pass


class DomainError(BenchmarkError, ValueError):
    pass


class PreconditionError(DomainError):
    pass


class TrainingError(BenchmarkError, RuntimeError):
    def __init__(self, message, kind=None):
        super().__init__(f"{kind}: {message}" if kind else message)
        self.kind = kind


class SelectionError(BenchmarkError, RuntimeError):
    def __init__(self, message, subset=()):
        super().__init__(f"{message} (subset={list(subset)})")
        self.subset = tuple(subset)


class CacheVersionError(BenchmarkError):
    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}; regenerate the upstream stage")
        self.path = path
        self.reason = reason


class ConfigError(BenchmarkError, ValueError):
    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.diagnostics))
