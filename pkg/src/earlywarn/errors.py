"""Exception hierarchy. Every error the pipeline raises on bad input derives from
:class:`PipelineError`, which the CLI maps to exit code 2."""


class PipelineError(Exception):
    """Base class for user, data, and configuration errors."""


class CoverageError(PipelineError):
    pass


class EmptyTraceError(PipelineError):
    pass


class ParseError(PipelineError):
    def __init__(self, path, line: int, column: int, message: str):
        self.path = str(path)
        self.line = line
        self.column = column
        super().__init__(f"{self.path}:{line}:{column}: {message}")


class ContractError(PipelineError):
    pass


class ConfigError(PipelineError):
    pass


class DegenerateTrainingError(PipelineError):
    pass


class StratificationError(PipelineError):
    pass


class UndefinedAUCError(PipelineError):
    pass


class EmptyDistributionError(PipelineError):
    pass


class SpecError(PipelineError):
    """Infeasible synthetic-trace specification."""
