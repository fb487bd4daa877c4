"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: InputError -> 2, DataError -> 3,
InternalError -> 4.
"""


class LoadshiftError(Exception):
    pass


class InputError(LoadshiftError):
    """Missing files, unknown columns, malformed configuration."""


class DataError(LoadshiftError):
    """Inputs parsed fine but are unusable: degenerate labels, empty
    time intersections, zero usage cycles, single-class training data."""


class InternalError(LoadshiftError):
    """An invariant the code itself guarantees was violated."""


class StageError(DataError):
    """A daily-pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage
