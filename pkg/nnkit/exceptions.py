class NNKitError(Exception):
    pass


class InvalidNNArgument(NNKitError, ValueError):
    pass


class ShapeError(InvalidNNArgument):
    def __init__(self, op: str, *shapes: tuple[int, ...]):
        listed = " and ".join(str(tuple(shape)) for shape in shapes)
        super().__init__(f"{op}: incompatible shapes {listed}")
        self.op = op
        self.shapes = shapes


class NonFiniteError(NNKitError):
    """NaN or Inf produced by an op or found in a gradient"""

    def __init__(self, message: str, name: str):
        super().__init__(message)
        self.name = name


class TapeUsageError(NNKitError):
    pass


class DuplicateParameterName(NNKitError):
    pass


class CheckpointFormatError(NNKitError):
    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset
