class CorpusError(Exception):
    pass


class InvalidCorpusArgument(CorpusError, ValueError):
    pass


class IngestionError(CorpusError):
    """A record violates a data-model invariant (empty question, ...)"""


class AVSDParseError(CorpusError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class AVSDSchemaError(CorpusError):
    def __init__(self, dialog_id: str, errors: dict | str):
        super().__init__(f"Dialog {dialog_id}: {errors}")
        self.dialog_id = dialog_id
        self.errors = errors


class FeatureTrackFormatError(CorpusError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class WordVectorFormatError(CorpusError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"{message} (line {line_number})")
        self.line_number = line_number


class InvalidSynthSpec(CorpusError, ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
