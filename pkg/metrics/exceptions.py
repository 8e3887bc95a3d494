class MetricError(Exception):
    pass


class InvalidMetricArgument(MetricError, ValueError):
    pass


class UnmatchedHypothesisError(MetricError):
    def __init__(self, keys: list[tuple[str, int]]):
        listed = ", ".join(f"{dialog_id}#{turn_index}" for dialog_id, turn_index in keys)
        super().__init__(f"Hypotheses without a corpus turn: {listed}")
        self.keys = keys


class GenerationFormatError(MetricError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"Line {line_number}: {message}")
        self.line_number = line_number
