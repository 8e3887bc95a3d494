from dataclasses import dataclass

from metrics.exceptions import InvalidMetricArgument


Tokens = tuple[str, ...]


@dataclass(frozen=True)
class EvalPair:
    dialog_id: str
    turn_index: int
    hypothesis: Tokens
    references: tuple[Tokens, ...]
    question: Tokens = ()

    def __post_init__(self):
        if not self.references:
            raise InvalidMetricArgument(
                f"Dialog {self.dialog_id} turn {self.turn_index}: no references"
            )
