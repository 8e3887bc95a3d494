import factory
from corpus.text import tokenize
from metrics.types import EvalPair


class EvalPairFactory(factory.Factory):
    dialog_id = factory.Sequence(lambda n: f"dialog-{n:04d}")
    turn_index = 0
    hypothesis = factory.LazyFunction(lambda: tokenize("yes , he is"))
    references = factory.LazyFunction(lambda: (tokenize("yes , he is"),))
    question = factory.LazyFunction(lambda: tokenize("is he cooking ?"))

    class Meta:
        model = EvalPair


def text_pair(hypothesis: str, *references: str, question: str = "what is it ?", **kwargs) -> EvalPair:
    return EvalPairFactory(
        hypothesis=tuple(hypothesis.split()),
        references=tuple(tuple(ref.split()) for ref in references),
        question=tuple(question.split()),
        **kwargs,
    )
