import logging
from dataclasses import (
    dataclass,
    field,
)

import numpy as np
from corpus.constants import ReservedTokens
from corpus.text import Vocab
from dialogmodel.config import DecodeOptions
from dialogmodel.constants import DecodeModes
from dialogmodel.network import (
    AVSDModel,
    EncodedDialog,
)
from dialogmodel.samples import (
    Sample,
    make_batch,
)
from nnkit.tensor import Tensor


logger = logging.getLogger(__name__)


@dataclass
class Hypothesis:
    tokens: list[int]
    log_prob: float
    finished: bool = False
    attention: list[np.ndarray] = field(default_factory=list)
    state: tuple[Tensor, Tensor] | None = None

    @property
    def length(self) -> int:
        # EOS counts towards the length of a finished hypothesis
        return len(self.tokens) + (1 if self.finished else 0)

    def score(self, length_penalty: float) -> float:
        return self.log_prob / max(self.length, 1) ** length_penalty


@dataclass
class Generation:
    dialog_id: str
    turn_index: int
    question: tuple[str, ...]
    reference: tuple[str, ...]
    hypothesis: tuple[str, ...]
    attention_weights: list[list[float]] | None = None

    def to_record(self) -> dict:
        record = {
            "dialog_id": self.dialog_id,
            "turn_index": self.turn_index,
            "question": " ".join(self.question),
            "reference": " ".join(self.reference),
            "hypothesis": " ".join(self.hypothesis),
        }
        if self.attention_weights is not None:
            record["attention_weights"] = self.attention_weights
        return record


def log_softmax(logits: np.ndarray) -> np.ndarray:
    top = logits.max()
    return logits - (np.log(np.exp(logits - top).sum()) + top)


def ranked_tokens(log_probs: np.ndarray, n: int) -> np.ndarray:
    """Top `n` ids by probability, ties to the lowest id"""
    return np.lexsort((np.arange(log_probs.size), -log_probs))[:n]


def greedy_decode(
    model: AVSDModel, encoded: EncodedDialog, max_length: int
) -> Hypothesis:
    state = model.initial_decoder_state(encoded)
    hypothesis = Hypothesis(tokens=[], log_prob=0.0)
    prev = ReservedTokens.SOS
    for _ in range(max_length):
        out = model.decode_step(np.array([prev]), state, encoded)
        logits = out.logits.value[0]
        token = int(np.argmax(logits))
        hypothesis.log_prob += float(log_softmax(logits)[token])
        if token == ReservedTokens.EOS:
            hypothesis.finished = True
            break
        hypothesis.tokens.append(token)
        if out.weights is not None:
            hypothesis.attention.append(out.weights[0])
        state = (out.h, out.c)
        prev = token
    return hypothesis


def beam_decode(
    model: AVSDModel,
    encoded: EncodedDialog,
    beam_width: int,
    max_length: int,
    length_penalty: float,
) -> Hypothesis:
    """Beam search ranked by cumulative log-probability.

    The answer is the finished hypothesis with the best length-normalized
    score, or the best live one when nothing finished within `max_length`.
    """
    beams = [
        Hypothesis(tokens=[], log_prob=0.0, state=model.initial_decoder_state(encoded))
    ]
    finished: list[Hypothesis] = []
    for _ in range(max_length):
        candidates = []
        for index, beam in enumerate(beams):
            prev = beam.tokens[-1] if beam.tokens else ReservedTokens.SOS
            out = model.decode_step(np.array([prev]), beam.state, encoded)
            log_probs = log_softmax(out.logits.value[0])
            weights = None if out.weights is None else out.weights[0]
            for token in ranked_tokens(log_probs, beam_width):
                candidates.append(
                    (beam.log_prob + float(log_probs[token]), index, int(token), out, weights)
                )
        candidates.sort(key=lambda candidate: (-candidate[0], candidate[1], candidate[2]))

        survivors = []
        for log_prob, index, token, out, weights in candidates[:beam_width]:
            parent = beams[index]
            if token == ReservedTokens.EOS:
                finished.append(
                    Hypothesis(
                        tokens=list(parent.tokens),
                        log_prob=log_prob,
                        finished=True,
                        attention=list(parent.attention),
                    )
                )
                continue
            attention = list(parent.attention)
            if weights is not None:
                attention.append(weights)
            survivors.append(
                Hypothesis(
                    tokens=parent.tokens + [token],
                    log_prob=log_prob,
                    attention=attention,
                    state=(out.h, out.c),
                )
            )
        beams = survivors
        if not beams:
            break

    pool = finished or beams
    _, best = min(
        enumerate(pool),
        key=lambda item: (-item[1].score(length_penalty), item[0]),
    )
    return best


def decode_sample(
    model: AVSDModel, sample: Sample, options: DecodeOptions
) -> Hypothesis:
    options.validate()
    encoded = model.encode(make_batch([sample], model.config))
    if options.mode == DecodeModes.BEAM:
        return beam_decode(
            model, encoded, options.beam_width, options.max_length, options.length_penalty
        )
    return greedy_decode(model, encoded, options.max_length)


def generate(
    model: AVSDModel, sample: Sample, vocab: Vocab, options: DecodeOptions
) -> Generation:
    hypothesis = decode_sample(model, sample, options)
    return Generation(
        dialog_id=sample.dialog_id,
        turn_index=sample.turn_index,
        question=tuple(sample.question_tokens),
        reference=tuple(sample.answer_tokens),
        hypothesis=tuple(vocab.decode(hypothesis.tokens)),
        attention_weights=(
            [weights.tolist() for weights in hypothesis.attention]
            if options.dump_attention
            else None
        ),
    )


def generate_all(
    model: AVSDModel, samples: list[Sample], vocab: Vocab, options: DecodeOptions
) -> list[Generation]:
    generations = [generate(model, sample, vocab, options) for sample in samples]
    logger.info("Generated answers for %d questions", len(generations))
    return generations
