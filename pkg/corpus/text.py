import json
import re
from collections import Counter
from collections.abc import (
    Iterable,
    Sequence,
)
from pathlib import Path

from corpus.constants import (
    PUNCTUATION,
    VOCAB_FORMAT_VERSION,
    ReservedTokens,
)
from corpus.exceptions import (
    CorpusError,
    InvalidCorpusArgument,
)
from corpus.types import (
    Corpus,
    Tokens,
)


_TOKEN_RE = re.compile(
    r"[{p}]|[^\s{p}]+".format(p=re.escape(PUNCTUATION))
)


def tokenize(text: str) -> Tokens:
    """Lowercase, split off punctuation, keep apostrophes inside words"""
    return tuple(_TOKEN_RE.findall(text.lower()))


class Vocab(ReservedTokens):
    """Token <-> id bijection with ids 0-3 reserved"""

    def __init__(self, tokens: Sequence[str], min_count: int = 1):
        if tuple(tokens[: len(self.TOKENS)]) != self.TOKENS:
            raise CorpusError("Vocabulary must start with the reserved tokens")
        self.tokens: tuple[str, ...] = tuple(tokens)
        self.min_count = min_count
        self.token_to_id: dict[str, int] = {}
        for idx, token in enumerate(self.tokens):
            if token in self.token_to_id:
                raise CorpusError(f"Duplicate vocabulary token: {token}")
            self.token_to_id[token] = idx

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vocab):
            return NotImplemented
        return self.tokens == other.tokens

    def id_of(self, token: str) -> int:
        return self.token_to_id.get(token, self.UNK)

    def token_of(self, idx: int) -> str:
        if not 0 <= idx < len(self.tokens):
            raise InvalidCorpusArgument(
                f"Token id {idx} out of range [0, {len(self.tokens)})"
            )
        return self.tokens[idx]

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.id_of(token) for token in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.token_of(int(idx)) for idx in ids]

    def with_tokens(self, extra_tokens: Iterable[str]) -> "Vocab":
        """Append tokens not yet in the vocabulary after the existing ids"""
        tokens = list(self.tokens)
        for token in extra_tokens:
            if token not in self.token_to_id and token not in tokens:
                tokens.append(token)
        return Vocab(tokens, self.min_count)

    def to_dict(self) -> dict:
        return {
            "version": VOCAB_FORMAT_VERSION,
            "min_count": self.min_count,
            "tokens": list(self.tokens),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Vocab":
        if data.get("version") != VOCAB_FORMAT_VERSION:
            raise CorpusError(
                f"Unsupported vocabulary version: {data.get('version')}"
            )
        return cls(data["tokens"], data.get("min_count", 1))


def build_vocab(
    corpus: Corpus | Iterable[Sequence[str]],
    min_count: int = 1,
    extra_tokens: Iterable[str] = (),
) -> Vocab:
    """Frequency-ordered vocabulary, ties broken lexicographically.

    Tokens below `min_count` stay out and encode to UNK. `extra_tokens` are
    appended after the counted words.
    """
    if min_count < 1:
        raise InvalidCorpusArgument(f"min_count must be >= 1, got {min_count}")
    sequences = (
        corpus.token_sequences() if isinstance(corpus, Corpus) else corpus
    )
    counts: Counter[str] = Counter()
    n_sequences = 0
    for sequence in sequences:
        n_sequences += 1
        counts.update(sequence)
    if n_sequences == 0:
        raise InvalidCorpusArgument("Cannot build a vocabulary of an empty corpus")

    kept = sorted(
        (
            (token, count)
            for token, count in counts.items()
            if count >= min_count and token not in ReservedTokens.TOKENS
        ),
        key=lambda item: (-item[1], item[0]),
    )
    vocab = Vocab(
        list(ReservedTokens.TOKENS) + [token for token, _ in kept], min_count
    )
    return vocab.with_tokens(extra_tokens)


def encode(vocab: Vocab, tokens: Iterable[str]) -> list[int]:
    return vocab.encode(tokens)


def decode(vocab: Vocab, ids: Iterable[int]) -> list[str]:
    return vocab.decode(ids)


def save_vocab(vocab: Vocab, path: str | Path):
    Path(path).write_text(json.dumps(vocab.to_dict(), sort_keys=True))


def load_vocab(path: str | Path) -> Vocab:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise CorpusError(f"Malformed vocabulary file {path}: {e}") from e
    return Vocab.from_dict(data)
