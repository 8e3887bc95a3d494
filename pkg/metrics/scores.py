import logging
import math
from collections import Counter
from collections.abc import Sequence

from metrics.constants import (
    BLEU_MAX_N,
    CIDER_MAX_N,
    CIDER_SCALE,
    METEOR_PENALTY_EXPONENT,
    METEOR_PENALTY_GAMMA,
    ROUGE_BETA,
)
from metrics.exceptions import InvalidMetricArgument
from metrics.types import (
    EvalPair,
    Tokens,
)


logger = logging.getLogger(__name__)


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _require_pairs(pairs: Sequence[EvalPair], metric: str):
    if not pairs:
        raise InvalidMetricArgument(f"{metric}: no pairs to score")


def closest_reference_length(hypothesis: Tokens, references: Sequence[Tokens]) -> int:
    """Length of the reference closest to the hypothesis, ties to the shorter"""
    return min((abs(len(ref) - len(hypothesis)), len(ref)) for ref in references)[1]


def bleu(pairs: Sequence[EvalPair], max_n: int = BLEU_MAX_N) -> list[float]:
    """Corpus-level BLEU-1..BLEU-max_n.

    Clipped n-gram matches and hypothesis n-gram totals are summed over the
    whole corpus before the precisions are taken; the brevity penalty
    compares the summed hypothesis length with the summed closest
    reference lengths.
    """
    _require_pairs(pairs, "BLEU")
    if max_n < 1:
        raise InvalidMetricArgument(f"BLEU: max_n must be at least 1, got {max_n}")

    matches = [0] * max_n
    totals = [0] * max_n
    hyp_length = 0
    ref_length = 0
    for pair in pairs:
        hyp_length += len(pair.hypothesis)
        ref_length += closest_reference_length(pair.hypothesis, pair.references)
        for n in range(1, max_n + 1):
            hyp_counts = ngram_counts(pair.hypothesis, n)
            max_ref_counts: Counter = Counter()
            for ref in pair.references:
                max_ref_counts |= ngram_counts(ref, n)
            matches[n - 1] += sum(
                min(count, max_ref_counts[gram]) for gram, count in hyp_counts.items()
            )
            totals[n - 1] += sum(hyp_counts.values())

    if hyp_length == 0:
        return [0.0] * max_n
    if hyp_length > ref_length:
        brevity_penalty = 1.0
    else:
        brevity_penalty = math.exp(1.0 - ref_length / hyp_length)

    scores = []
    log_precision_sum = 0.0
    for n in range(1, max_n + 1):
        matched, total = matches[n - 1], totals[n - 1]
        if matched == 0 or total == 0:
            log_precision_sum = -math.inf
        else:
            log_precision_sum += math.log(matched / total)
        if log_precision_sum == -math.inf:
            scores.append(0.0)
        else:
            scores.append(brevity_penalty * math.exp(log_precision_sum / n))
    return scores


def lcs_length(first: Sequence[str], second: Sequence[str]) -> int:
    if not first or not second:
        return 0
    previous = [0] * (len(second) + 1)
    for token in first:
        current = [0]
        for j, other in enumerate(second, start=1):
            if token == other:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l_pair(hypothesis: Tokens, references: Sequence[Tokens], beta: float = ROUGE_BETA) -> float:
    if not hypothesis:
        return 0.0
    beta2 = beta * beta
    best = 0.0
    for ref in references:
        common = lcs_length(hypothesis, ref)
        if not common:
            continue
        precision = common / len(hypothesis)
        recall = common / len(ref)
        best = max(best, (1 + beta2) * precision * recall / (recall + beta2 * precision))
    return best


def rouge_l(pairs: Sequence[EvalPair], beta: float = ROUGE_BETA) -> float:
    """Mean over pairs of the LCS F-measure of the best-scoring reference"""
    _require_pairs(pairs, "ROUGE-L")
    return sum(rouge_l_pair(p.hypothesis, p.references, beta) for p in pairs) / len(pairs)


def _tfidf(counts: Counter, idf: dict, total: int | None = None) -> dict:
    if total is None:
        total = sum(counts.values())
    return {
        gram: (count / total) * idf[gram]
        for gram, count in counts.items()
        if count
    }


def _cosine(first: dict, second: dict) -> float:
    norm_first = math.sqrt(sum(v * v for v in first.values()))
    norm_second = math.sqrt(sum(v * v for v in second.values()))
    if norm_first == 0.0 or norm_second == 0.0:
        return 0.0
    dot = sum(value * second.get(gram, 0.0) for gram, value in first.items())
    return dot / (norm_first * norm_second)


def cider(pairs: Sequence[EvalPair], max_n: int = CIDER_MAX_N) -> float:
    """Corpus CIDEr, scaled to [0, 10].

    Each pair's reference set is one document for the IDF statistics. The
    hypothesis count of an n-gram is clipped to its largest count in any
    single reference, so n-grams absent from every reference drop out.
    """
    _require_pairs(pairs, "CIDEr")
    n_docs = len(pairs)
    if n_docs < 2:
        logger.warning("CIDEr over a single pair: every IDF weight is zero")
    elif len({frozenset(p.references) for p in pairs}) == 1:
        logger.warning("CIDEr over identical reference sets: every IDF weight is zero")

    pair_scores = [0.0] * n_docs
    for n in range(1, max_n + 1):
        ref_counts = [[ngram_counts(ref, n) for ref in p.references] for p in pairs]
        document_frequency: Counter = Counter()
        for counts in ref_counts:
            document_frequency.update(set().union(*counts))
        idf = {
            gram: math.log(n_docs / df) for gram, df in document_frequency.items()
        }
        for index, (pair, counts) in enumerate(zip(pairs, ref_counts)):
            hyp_counts = ngram_counts(pair.hypothesis, n)
            if not hyp_counts:
                continue
            max_ref_counts: Counter = Counter()
            for ref in counts:
                max_ref_counts |= ref
            clipped = Counter({
                gram: min(count, max_ref_counts[gram]) for gram, count in hyp_counts.items()
            })
            # term frequency stays relative to the unclipped n-gram total
            hyp_vector = _tfidf(clipped, idf, total=sum(hyp_counts.values()))
            similarity = sum(
                _cosine(hyp_vector, _tfidf(ref, idf)) for ref in counts
            ) / len(counts)
            pair_scores[index] += similarity / max_n
    return CIDER_SCALE * sum(pair_scores) / n_docs


def align(hypothesis: Tokens, reference: Tokens) -> list[tuple[int, int]]:
    """Each hypothesis token, in order, takes the first unused identical
    reference token.
    """
    used = set()
    alignment = []
    for i, token in enumerate(hypothesis):
        for j, other in enumerate(reference):
            if j not in used and token == other:
                used.add(j)
                alignment.append((i, j))
                break
    return alignment


def count_chunks(alignment: list[tuple[int, int]]) -> int:
    chunks = 0
    previous = None
    for i, j in alignment:
        if previous is None or i != previous[0] + 1 or j != previous[1] + 1:
            chunks += 1
        previous = (i, j)
    return chunks


def meteor_lite_pair(hypothesis: Tokens, reference: Tokens) -> float:
    alignment = align(hypothesis, reference)
    matches = len(alignment)
    if matches == 0:
        return 0.0
    precision = matches / len(hypothesis)
    recall = matches / len(reference)
    f_mean = 10 * precision * recall / (recall + 9 * precision)
    penalty = METEOR_PENALTY_GAMMA * (count_chunks(alignment) / matches) ** METEOR_PENALTY_EXPONENT
    return f_mean * (1 - penalty)


def meteor_lite(pairs: Sequence[EvalPair]) -> float:
    """Exact-match METEOR: best reference per pair, mean over pairs"""
    _require_pairs(pairs, "METEOR")
    return sum(
        max(meteor_lite_pair(p.hypothesis, ref) for ref in p.references) for p in pairs
    ) / len(pairs)
