import json
import logging
from collections.abc import (
    Iterable,
    Sequence,
)
from dataclasses import (
    dataclass,
    field,
)
from pathlib import Path

import tablib
from corpus.types import Corpus
from metrics.binary import (
    BinaryScores,
    binary_prf,
)
from metrics.constants import (
    BLEU_MAX_N,
    REPORT_CSV_HEADERS,
)
from metrics.exceptions import (
    GenerationFormatError,
    UnmatchedHypothesisError,
)
from metrics.filters import subset_filter
from metrics.scores import (
    bleu,
    cider,
    meteor_lite,
    rouge_l,
)
from metrics.serializers import GenerationRecordSerializer
from metrics.types import EvalPair


logger = logging.getLogger(__name__)


@dataclass
class EvalReport:
    n_pairs: int
    bleu: list[float | None]
    meteor: float | None
    rouge_l: float | None
    cider: float | None
    binary: BinaryScores
    subsets: dict[str, "EvalReport"] = field(default_factory=dict)

    def to_dict(self) -> dict:
        data = {
            "n_pairs": self.n_pairs,
            "bleu": list(self.bleu),
            "meteor": self.meteor,
            "rouge_l": self.rouge_l,
            "cider": self.cider,
            "binary": self.binary.to_dict(),
        }
        if self.subsets:
            data["subsets"] = {
                name: report.to_dict() for name, report in self.subsets.items()
            }
        return data

    def to_dataset(self) -> tablib.Dataset:
        dataset = tablib.Dataset(headers=list(REPORT_CSV_HEADERS))
        dataset.append([*self.bleu, self.meteor, self.rouge_l, self.cider])
        return dataset


def score_pairs(pairs: Sequence[EvalPair]) -> EvalReport:
    if not pairs:
        return EvalReport(
            n_pairs=0,
            bleu=[None] * BLEU_MAX_N,
            meteor=None,
            rouge_l=None,
            cider=None,
            binary=binary_prf(pairs),
        )
    return EvalReport(
        n_pairs=len(pairs),
        bleu=bleu(pairs, BLEU_MAX_N),
        meteor=meteor_lite(pairs),
        rouge_l=rouge_l(pairs),
        cider=cider(pairs),
        binary=binary_prf(pairs),
    )


def evaluate_pairs(pairs: Sequence[EvalPair], subsets: Iterable[str] = ()) -> EvalReport:
    report = score_pairs(pairs)
    for name in subsets:
        subset = subset_filter(name)(pairs)
        logger.info("Subset %s: %d of %d pairs", name, len(subset), len(pairs))
        report.subsets[name] = score_pairs(subset)
    return report


def load_generations(path: str | Path) -> list[dict]:
    records = []
    seen = set()
    with Path(path).open("rt") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as e:
                raise GenerationFormatError(e.msg, line_number) from e
            serializer = GenerationRecordSerializer(data=data)
            if not serializer.is_valid():
                raise GenerationFormatError(json.dumps(serializer.errors), line_number)
            record = serializer.validated_data
            key = (record["dialog_id"], record["turn_index"])
            if key in seen:
                raise GenerationFormatError(
                    f"duplicate hypothesis for {key[0]}#{key[1]}", line_number
                )
            seen.add(key)
            records.append(dict(record))
    return records


def pairs_from_records(records: Iterable[dict], corpus: Corpus) -> list[EvalPair]:
    """Join generation records with the corpus turns they answer; the
    corpus answer is the reference.
    """
    turns = {
        (dialog.dialog_id, turn.turn_index): turn
        for dialog in corpus
        for turn in dialog.turns
    }
    pairs = []
    unmatched = []
    for record in records:
        key = (record["dialog_id"], record["turn_index"])
        turn = turns.get(key)
        if turn is None:
            unmatched.append(key)
            continue
        pairs.append(
            EvalPair(
                dialog_id=key[0],
                turn_index=key[1],
                hypothesis=tuple(record["hypothesis"].split()),
                references=(turn.answer,),
                question=turn.question,
            )
        )
    if unmatched:
        raise UnmatchedHypothesisError(unmatched)
    return pairs


def evaluate(
    hypotheses_path: str | Path, corpus: Corpus, subsets: Iterable[str] = ()
) -> EvalReport:
    pairs = pairs_from_records(load_generations(hypotheses_path), corpus)
    logger.info("Scoring %d hypotheses from %s", len(pairs), hypotheses_path)
    return evaluate_pairs(pairs, subsets)


def save_report(report: EvalReport, out_dir: str | Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    csv_path = out_dir / "report.csv"
    csv_path.write_text(report.to_dataset().export("csv"))
    return json_path, csv_path
