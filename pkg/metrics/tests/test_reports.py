import json

from corpus.factories import (
    CorpusFactory,
    build_qa_dialog,
)
from corpus.tests.test_io import OutputDirMixin
from corpus.types import Corpus
from django.test import SimpleTestCase
from metrics.constants import Subsets
from metrics.exceptions import (
    GenerationFormatError,
    UnmatchedHypothesisError,
)
from metrics.reports import (
    evaluate,
    evaluate_pairs,
    load_generations,
    pairs_from_records,
    save_report,
)
from metrics.serializers import EvaluateOptionsSerializer


def generation_records(corpus: Corpus, hypothesis=None) -> list[dict]:
    return [
        {
            "dialog_id": dialog.dialog_id,
            "turn_index": turn.turn_index,
            "question": " ".join(turn.question),
            "reference": " ".join(turn.answer),
            "hypothesis": " ".join(turn.answer) if hypothesis is None else hypothesis,
        }
        for dialog in corpus
        for turn in dialog.turns
    ]


class EvaluateTestCase(OutputDirMixin, SimpleTestCase):
    def setUp(self):
        super().setUp()
        self.corpus = CorpusFactory()

    def write_generations(self, records: list[dict], name="generations.jsonl"):
        return self.write_bytes(
            name, "".join(json.dumps(record) + "\n" for record in records).encode()
        )

    def test_perfect_hypotheses(self):
        path = self.write_generations(generation_records(self.corpus))
        report = evaluate(path, self.corpus, [Subsets.COREFERENCE, Subsets.AUDIO, Subsets.BINARY])
        self.assertEqual(report.n_pairs, 6)
        for score in report.bleu:
            self.assertAlmostEqual(score, 1.0, delta=1e-12)
        self.assertAlmostEqual(report.rouge_l, 1.0, delta=1e-12)
        self.assertAlmostEqual(report.cider, 10.0, delta=1e-9)
        self.assertEqual(report.binary.f1, 1.0)
        self.assertEqual(list(report.subsets), ["coreference", "audio", "binary"])
        self.assertEqual(report.subsets["coreference"].n_pairs, 6)
        self.assertEqual(report.subsets["audio"].n_pairs, 0)
        self.assertIsNone(report.subsets["audio"].cider)
        self.assertEqual(report.subsets["audio"].binary.support, 0)

    def test_every_report_has_binary_block(self):
        report = evaluate_pairs(
            pairs_from_records(generation_records(self.corpus, "no"), self.corpus),
            [Subsets.BINARY],
        )
        data = report.to_dict()
        self.assertEqual(data["binary"]["recall"], 0.0)
        self.assertEqual(data["subsets"]["binary"]["binary"]["support"], 6)

    def test_permutation_invariant(self):
        records = generation_records(self.corpus, "yes , thing")
        first = evaluate(self.write_generations(records, "a.jsonl"), self.corpus)
        second = evaluate(self.write_generations(records[::-1], "b.jsonl"), self.corpus)
        self.assertEqual(first.bleu, second.bleu)
        self.assertAlmostEqual(first.cider, second.cider, delta=1e-12)
        self.assertAlmostEqual(first.meteor, second.meteor, delta=1e-12)

    def test_unmatched_hypotheses(self):
        records = generation_records(self.corpus)
        records.append({**records[0], "dialog_id": "missing"})
        with self.assertRaises(UnmatchedHypothesisError) as ctx:
            evaluate(self.write_generations(records), self.corpus)
        self.assertEqual(ctx.exception.keys, [("missing", 0)])
        self.assertIn("missing#0", str(ctx.exception))

    def test_references_come_from_corpus(self):
        corpus = Corpus((build_qa_dialog("d0", [("is it on ?", "yes it is")]),))
        records = [
            {
                "dialog_id": "d0",
                "turn_index": 0,
                "question": "",
                "reference": "stale",
                "hypothesis": "yes it is",
            }
        ]
        pairs = pairs_from_records(records, corpus)
        self.assertEqual(pairs[0].references, (("yes", "it", "is"),))
        self.assertEqual(pairs[0].question, ("is", "it", "on", "?"))

    def test_empty_hypothesis(self):
        path = self.write_generations(generation_records(self.corpus, ""))
        report = evaluate(path, self.corpus)
        self.assertEqual(report.bleu, [0.0] * 4)
        self.assertEqual(report.rouge_l, 0.0)

    def test_save_report(self):
        path = self.write_generations(generation_records(self.corpus))
        report = evaluate(path, self.corpus, [Subsets.BINARY])
        json_path, csv_path = save_report(report, self.tmp_dir / "report")
        self.assertEqual(
            csv_path.read_text().splitlines()[0],
            "Bleu1,Bleu2,Bleu3,Bleu4,Meteor,Rouge,CIDEr",
        )
        self.assertEqual(len(csv_path.read_text().splitlines()), 2)
        self.assertEqual(json.loads(json_path.read_text()), report.to_dict())
        again, _ = save_report(report, self.tmp_dir / "again")
        self.assertEqual(json_path.read_bytes(), again.read_bytes())


class LoadGenerationsTestCase(OutputDirMixin, SimpleTestCase):
    def test_malformed_line(self):
        path = self.write_bytes("g.jsonl", b'{"dialog_id": "a"}\n{oops\n')
        with self.assertRaises(GenerationFormatError) as ctx:
            load_generations(path)
        self.assertEqual(ctx.exception.line_number, 1)

    def test_unknown_field(self):
        record = {
            "dialog_id": "a",
            "turn_index": 0,
            "question": "q",
            "reference": "r",
            "hypothesis": "h",
            "score": 1.0,
        }
        path = self.write_bytes("g.jsonl", (json.dumps(record) + "\n").encode())
        with self.assertRaisesMessage(GenerationFormatError, "score"):
            load_generations(path)

    def test_duplicates(self):
        record = {
            "dialog_id": "a",
            "turn_index": 0,
            "question": "q",
            "reference": "r",
            "hypothesis": "h",
        }
        line = json.dumps(record) + "\n"
        path = self.write_bytes("g.jsonl", (line * 2).encode())
        with self.assertRaisesMessage(GenerationFormatError, "Line 2"):
            load_generations(path)

    def test_attention_weights_allowed(self):
        record = {
            "dialog_id": "a",
            "turn_index": 0,
            "question": "q",
            "reference": "r",
            "hypothesis": "",
            "attention_weights": [[0.5, 0.5]],
        }
        path = self.write_bytes("g.jsonl", (json.dumps(record) + "\n").encode())
        self.assertEqual(load_generations(path)[0]["attention_weights"], [[0.5, 0.5]])


class EvaluateOptionsSerializerTestCase(SimpleTestCase):
    def test_subsets(self):
        serializer = EvaluateOptionsSerializer(data={"subsets": ["binary", "audio", "binary"]})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data["subsets"], ["binary", "audio"])

    def test_invalid_subset(self):
        serializer = EvaluateOptionsSerializer(data={"subsets": ["video"]})
        self.assertFalse(serializer.is_valid())
        self.assertIn("subsets", serializer.errors)
