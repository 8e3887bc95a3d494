import json
from io import StringIO

import mock
import pytest
from corpus.io import load_corpus_jsonl
from corpus.synth import activity_clusters
from corpus.tests.test_io import OutputDirMixin
from dialogmodel.constants import (
    BEST_CHECKPOINT_NAME,
    CHECKPOINTS_DIRNAME,
)
from dialogmodel.gradcheck import combinations
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import (
    SimpleTestCase,
    override_settings,
)
from experiments.constants import (
    COMPARISON_HEADERS,
    GRADCHECK_HEADERS,
    TOP_WORDS_HEADERS,
    Measures,
    RunFiles,
)
from metrics.constants import REPORT_CSV_HEADERS
from nnkit.gradcheck import GradCheckReport
from topics.lda import load_topic_model


TINY_SYNTH = {
    "n_dialogs": 6,
    "n_turns_per_dialog": 2,
    "n_topic_clusters": 2,
    "binary_fraction": 0.5,
    "audio_event_classes": 2,
}
TINY_MODEL = {
    "embedding_dim": 8,
    "word_hidden_dim": 8,
    "sentence_hidden_dim": 8,
    "question_hidden_dim": 8,
    "decoder_hidden_dim": 8,
    "modality_projection_dim": 4,
    "av_dim": 4,
    "topic_embedding_dim": 4,
}
TINY_TRAINING = {"epochs": 2, "batch_size": 8, "learning_rate": 0.01}


class CommandMixin(OutputDirMixin):
    def run_command(self, name: str, config: dict | None = None, **options) -> str:
        stdout = StringIO()
        if config is not None:
            options["config"] = str(self.write_json(f"{name}-config.json", config))
        call_command(name, stdout=stdout, **options)
        return stdout.getvalue()

    def synth(self, name: str = "synth", **spec) -> str:
        out = self.tmp_dir / name
        self.run_command("synth", {"spec": {**TINY_SYNTH, **spec}}, out=str(out))
        return str(out / "corpus.jsonl")


class SynthCommandTestCase(CommandMixin, SimpleTestCase):
    def test_identical_bytes_for_one_seed(self):
        first = self.tmp_dir / "first"
        second = self.tmp_dir / "second"
        config = {"spec": TINY_SYNTH, "rng_seed": 5}
        self.run_command("synth", config, out=str(first))
        self.run_command("synth", config, out=str(second))

        def files(root):
            return {
                str(path.relative_to(root)): path.read_bytes()
                for path in root.rglob("*")
                if path.is_file() and path.name != RunFiles.CONFIG
            }

        self.assertTrue(files(first))
        self.assertEqual(files(first), files(second))

    def test_seed_flag(self):
        out = self.tmp_dir / "synth"
        stdout = self.run_command("synth", {"spec": TINY_SYNTH}, out=str(out), seed=9)
        self.assertIn("Wrote 6 dialogs, 12 turns", stdout)
        echo = json.loads((out / RunFiles.CONFIG).read_text())
        self.assertEqual(echo["rng_seed"], 9)
        self.assertEqual(echo["spec"]["n_dialogs"], 6)
        self.assertNotIn("force", echo)
        self.assertEqual(len(load_corpus_jsonl(out / "corpus.jsonl")), 6)

    def test_refuses_non_empty_output(self):
        out = self.tmp_dir / "synth"
        stale = self.write_bytes("synth/stale.txt", b"old")
        with self.assertRaisesRegex(CommandError, "--force"):
            self.run_command("synth", {"spec": TINY_SYNTH}, out=str(out))
        self.assertTrue(stale.exists())

        with self.assertLogs("experiments.services", level="WARNING"):
            self.run_command("synth", {"spec": TINY_SYNTH}, out=str(out), force=True)
        self.assertFalse(stale.exists())
        self.assertTrue((out / "corpus.jsonl").exists())

    def test_invalid_spec_names_field(self):
        out = self.tmp_dir / "synth"
        with self.assertRaisesRegex(CommandError, "spec.n_dialogs"):
            self.run_command("synth", {"spec": {"n_dialogs": -1}}, out=str(out))
        self.assertFalse(out.exists())

    def test_unknown_key(self):
        with self.assertRaisesRegex(CommandError, "n_dialog: Unknown field"):
            self.run_command(
                "synth", {"spec": {"n_dialog": 3}}, out=str(self.tmp_dir / "synth")
            )

    def test_missing_config(self):
        with self.assertRaisesRegex(CommandError, "does not exist"):
            call_command(
                "synth",
                config=str(self.tmp_dir / "nope.json"),
                out=str(self.tmp_dir / "synth"),
                stdout=StringIO(),
            )

    def test_config_not_json(self):
        path = self.write_bytes("config.json", b"{spec:")
        with self.assertRaisesRegex(CommandError, "not valid JSON"):
            call_command(
                "synth", config=str(path), out=str(self.tmp_dir / "synth"), stdout=StringIO()
            )


class TopicsCommandTestCase(CommandMixin, SimpleTestCase):
    def setUp(self):
        super().setUp()
        self.corpus = self.synth()

    def test_single_topic(self):
        out = self.tmp_dir / "topics"
        stdout = self.run_command(
            "topics",
            {"params": {"K": 1, "n_iterations": 5, "top_n": 3}},
            corpus=self.corpus,
            out=str(out),
        )
        self.assertIn("standard", stdout)
        self.assertIn("topic 0:", stdout)
        model = load_topic_model(out / RunFiles.TOPIC_MODEL)
        self.assertEqual(model.K, 1)
        lines = (out / RunFiles.TOP_WORDS).read_text().splitlines()
        self.assertEqual(lines[0], ",".join(TOP_WORDS_HEADERS))
        self.assertEqual(len(lines), 4)
        self.assertTrue(all(line.startswith("0,") for line in lines[1:]))

    def test_guided_from_seeds_file(self):
        clusters = activity_clusters(2)
        seeds = self.write_json(
            "seeds.json",
            {str(index): [cluster.verbs[0]] for index, cluster in enumerate(clusters)},
        )
        out = self.tmp_dir / "topics"
        stdout = self.run_command(
            "topics",
            {"params": {"K": 2, "n_iterations": 5}},
            corpus=self.corpus,
            seeds=str(seeds),
            out=str(out),
        )
        self.assertIn("guided", stdout)
        echo = json.loads((out / RunFiles.CONFIG).read_text())
        self.assertEqual(echo["params"]["seed_sets"]["0"], [clusters[0].verbs[0]])

    def test_same_seed_same_model(self):
        config = {"params": {"K": 2, "n_iterations": 5}, "rng_seed": 1}
        self.run_command("topics", config, corpus=self.corpus, out=str(self.tmp_dir / "a"))
        self.run_command("topics", config, corpus=self.corpus, out=str(self.tmp_dir / "b"))
        self.assertEqual(
            (self.tmp_dir / "a" / RunFiles.TOPIC_MODEL).read_bytes(),
            (self.tmp_dir / "b" / RunFiles.TOPIC_MODEL).read_bytes(),
        )


class TrainGenerateEvaluateTestCase(CommandMixin, SimpleTestCase):
    def setUp(self):
        super().setUp()
        self.corpus = self.synth()
        self.train_out = self.tmp_dir / "train"
        self.train_stdout = self.run_command(
            "train",
            {"model": TINY_MODEL, "training": TINY_TRAINING},
            corpus=self.corpus,
            out=str(self.train_out),
        )
        self.checkpoint = self.train_out / CHECKPOINTS_DIRNAME / BEST_CHECKPOINT_NAME

    def generate(self, name: str, decode: dict | None = None, **options) -> list[dict]:
        out = self.tmp_dir / name
        self.run_command(
            "generate",
            {"decode": decode or {}},
            checkpoint=str(self.checkpoint),
            corpus=self.corpus,
            out=str(out),
            **options,
        )
        lines = (out / RunFiles.GENERATIONS).read_text().splitlines()
        return [json.loads(line) for line in lines]

    def test_train_outputs(self):
        self.assertIn("Best epoch", self.train_stdout)
        self.assertTrue(self.checkpoint.exists())
        self.assertTrue((self.train_out / RunFiles.VOCAB).exists())
        curve = (self.train_out / RunFiles.LOSS_CURVE).read_text().splitlines()
        self.assertEqual(len(curve), 1 + TINY_TRAINING["epochs"])

    def test_generate_every_turn(self):
        records = self.generate("generate")
        self.assertEqual(len(records), 12)
        self.assertEqual(
            set(records[0]), {"dialog_id", "turn_index", "question", "reference", "hypothesis"}
        )

    def test_width_one_beam_is_greedy(self):
        greedy = self.generate("greedy", {"mode": "greedy"})
        beam = self.generate("beam", {"mode": "beam", "beam_width": 1})
        self.assertEqual(
            [record["hypothesis"] for record in greedy],
            [record["hypothesis"] for record in beam],
        )

    def test_dump_attention(self):
        records = self.generate("attention", dump_attention=True)
        self.assertTrue(all("attention_weights" in record for record in records))

    def test_evaluate(self):
        self.generate("generate")
        out = self.tmp_dir / "evaluate"
        stdout = self.run_command(
            "evaluate",
            {},
            hypotheses=str(self.tmp_dir / "generate" / RunFiles.GENERATIONS),
            corpus=self.corpus,
            subset=["audio", "coreference", "audio"],
            out=str(out),
        )
        self.assertIn(" ".join(REPORT_CSV_HEADERS), stdout)
        report = json.loads((out / "report.json").read_text())
        self.assertEqual(report["n_pairs"], 12)
        self.assertEqual(sorted(report["subsets"]), ["audio", "coreference"])
        self.assertEqual(report["subsets"]["audio"]["n_pairs"], 6)

    def test_evaluate_unmatched(self):
        hypotheses = self.write_bytes(
            "generations.jsonl",
            json.dumps(
                {
                    "dialog_id": "missing",
                    "turn_index": 0,
                    "question": "",
                    "reference": "",
                    "hypothesis": "yes",
                }
            ).encode("utf-8"),
        )
        with self.assertRaisesRegex(CommandError, "missing#0"):
            self.run_command(
                "evaluate",
                {},
                hypotheses=str(hypotheses),
                corpus=self.corpus,
                out=str(self.tmp_dir / "evaluate"),
            )

    def test_resume_reproduces_loss_curve(self):
        config = {"model": TINY_MODEL, "training": {**TINY_TRAINING, "epochs": 3}}
        straight = self.tmp_dir / "straight"
        resumed = self.tmp_dir / "resumed"
        self.run_command("train", config, corpus=self.corpus, out=str(straight))
        self.run_command(
            "train",
            config,
            corpus=self.corpus,
            resume=str(self.train_out / CHECKPOINTS_DIRNAME / "epoch-0002.ckpt"),
            out=str(resumed),
        )
        self.assertEqual(
            (straight / RunFiles.LOSS_CURVE).read_bytes(),
            (resumed / RunFiles.LOSS_CURVE).read_bytes(),
        )

    def test_resume_config_mismatch(self):
        with self.assertRaisesRegex(CommandError, "embedding_dim"):
            self.run_command(
                "train",
                {"model": {**TINY_MODEL, "embedding_dim": 6}, "training": TINY_TRAINING},
                corpus=self.corpus,
                resume=str(self.checkpoint),
                out=str(self.tmp_dir / "resumed"),
            )

    def test_topic_mode_needs_topic_model(self):
        with self.assertRaisesRegex(CommandError, "topic"):
            self.run_command(
                "train",
                {
                    "model": {**TINY_MODEL, "topic_mode": "decoder_feature"},
                    "training": TINY_TRAINING,
                },
                corpus=self.corpus,
                out=str(self.tmp_dir / "topics-train"),
            )


def fake_gradients(failing=()):
    def check(attention_variant, topic_mode, **kwargs):
        error = 1.0 if (attention_variant, topic_mode) in failing else 1e-8
        return GradCheckReport(
            max_relative_error=error,
            worst_parameter="decoder.W",
            worst_index=(0, 1),
            analytic=1.0,
            numeric=1.0 + error,
            n_coordinates=12,
        )

    return check


@override_settings(CELERY_TASK_ALWAYS_EAGER=True)
class GradcheckCommandTestCase(CommandMixin, SimpleTestCase):
    @mock.patch("experiments.tasks.check_model_gradients", side_effect=fake_gradients())
    def test_all_pass(self, check):
        out = self.tmp_dir / "gradcheck"
        stdout = self.run_command("gradcheck", {}, out=str(out))
        self.assertEqual(check.call_count, len(combinations()))
        self.assertIn(",".join(GRADCHECK_HEADERS), stdout)
        self.assertIn(f"All {len(combinations())} combinations passed", stdout)
        report = json.loads((out / RunFiles.GRADCHECK).read_text())
        self.assertEqual(len(report["combinations"]), len(combinations()))
        self.assertTrue(all(row["passed"] for row in report["combinations"]))

    def test_failure_names_combination(self):
        variant, mode = combinations()[0]
        with mock.patch(
            "experiments.tasks.check_model_gradients",
            side_effect=fake_gradients(failing={(variant, mode)}),
        ):
            with self.assertRaisesRegex(CommandError, f"{variant}/{mode}"):
                self.run_command("gradcheck", {}, out=str(self.tmp_dir / "gradcheck"))
        report = json.loads((self.tmp_dir / "gradcheck" / RunFiles.GRADCHECK).read_text())
        self.assertFalse(report["combinations"][0]["passed"])

    @mock.patch("experiments.tasks.check_model_gradients", side_effect=fake_gradients())
    def test_flags_reach_tasks(self, check):
        self.run_command("gradcheck", {"eps": 1e-4}, inject_fault=True)
        kwargs = check.call_args.kwargs
        self.assertTrue(kwargs["inject_fault"])
        self.assertEqual(kwargs["eps"], 1e-4)


@pytest.mark.slow
@override_settings(CELERY_TASK_ALWAYS_EAGER=True)
class GradcheckRealTestCase(CommandMixin, SimpleTestCase):
    def test_clean_model_passes(self):
        stdout = self.run_command("gradcheck", {})
        self.assertIn("combinations passed", stdout)

    def test_injected_fault_fails(self):
        with self.assertRaises(CommandError):
            self.run_command("gradcheck", {}, inject_fault=True)


COMPARE_CONFIG = {
    "n_seeds": 1,
    "synth": {"n_dialogs": 8, "n_turns_per_dialog": 3},
    "topics": {"n_iterations": 5},
    "model": TINY_MODEL,
    "training": {"epochs": 1, "batch_size": 8},
}


@override_settings(CELERY_TASK_ALWAYS_EAGER=True)
class CompareCommandTestCase(CommandMixin, SimpleTestCase):
    def test_audio_preset(self):
        out = self.tmp_dir / "compare"
        stdout = self.run_command("compare", COMPARE_CONFIG, preset="audio", out=str(out))
        self.assertIn("reference arm no_audio", stdout)
        rows = (out / RunFiles.COMPARISON).read_text().splitlines()
        self.assertEqual(rows[0], ",".join(COMPARISON_HEADERS))
        self.assertEqual([row.split(",")[0] for row in rows[1:]], ["no_audio", "audio"])
        summary = json.loads((out / RunFiles.SUMMARY).read_text())
        self.assertEqual(summary["seeds"], [0])
        self.assertIsNotNone(summary["arms"]["audio"]["means"][Measures.VAL_LOSS])
        self.assertIsNone(summary["arms"]["audio"]["means"][Measures.TOPIC_PURITY])

    def test_topics_preset_measures_purity(self):
        out = self.tmp_dir / "compare"
        with self.assertLogs("experiments.arms", level="WARNING"):
            self.run_command("compare", COMPARE_CONFIG, preset="topics", out=str(out))
        summary = json.loads((out / RunFiles.SUMMARY).read_text())
        self.assertIsNone(summary["arms"]["no_topics"]["means"][Measures.TOPIC_PURITY])
        purity = summary["arms"]["guided_lda"]["means"][Measures.TOPIC_PURITY]
        self.assertGreaterEqual(purity, 0.0)
        self.assertLessEqual(purity, 1.0)

    def test_preset_required(self):
        with self.assertRaisesRegex(CommandError, "preset"):
            self.run_command("compare", COMPARE_CONFIG, out=str(self.tmp_dir / "compare"))


@pytest.mark.slow
@override_settings(CELERY_TASK_ALWAYS_EAGER=True)
class AudioComparisonTestCase(CommandMixin, SimpleTestCase):
    def test_audio_track_lowers_audio_loss(self):
        out = self.tmp_dir / "compare"
        config = {
            "n_seeds": 3,
            "synth": {"n_dialogs": 40, "n_turns_per_dialog": 2},
            "model": TINY_MODEL,
            "training": {"epochs": 15, "batch_size": 8, "learning_rate": 0.02},
        }
        self.run_command("compare", config, preset="audio", out=str(out))
        summary = json.loads((out / RunFiles.SUMMARY).read_text())
        audio = summary["arms"]["audio"]
        no_audio = summary["arms"]["no_audio"]
        self.assertLess(
            audio["means"][Measures.AUDIO_VAL_LOSS],
            no_audio["means"][Measures.AUDIO_VAL_LOSS],
        )
        self.assertGreaterEqual(audio["wins"][Measures.AUDIO_VAL_LOSS], 2)
