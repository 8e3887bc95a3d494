import itertools

import numpy as np
from corpus.constants import SynthLexicon
from corpus.exceptions import InvalidSynthSpec
from corpus.factories import SynthSpecFactory
from corpus.io import save_corpus_jsonl
from corpus.synth import (
    activity_clusters,
    cluster_of,
    synthesize_corpus,
)
from corpus.tests.test_io import OutputDirMixin
from django.test import SimpleTestCase


PRONOUNS = {"he", "she", "it"}


class SynthesizeCorpusTestCase(OutputDirMixin, SimpleTestCase):
    def test_deterministic(self):
        """Testing that the same SynthSpec yields bitwise-identical corpora"""
        spec = SynthSpecFactory(
            n_dialogs=2,
            n_turns_per_dialog=3,
            n_topic_clusters=1,
            coref_dependency_gap=0,
            binary_fraction=0,
            audio_event_classes=0,
            rng_seed=7,
        )
        first = synthesize_corpus(spec)
        second = synthesize_corpus(spec)
        self.assertEqual(first, second)
        a = save_corpus_jsonl(first, self.tmp_dir / "a" / "corpus.jsonl").read_bytes()
        b = save_corpus_jsonl(second, self.tmp_dir / "b" / "corpus.jsonl").read_bytes()
        self.assertEqual(a, b)

    def test_seed_changes_corpus(self):
        first = synthesize_corpus(SynthSpecFactory(n_dialogs=8, rng_seed=1))
        second = synthesize_corpus(SynthSpecFactory(n_dialogs=8, rng_seed=2))
        self.assertNotEqual(first, second)

    def test_shape(self):
        corpus = synthesize_corpus(SynthSpecFactory(n_dialogs=5, n_turns_per_dialog=4))
        self.assertEqual(len(corpus), 5)
        for dialog in corpus:
            self.assertEqual(len(dialog.turns), 4)
            self.assertTrue(dialog.caption)

    def test_clusters_disjoint(self):
        clusters = activity_clusters(8)
        for first, second in itertools.combinations(clusters, 2):
            self.assertFalse(first.content_words & second.content_words)

    def test_dialog_uses_one_cluster(self):
        clusters = activity_clusters(3)
        corpus = synthesize_corpus(
            SynthSpecFactory(n_dialogs=12, n_topic_clusters=3, rng_seed=4)
        )
        for dialog in corpus:
            label = cluster_of(dialog, clusters)
            self.assertIsNotNone(label)
            words = set(itertools.chain.from_iterable(
                turn.question + turn.answer for turn in dialog.turns
            ))
            for other, cluster in enumerate(clusters):
                if other != label:
                    self.assertFalse(words & cluster.content_words)

    def test_audio_tracks(self):
        corpus = synthesize_corpus(
            SynthSpecFactory(n_dialogs=6, audio_event_classes=4, rng_seed=3)
        )
        sounds = [tuple(s.split()) for s in SynthLexicon.SOUNDS[:4]]
        for dialog in corpus:
            track = dialog.features["audio"]
            self.assertEqual(track.dim, 4)
            np.testing.assert_array_equal(track.frames.sum(axis=1), 1.0)
            self.assertTrue(np.isin(track.frames, [0.0, 1.0]).all())
            event = int(track.frames[0].argmax())
            audio_turn = dialog.turns[-1]
            self.assertEqual(audio_turn.question, ("what", "do", "you", "hear", "?"))
            self.assertEqual(audio_turn.answer, ("i", "hear") + sounds[event])

    def test_no_audio(self):
        corpus = synthesize_corpus(SynthSpecFactory(audio_event_classes=0))
        for dialog in corpus:
            self.assertEqual(dialog.features, {})

    def test_coreference_turns(self):
        gap = 2
        corpus = synthesize_corpus(
            SynthSpecFactory(
                n_dialogs=10,
                n_turns_per_dialog=5,
                coref_dependency_gap=gap,
                binary_fraction=0.5,
                rng_seed=11,
            )
        )
        for dialog in corpus:
            for turn in dialog.turns:
                if turn.turn_index >= gap:
                    self.assertTrue(PRONOUNS & set(turn.question))
                    earlier = dialog.turns[turn.turn_index - gap]
                    # the answer names the object named g turns earlier
                    named = [w for w in turn.answer if w in earlier.answer and w not in ("the", ".", ",", "is")]
                    self.assertTrue(named)
                else:
                    self.assertFalse(PRONOUNS & set(turn.question))

    def test_binary_fraction(self):
        corpus = synthesize_corpus(
            SynthSpecFactory(n_dialogs=10, n_turns_per_dialog=4, binary_fraction=0.25)
        )
        binary = [
            turn for dialog in corpus for turn in dialog.turns
            if turn.answer[0] in ("yes", "no")
        ]
        self.assertEqual(len(binary), 10)

    def test_invalid_spec(self):
        with self.assertRaises(InvalidSynthSpec) as ctx:
            synthesize_corpus(
                SynthSpecFactory(n_turns_per_dialog=2, coref_dependency_gap=2)
            )
        self.assertEqual(ctx.exception.field, "coref_dependency_gap")
        with self.assertRaises(InvalidSynthSpec):
            synthesize_corpus(SynthSpecFactory(n_dialogs=-1))
