import numpy as np
from corpus.text import Vocab
from dialogmodel.config import DecodeOptions
from dialogmodel.constants import (
    AttentionVariants,
    DecodeModes,
    TopicModes,
)
from dialogmodel.exceptions import InvalidModelArgument
from dialogmodel.factories import (
    DecodeOptionsFactory,
    random_sample,
)
from dialogmodel.generation import (
    Hypothesis,
    decode_sample,
    generate,
    ranked_tokens,
)
from dialogmodel.gradcheck import tiny_config
from dialogmodel.network import AVSDModel
from django.test import SimpleTestCase


class RankedTokensTestCase(SimpleTestCase):
    def test_ties_to_lowest_id(self):
        log_probs = np.log(np.array([0.1, 0.3, 0.3, 0.3]))
        self.assertEqual(ranked_tokens(log_probs, 2).tolist(), [1, 2])

    def test_length_normalized_score(self):
        hypothesis = Hypothesis(tokens=[4, 5, 6], log_prob=-2.0, finished=True)
        self.assertEqual(hypothesis.length, 4)
        self.assertEqual(hypothesis.score(1.0), -0.5)
        self.assertEqual(hypothesis.score(0.0), -2.0)


class GenerateTestCase(SimpleTestCase):
    def setUp(self):
        self.config = tiny_config(AttentionVariants.SENT_ALL_STATES, TopicModes.NONE)
        self.model = AVSDModel(self.config)
        rng = np.random.default_rng(4)
        self.samples = [random_sample(self.config, rng, n) for n in (0, 1, 2, 2)]
        tokens = ["<pad>", "<sos>", "<eos>", "<unk>"] + [f"w{i}" for i in range(16)]
        self.vocab = Vocab(tokens)

    def test_width_one_beam_is_greedy(self):
        greedy = DecodeOptionsFactory(mode=DecodeModes.GREEDY, max_length=6)
        beam = DecodeOptionsFactory(mode=DecodeModes.BEAM, beam_width=1, max_length=6)
        for sample in self.samples:
            self.assertEqual(
                decode_sample(self.model, sample, greedy).tokens,
                decode_sample(self.model, sample, beam).tokens,
            )

    def test_max_length_one(self):
        for mode in (DecodeModes.GREEDY, DecodeModes.BEAM):
            options = DecodeOptionsFactory(mode=mode, max_length=1)
            for sample in self.samples:
                self.assertLessEqual(len(decode_sample(self.model, sample, options).tokens), 1)

    def test_beam_width_zero(self):
        with self.assertRaises(InvalidModelArgument):
            decode_sample(
                self.model, self.samples[0], DecodeOptions(mode=DecodeModes.BEAM, beam_width=0)
            )

    def test_reserved_tokens_stripped(self):
        options = DecodeOptionsFactory(mode=DecodeModes.BEAM, beam_width=3, max_length=5)
        for sample in self.samples:
            tokens = decode_sample(self.model, sample, options).tokens
            self.assertNotIn(1, tokens)
            self.assertNotIn(2, tokens)

    def test_deterministic(self):
        options = DecodeOptionsFactory(mode=DecodeModes.BEAM, beam_width=3, max_length=6)
        first = generate(self.model, self.samples[3], self.vocab, options)
        second = generate(self.model, self.samples[3], self.vocab, options)
        self.assertEqual(first, second)

    def test_record_with_attention(self):
        options = DecodeOptionsFactory(max_length=4, dump_attention=True)
        generation = generate(self.model, self.samples[2], self.vocab, options)
        record = generation.to_record()
        self.assertEqual(
            sorted(record),
            ["attention_weights", "dialog_id", "hypothesis", "question", "reference", "turn_index"],
        )
        self.assertEqual(len(record["attention_weights"]), len(generation.hypothesis))
        for weights in record["attention_weights"]:
            self.assertEqual(len(weights), 2)
            self.assertAlmostEqual(sum(weights), 1.0, delta=1e-9)

    def test_record_without_attention(self):
        generation = generate(
            self.model, self.samples[0], self.vocab, DecodeOptionsFactory(max_length=3)
        )
        self.assertNotIn("attention_weights", generation.to_record())
