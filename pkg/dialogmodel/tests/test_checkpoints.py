import numpy as np
from corpus.tests.test_io import OutputDirMixin
from corpus.text import Vocab
from dialogmodel.checkpoints import (
    load_checkpoint,
    save_checkpoint,
)
from dialogmodel.constants import (
    AttentionVariants,
    TopicModes,
)
from dialogmodel.exceptions import (
    CheckpointLoadError,
    ConfigMismatchError,
)
from dialogmodel.factories import random_sample
from dialogmodel.gradcheck import tiny_config
from dialogmodel.network import AVSDModel
from dialogmodel.samples import make_batch
from django.test import SimpleTestCase
from nnkit.checkpoint import (
    load_container,
    save_container,
)
from nnkit.optim import Adam


class CheckpointTestCase(OutputDirMixin, SimpleTestCase):
    def setUp(self):
        super().setUp()
        self.config = tiny_config(
            AttentionVariants.SENT_ALL_STATES_PLUS_AV, TopicModes.DECODER_FEATURE
        )
        self.model = AVSDModel(self.config)
        rng = np.random.default_rng(2)
        self.batch = make_batch(
            [random_sample(self.config, rng, n) for n in (2, 0)], self.config
        )
        self.vocab = Vocab(["<pad>", "<sos>", "<eos>", "<unk>"] + [f"w{i}" for i in range(16)])

    def test_round_trip(self):
        path = save_checkpoint(self.tmp_dir / "model.ckpt", self.model, vocab=self.vocab, epoch=3)
        checkpoint = load_checkpoint(path, expected_config=self.config)
        self.assertEqual(checkpoint.epoch, 3)
        self.assertEqual(checkpoint.vocab, self.vocab)
        self.assertEqual(checkpoint.model.config, self.config)
        self.assertEqual(
            checkpoint.model.forward_loss(self.batch).item(),
            self.model.forward_loss(self.batch).item(),
        )
        again = save_checkpoint(
            self.tmp_dir / "again.ckpt", checkpoint.model, vocab=checkpoint.vocab, epoch=3
        )
        self.assertEqual(path.read_bytes(), again.read_bytes())

    def test_optimizer_moments(self):
        optimizer = Adam(self.model.store.trainable(), 1e-3)
        for parameter in optimizer.parameters:
            parameter.grad = np.ones(parameter.shape)
        optimizer.step()
        path = save_checkpoint(self.tmp_dir / "model.ckpt", self.model, optimizer=optimizer)
        checkpoint = load_checkpoint(path)
        self.assertEqual(checkpoint.optimizer["step"], 1)
        restored = checkpoint.restore_optimizer("adam", 1e-3)
        self.assertEqual(restored.state.step, 1)
        np.testing.assert_array_equal(
            restored.state.v["output.weight"], optimizer.state.v["output.weight"]
        )

    def test_tampered_shape(self):
        path = save_checkpoint(self.tmp_dir / "model.ckpt", self.model)
        header, tensors = load_container(path)
        tensors["output.bias"] = np.zeros(3)
        save_container(path, header, tensors)
        with self.assertRaisesMessage(CheckpointLoadError, "output.bias"):
            load_checkpoint(path)

    def test_config_mismatch(self):
        path = save_checkpoint(self.tmp_dir / "model.ckpt", self.model)
        other = tiny_config(AttentionVariants.WORD_ALL_STATES, TopicModes.DECODER_FEATURE)
        with self.assertRaises(ConfigMismatchError) as ctx:
            load_checkpoint(path, expected_config=other)
        self.assertEqual(list(ctx.exception.fields), ["attention_variant"])

    def test_wrong_format(self):
        path = save_container(self.tmp_dir / "other.ckpt", {"format": "other"}, {})
        with self.assertRaises(CheckpointLoadError):
            load_checkpoint(path)

    def test_missing_file(self):
        with self.assertRaises(CheckpointLoadError):
            load_checkpoint(self.tmp_dir / "absent.ckpt")
