import numpy as np
from django.test import SimpleTestCase
from nnkit.exceptions import (
    InvalidNNArgument,
    NonFiniteError,
)
from nnkit.optim import (
    SGD,
    Adam,
    build_optimizer,
    optimizer_step,
)
from nnkit.tensor import Parameter


class SGDTestCase(SimpleTestCase):
    def test_step(self):
        p = Parameter("p", [1.0, -1.0])
        p.grad = np.array([0.5, 2.0])
        optimizer_step(SGD([p], learning_rate=0.1))
        np.testing.assert_allclose(p.value, [0.95, -1.2])
        np.testing.assert_array_equal(p.grad, [0.0, 0.0])

    def test_zero_learning_rate(self):
        p = Parameter("p", [1.0, -3.0])
        p.grad = np.array([0.5, 2.0])
        SGD([p], learning_rate=0.0).step()
        np.testing.assert_array_equal(p.value, [1.0, -3.0])

    def test_negative_learning_rate(self):
        with self.assertRaises(InvalidNNArgument):
            SGD([], learning_rate=-1.0)


class AdamTestCase(SimpleTestCase):
    def test_first_step_is_sign(self):
        p = Parameter("p", [0.0, 0.0, 0.0])
        p.grad = np.array([3.0, -0.2, 1e-3])
        Adam([p], learning_rate=1e-3).step()
        np.testing.assert_allclose(p.value, -1e-3 * np.sign([3.0, -0.2, 1e-3]), rtol=1e-4)
        self.assertEqual(p.grad.tolist(), [0.0, 0.0, 0.0])

    def test_identical_models_identical_updates(self):
        first, second = Parameter("p", [0.3, 0.1]), Parameter("p", [0.3, 0.1])
        first_opt, second_opt = Adam([first], 1e-2), Adam([second], 1e-2)
        for grad in ([1.0, -2.0], [0.5, 0.5], [-1.0, 0.0]):
            first.grad = np.array(grad)
            second.grad = np.array(grad)
            first_opt.step()
            second_opt.step()
        np.testing.assert_array_equal(first.value, second.value)
        self.assertEqual(first_opt.state.step, 3)

    def test_non_finite_gradient(self):
        p = Parameter("decoder.weight", [1.0])
        p.grad = np.array([np.nan])
        with self.assertRaises(NonFiniteError) as ctx:
            Adam([p], 1e-3).step()
        self.assertEqual(ctx.exception.name, "decoder.weight")
        self.assertEqual(p.value.tolist(), [1.0])

    def test_frozen_parameters_skipped(self):
        frozen = Parameter("embed.table", [1.0], requires_grad=False)
        optimizer = Adam([frozen], 1e-3)
        self.assertEqual(optimizer.parameters, [])
        self.assertEqual(optimizer.state.m, {})

    def test_moment_shapes(self):
        p = Parameter("p", np.zeros((2, 3)))
        optimizer = Adam([p], 1e-3)
        self.assertEqual(optimizer.state.m["p"].shape, (2, 3))
        with self.assertRaises(InvalidNNArgument):
            optimizer.load_moments(1, {"p": np.zeros(2)}, {"p": np.zeros(2)})


class BuildOptimizerTestCase(SimpleTestCase):
    def test_unknown(self):
        with self.assertRaisesMessage(InvalidNNArgument, "adam"):
            build_optimizer("rmsprop", [], 1e-3)

    def test_kinds(self):
        self.assertIsInstance(build_optimizer("sgd", [], 0.1), SGD)
        self.assertIsInstance(build_optimizer("adam", [], 0.1), Adam)
