"""Tensors and the tape that records one forward pass.

Ops record a node on the active tape when any input requires a gradient.
Without an active tape they only compute values, which is how generation
and finite-difference checks run.
"""
import contextvars
from collections.abc import Callable
from dataclasses import (
    dataclass,
    field,
)
from typing import Any

import numpy as np
from nnkit.exceptions import (
    NonFiniteError,
    TapeUsageError,
)


# op name -> rule(ctx, inputs, output_grads) -> one grad (or None) per input
BACKWARD_RULES: dict[str, Callable] = {}


def backward_rule(op: str):
    def decorator(rule: Callable) -> Callable:
        BACKWARD_RULES[op] = rule
        return rule

    return decorator


class Tensor:
    def __init__(self, value, requires_grad: bool = False, name: str | None = None):
        self.value = np.array(value, dtype=np.float64)
        self.requires_grad = requires_grad
        self.name = name
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    def zero_grad(self):
        self.grad = np.zeros_like(self.value)

    def item(self) -> float:
        return float(self.value.reshape(()))

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Tensor{label} shape={self.shape}>"


class Parameter(Tensor):
    """Named trainable tensor; its grad is accumulated by Tape.backward"""

    def __init__(self, name: str, value, requires_grad: bool = True):
        super().__init__(value, requires_grad=requires_grad, name=name)
        self.zero_grad()


def as_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def check_finite(value: np.ndarray, name: str):
    if not np.isfinite(value).all():
        raise NonFiniteError(f"{name} produced a non-finite value", name)


@dataclass
class Node:
    op: str
    inputs: tuple[Tensor, ...]
    outputs: tuple[Tensor, ...]
    ctx: dict[str, Any] = field(default_factory=dict)


_current_tape: contextvars.ContextVar["Tape | None"] = contextvars.ContextVar(
    "nnkit_tape", default=None
)


def current_tape() -> "Tape | None":
    return _current_tape.get()


class Tape:
    """Operation graph of one forward pass.

    Use as a context manager; `backward` may run once until `reset`.
    """

    def __init__(self):
        self.nodes: list[Node] = []
        self.consumed = False
        self._token = None

    def __enter__(self) -> "Tape":
        self._token = _current_tape.set(self)
        return self

    def __exit__(self, *exc_info):
        _current_tape.reset(self._token)
        self._token = None

    def record(self, node: Node):
        if self.consumed:
            raise TapeUsageError("Tape already ran backward; reset it first")
        self.nodes.append(node)

    def reset(self):
        self.nodes = []
        self.consumed = False

    def backward(self, loss: Tensor):
        if self.consumed:
            raise TapeUsageError("backward called twice on the same tape")
        if loss.value.size != 1:
            raise TapeUsageError(
                f"backward needs a scalar loss, got shape {loss.shape}"
            )
        self.consumed = True

        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.value)}
        produced: set[int] = set()
        leaves: dict[int, Tensor] = {}
        for node in self.nodes:
            produced.update(id(output) for output in node.outputs)
        if id(loss) not in produced and loss.requires_grad:
            leaves[id(loss)] = loss

        # creation order is a topological order
        for node in reversed(self.nodes):
            output_grads = [grads.pop(id(output), None) for output in node.outputs]
            if all(grad is None for grad in output_grads):
                continue
            output_grads = [
                np.zeros_like(output.value) if grad is None else grad
                for output, grad in zip(node.outputs, output_grads)
            ]
            input_grads = BACKWARD_RULES[node.op](
                node.ctx, node.inputs, output_grads
            )
            for tensor, grad in zip(node.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                check_finite(grad, f"gradient of {node.op}")
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + grad
                else:
                    grads[key] = grad
                if key not in produced:
                    leaves[key] = tensor

        for key, tensor in leaves.items():
            grad = grads.get(key)
            if grad is None:
                continue
            if tensor.grad is None:
                tensor.grad = np.zeros_like(tensor.value)
            tensor.grad += grad
        self.nodes = []


def backward(tape: Tape, loss: Tensor):
    tape.backward(loss)
