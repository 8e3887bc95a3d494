from collections.abc import Iterator

import numpy as np
from nnkit import ops
from nnkit.constants import (
    FORGET_BIAS_INIT,
    LSTM_GATES,
)
from nnkit.exceptions import (
    DuplicateParameterName,
    InvalidNNArgument,
    ShapeError,
)
from nnkit.tensor import (
    Parameter,
    Tensor,
)


def glorot_uniform(
    rng: np.random.Generator, fan_in: int, fan_out: int, shape: tuple[int, ...]
) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class ParameterStore:
    """Named parameters of one model, in creation order"""

    def __init__(self, rng_seed: int | list[int] = 0):
        self.rng = np.random.default_rng(rng_seed)
        self.parameters: dict[str, Parameter] = {}

    def __iter__(self) -> Iterator[Parameter]:
        return iter(self.parameters.values())

    def __len__(self) -> int:
        return len(self.parameters)

    def __getitem__(self, name: str) -> Parameter:
        return self.parameters[name]

    def __contains__(self, name: str) -> bool:
        return name in self.parameters

    def add(self, name: str, value: np.ndarray, requires_grad: bool = True) -> Parameter:
        if name in self.parameters:
            raise DuplicateParameterName(f"Parameter {name} already exists")
        parameter = Parameter(name, value, requires_grad=requires_grad)
        self.parameters[name] = parameter
        return parameter

    def matrix(self, name: str, fan_in: int, fan_out: int) -> Parameter:
        return self.add(
            name, glorot_uniform(self.rng, fan_in, fan_out, (fan_in, fan_out))
        )

    def bias(self, name: str, size: int, fill: float = 0.0) -> Parameter:
        return self.add(name, np.full(size, fill))

    def trainable(self) -> list[Parameter]:
        return [parameter for parameter in self if parameter.requires_grad]

    def zero_grad(self):
        for parameter in self:
            parameter.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: parameter.value for name, parameter in self.parameters.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]):
        missing = sorted(set(self.parameters) - set(state))
        unexpected = sorted(set(state) - set(self.parameters))
        if missing or unexpected:
            raise InvalidNNArgument(
                f"State mismatch: missing {missing}, unexpected {unexpected}"
            )
        for name, parameter in self.parameters.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != parameter.shape:
                raise ShapeError(f"parameter {name}", parameter.shape, value.shape)
            parameter.value = value.copy()
            parameter.zero_grad()


class Linear:
    def __init__(
        self, store: ParameterStore, name: str, in_dim: int, out_dim: int, bias: bool = True
    ):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = store.matrix(f"{name}.weight", in_dim, out_dim)
        self.bias = store.bias(f"{name}.bias", out_dim) if bias else None

    def __call__(self, x) -> Tensor:
        out = ops.matmul(x, self.weight)
        if self.bias is not None:
            out = ops.add(out, self.bias)
        return out


class Embedding:
    def __init__(
        self,
        store: ParameterStore,
        name: str,
        vocab_size: int,
        dim: int,
        pretrained: np.ndarray | None = None,
        trainable: bool = True,
    ):
        if pretrained is not None:
            pretrained = np.asarray(pretrained, dtype=np.float64)
            if pretrained.shape != (vocab_size, dim):
                raise ShapeError("embedding", (vocab_size, dim), pretrained.shape)
            value = pretrained.copy()
        else:
            value = glorot_uniform(store.rng, vocab_size, dim, (vocab_size, dim))
        self.table = store.add(f"{name}.table", value, requires_grad=trainable)

    def __call__(self, ids) -> Tensor:
        return ops.row_lookup(self.table, ids)


class LSTM:
    """LSTM over padded (batch, time, features) input with a (batch, time) mask"""

    def __init__(self, store: ParameterStore, name: str, in_dim: int, hidden_dim: int):
        self.in_dim = in_dim
        self.hidden_dim = hidden_dim
        W = [store.matrix(f"{name}.W_{gate}", in_dim, hidden_dim) for gate in LSTM_GATES]
        U = [
            store.matrix(f"{name}.U_{gate}", hidden_dim, hidden_dim)
            for gate in LSTM_GATES
        ]
        b = [
            store.bias(
                f"{name}.b_{gate}",
                hidden_dim,
                fill=FORGET_BIAS_INIT if gate == "f" else 0.0,
            )
            for gate in LSTM_GATES
        ]
        self.weights = W + U + b

    def initial_state(self, batch_size: int) -> tuple[Tensor, Tensor]:
        zeros = np.zeros((batch_size, self.hidden_dim))
        return Tensor(zeros), Tensor(zeros.copy())

    def step(self, x, h, c, mask: np.ndarray | None = None) -> tuple[Tensor, Tensor]:
        return ops.lstm_step(x, h, c, self.weights, mask=mask)

    def __call__(
        self, inputs: Tensor, mask: np.ndarray | None = None, state=None
    ) -> tuple[Tensor, Tensor, Tensor]:
        """Returns (outputs (B, T, H), last h, last c).

        Padded steps carry the previous state, so the last state is the one
        after each row's final real step.
        """
        batch_size, n_steps = inputs.shape[0], inputs.shape[1]
        if n_steps == 0:
            raise InvalidNNArgument("LSTM input has no time steps")
        h, c = state if state is not None else self.initial_state(batch_size)
        outputs = []
        for step in range(n_steps):
            x = ops.select(inputs, step, axis=1)
            step_mask = None if mask is None else mask[:, step]
            h, c = self.step(x, h, c, mask=step_mask)
            outputs.append(h)
        return ops.stack(outputs, axis=1), h, c
