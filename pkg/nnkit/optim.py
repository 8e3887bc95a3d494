import logging
from collections.abc import Iterable
from dataclasses import (
    dataclass,
    field,
)

import numpy as np
from nnkit.constants import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPSILON,
    OptimizerKinds,
)
from nnkit.exceptions import (
    InvalidNNArgument,
    NonFiniteError,
)
from nnkit.tensor import Parameter


logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    kind: str
    learning_rate: float
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPSILON
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


class Optimizer:
    kind: str = ""

    def __init__(self, parameters: Iterable[Parameter], learning_rate: float):
        if learning_rate < 0:
            raise InvalidNNArgument(f"learning_rate must be >= 0, got {learning_rate}")
        self.parameters = [p for p in parameters if p.requires_grad]
        self.state = OptimizerState(kind=self.kind, learning_rate=learning_rate)

    def check_gradients(self):
        for parameter in self.parameters:
            if parameter.grad is None:
                parameter.zero_grad()
            elif not np.isfinite(parameter.grad).all():
                raise NonFiniteError(
                    f"Non-finite gradient for parameter {parameter.name}",
                    parameter.name,
                )

    def zero_grad(self):
        for parameter in self.parameters:
            parameter.zero_grad()

    def step(self):
        self.check_gradients()
        self.state.step += 1
        for parameter in self.parameters:
            parameter.value = parameter.value - self.update(parameter)
        self.zero_grad()

    def update(self, parameter: Parameter) -> np.ndarray:
        raise NotImplementedError


class SGD(Optimizer):
    kind = OptimizerKinds.SGD

    def update(self, parameter: Parameter) -> np.ndarray:
        return self.state.learning_rate * parameter.grad


class Adam(Optimizer):
    """Bias-corrected Adam"""

    kind = OptimizerKinds.ADAM

    def __init__(self, parameters: Iterable[Parameter], learning_rate: float):
        super().__init__(parameters, learning_rate)
        for parameter in self.parameters:
            self.state.m[parameter.name] = np.zeros_like(parameter.value)
            self.state.v[parameter.name] = np.zeros_like(parameter.value)

    def update(self, parameter: Parameter) -> np.ndarray:
        state = self.state
        grad = parameter.grad
        m = state.beta1 * state.m[parameter.name] + (1.0 - state.beta1) * grad
        v = state.beta2 * state.v[parameter.name] + (1.0 - state.beta2) * grad * grad
        state.m[parameter.name] = m
        state.v[parameter.name] = v
        m_hat = m / (1.0 - state.beta1**state.step)
        v_hat = v / (1.0 - state.beta2**state.step)
        return state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)

    def load_moments(self, step: int, m: dict[str, np.ndarray], v: dict[str, np.ndarray]):
        for parameter in self.parameters:
            name = parameter.name
            if name not in m or name not in v:
                raise InvalidNNArgument(f"Missing optimizer moments for {name}")
            if m[name].shape != parameter.shape or v[name].shape != parameter.shape:
                raise InvalidNNArgument(f"Optimizer moment shape mismatch for {name}")
            self.state.m[name] = np.array(m[name], dtype=np.float64)
            self.state.v[name] = np.array(v[name], dtype=np.float64)
        self.state.step = step


OPTIMIZERS = {
    OptimizerKinds.SGD: SGD,
    OptimizerKinds.ADAM: Adam,
}


def build_optimizer(kind: str, parameters: Iterable[Parameter], learning_rate: float) -> Optimizer:
    try:
        optimizer_class = OPTIMIZERS[kind]
    except KeyError:
        raise InvalidNNArgument(
            f"Unknown optimizer {kind!r}; expected one of {sorted(OPTIMIZERS)}"
        )
    logger.debug("Building %s optimizer with lr=%s", kind, learning_rate)
    return optimizer_class(parameters, learning_rate)


def optimizer_step(optimizer: Optimizer):
    optimizer.step()
