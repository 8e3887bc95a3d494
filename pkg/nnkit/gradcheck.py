"""Finite-difference verification of backward rules."""
import logging
from collections.abc import (
    Callable,
    Iterator,
    Sequence,
)
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np
from nnkit import ops  # noqa: F401  registers the backward rules
from nnkit.tensor import (
    BACKWARD_RULES,
    Tape,
    Tensor,
)


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradCheckReport:
    max_relative_error: float
    worst_parameter: str | None
    worst_index: tuple[int, ...]
    analytic: float
    numeric: float
    n_coordinates: int

    def passed(self, tolerance: float) -> bool:
        return self.max_relative_error <= tolerance

    def to_dict(self) -> dict:
        return {
            "max_relative_error": self.max_relative_error,
            "worst_parameter": self.worst_parameter,
            "worst_index": list(self.worst_index),
            "analytic": self.analytic,
            "numeric": self.numeric,
            "n_coordinates": self.n_coordinates,
        }


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))


def _coordinates(
    size: int, count: int | None, rng: np.random.Generator
) -> np.ndarray:
    if count is None or count >= size:
        return np.arange(size)
    return np.sort(rng.choice(size, size=count, replace=False))


def grad_check(
    closure: Callable[[], Tensor],
    parameters: Sequence[Tensor],
    eps: float = 1e-5,
    coordinates_per_parameter: int | None = None,
    rng_seed: int = 0,
) -> GradCheckReport:
    """Compare backward gradients with central differences.

    `closure` builds the scalar loss from scratch on every call. Only the
    sampled coordinates of each parameter are checked when
    `coordinates_per_parameter` is set.
    """
    rng = np.random.default_rng(rng_seed)
    for parameter in parameters:
        parameter.zero_grad()
    with Tape() as tape:
        loss = closure()
    tape.backward(loss)
    analytic_grads = [parameter.grad.copy() for parameter in parameters]

    worst = GradCheckReport(0.0, None, (), 0.0, 0.0, 0)
    n_coordinates = 0
    for position, (parameter, analytic) in enumerate(zip(parameters, analytic_grads)):
        size = parameter.value.size
        for coordinate in _coordinates(size, coordinates_per_parameter, rng):
            index = np.unravel_index(coordinate, parameter.shape)
            original = parameter.value[index]
            parameter.value[index] = original + eps
            plus = closure().item()
            parameter.value[index] = original - eps
            minus = closure().item()
            parameter.value[index] = original
            numeric = (plus - minus) / (2.0 * eps)
            value = float(analytic[index])
            error = relative_error(value, numeric)
            n_coordinates += 1
            if worst.worst_parameter is None or error > worst.max_relative_error:
                worst = GradCheckReport(
                    max_relative_error=error,
                    worst_parameter=parameter.name or f"input{position}",
                    worst_index=tuple(int(i) for i in index),
                    analytic=value,
                    numeric=numeric,
                    n_coordinates=0,
                )

    for parameter in parameters:
        parameter.zero_grad()
    report = GradCheckReport(
        max_relative_error=worst.max_relative_error,
        worst_parameter=worst.worst_parameter,
        worst_index=worst.worst_index,
        analytic=worst.analytic,
        numeric=worst.numeric,
        n_coordinates=n_coordinates,
    )
    logger.debug(
        "Gradient check over %d coordinates: max relative error %.3e at %s%s",
        n_coordinates,
        report.max_relative_error,
        report.worst_parameter,
        list(report.worst_index),
    )
    return report


@contextmanager
def scaled_backward_rule(op: str, factor: float) -> Iterator[None]:
    """Temporarily multiply every input gradient of `op` by `factor`"""
    rule = BACKWARD_RULES[op]

    def scaled(ctx, inputs, grads):
        return tuple(
            None if grad is None else factor * grad
            for grad in rule(ctx, inputs, grads)
        )

    BACKWARD_RULES[op] = scaled
    try:
        yield
    finally:
        BACKWARD_RULES[op] = rule
