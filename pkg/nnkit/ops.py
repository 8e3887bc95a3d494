"""Differentiable ops on float64 tensors.

Every op checks its output for NaN/Inf. Masks and integer indices are plain
numpy arrays and never receive gradients.
"""
from collections.abc import Sequence

import numpy as np
from nnkit.exceptions import (
    InvalidNNArgument,
    ShapeError,
)
from nnkit.tensor import (
    Node,
    Tensor,
    as_tensor,
    backward_rule,
    check_finite,
    current_tape,
)


def _apply(
    op: str, inputs: Sequence[Tensor], values: Sequence[np.ndarray], **ctx
) -> tuple[Tensor, ...]:
    requires_grad = any(tensor.requires_grad for tensor in inputs)
    outputs = []
    for value in values:
        check_finite(value, op)
        outputs.append(Tensor(value, requires_grad=requires_grad))
    tape = current_tape()
    if tape is not None and requires_grad:
        tape.record(Node(op, tuple(inputs), tuple(outputs), ctx))
    return tuple(outputs)


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(op, a.shape, b.shape)


def matmul(a, b) -> Tensor:
    """(..., n) @ (n, m) -> (..., m)"""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 1 or b.ndim != 2 or a.shape[-1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    (out,) = _apply("matmul", (a, b), (a.value @ b.value,))
    return out


@backward_rule("matmul")
def _matmul_backward(ctx, inputs, grads):
    a, b = inputs
    (grad,) = grads
    n, m = b.shape
    grad_a = grad @ b.value.T
    grad_b = a.value.reshape(-1, n).T @ grad.reshape(-1, m)
    return grad_a, grad_b


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)
    (out,) = _apply("add", (a, b), (a.value + b.value,))
    return out


@backward_rule("add")
def _add_backward(ctx, inputs, grads):
    a, b = inputs
    (grad,) = grads
    return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)
    (out,) = _apply("mul", (a, b), (a.value * b.value,))
    return out


@backward_rule("mul")
def _mul_backward(ctx, inputs, grads):
    a, b = inputs
    (grad,) = grads
    return (
        _unbroadcast(grad * b.value, a.shape),
        _unbroadcast(grad * a.value, b.shape),
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    (out,) = _apply("sigmoid", (x,), (_sigmoid(x.value),))
    return out


@backward_rule("sigmoid")
def _sigmoid_backward(ctx, inputs, grads):
    y = _sigmoid(inputs[0].value)
    return (grads[0] * y * (1.0 - y),)


def tanh(x) -> Tensor:
    x = as_tensor(x)
    (out,) = _apply("tanh", (x,), (np.tanh(x.value),))
    return out


@backward_rule("tanh")
def _tanh_backward(ctx, inputs, grads):
    y = np.tanh(inputs[0].value)
    return (grads[0] * (1.0 - y * y),)


def relu(x) -> Tensor:
    x = as_tensor(x)
    (out,) = _apply("relu", (x,), (np.maximum(x.value, 0.0),))
    return out


@backward_rule("relu")
def _relu_backward(ctx, inputs, grads):
    return (grads[0] * (inputs[0].value > 0),)


def concat(tensors: Sequence, axis: int = -1) -> Tensor:
    tensors = [as_tensor(tensor) for tensor in tensors]
    if not tensors:
        raise InvalidNNArgument("concat needs at least one tensor")
    try:
        value = np.concatenate([tensor.value for tensor in tensors], axis=axis)
    except ValueError:
        raise ShapeError("concat", *(tensor.shape for tensor in tensors))
    sizes = [tensor.shape[axis] for tensor in tensors]
    (out,) = _apply("concat", tensors, (value,), axis=axis, sizes=sizes)
    return out


@backward_rule("concat")
def _concat_backward(ctx, inputs, grads):
    splits = np.cumsum(ctx["sizes"])[:-1]
    return tuple(np.split(grads[0], splits, axis=ctx["axis"]))


def stack(tensors: Sequence, axis: int = 0) -> Tensor:
    tensors = [as_tensor(tensor) for tensor in tensors]
    if not tensors:
        raise InvalidNNArgument("stack needs at least one tensor")
    try:
        value = np.stack([tensor.value for tensor in tensors], axis=axis)
    except ValueError:
        raise ShapeError("stack", *(tensor.shape for tensor in tensors))
    (out,) = _apply("stack", tensors, (value,), axis=axis)
    return out


@backward_rule("stack")
def _stack_backward(ctx, inputs, grads):
    grad = grads[0]
    return tuple(
        np.take(grad, idx, axis=ctx["axis"]) for idx in range(len(inputs))
    )


def reshape(x, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    try:
        value = x.value.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", x.shape, tuple(shape))
    (out,) = _apply("reshape", (x,), (value,))
    return out


@backward_rule("reshape")
def _reshape_backward(ctx, inputs, grads):
    return (grads[0].reshape(inputs[0].shape),)


def select(x, index: int, axis: int = 0) -> Tensor:
    """Slice one position along `axis`, dropping that axis"""
    x = as_tensor(x)
    if not -x.shape[axis] <= index < x.shape[axis]:
        raise InvalidNNArgument(
            f"select: index {index} out of range for axis {axis} of {x.shape}"
        )
    (out,) = _apply(
        "select", (x,), (np.take(x.value, index, axis=axis),), index=index, axis=axis
    )
    return out


@backward_rule("select")
def _select_backward(ctx, inputs, grads):
    grad = np.zeros_like(inputs[0].value)
    key = [slice(None)] * grad.ndim
    key[ctx["axis"]] = ctx["index"]
    grad[tuple(key)] = grads[0]
    return (grad,)


def row_lookup(table, ids) -> Tensor:
    """Embedding lookup: ids of any shape -> ids.shape + (dim,)"""
    table = as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    if table.ndim != 2:
        raise ShapeError("row_lookup", table.shape, ids.shape)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise InvalidNNArgument(
            f"row_lookup: ids outside [0, {table.shape[0]})"
        )
    (out,) = _apply("row_lookup", (table,), (table.value[ids],), ids=ids)
    return out


@backward_rule("row_lookup")
def _row_lookup_backward(ctx, inputs, grads):
    grad = np.zeros_like(inputs[0].value)
    np.add.at(grad, ctx["ids"], grads[0])
    return (grad,)


def softmax(x, axis: int = -1, mask: np.ndarray | None = None) -> Tensor:
    """Softmax along `axis`; masked-out entries (mask False) get weight 0"""
    x = as_tensor(x)
    scores = x.value
    if mask is not None:
        mask = np.broadcast_to(np.asarray(mask, dtype=bool), x.shape)
        if not mask.any(axis=axis).all():
            raise InvalidNNArgument("softmax: every entry of a row is masked")
        scores = np.where(mask, scores, -np.inf)
    shifted = scores - scores.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    value = exp / exp.sum(axis=axis, keepdims=True)
    (out,) = _apply("softmax", (x,), (value,), axis=axis, value=value)
    return out


@backward_rule("softmax")
def _softmax_backward(ctx, inputs, grads):
    y, grad = ctx["value"], grads[0]
    inner = (grad * y).sum(axis=ctx["axis"], keepdims=True)
    return (y * (grad - inner),)


def sum(x, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    value = x.value.sum(axis=axis, keepdims=keepdims)
    (out,) = _apply("sum", (x,), (value,), axis=axis, keepdims=keepdims)
    return out


def _expand_reduced(grad, shape, axis, keepdims):
    if axis is not None and not keepdims:
        grad = np.expand_dims(grad, axis)
    return np.broadcast_to(grad, shape).copy()


@backward_rule("sum")
def _sum_backward(ctx, inputs, grads):
    return (
        _expand_reduced(grads[0], inputs[0].shape, ctx["axis"], ctx["keepdims"]),
    )


def mean(x, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    value = x.value.mean(axis=axis, keepdims=keepdims)
    count = x.value.size // max(value.size, 1)
    (out,) = _apply(
        "mean", (x,), (value,), axis=axis, keepdims=keepdims, count=count
    )
    return out


@backward_rule("mean")
def _mean_backward(ctx, inputs, grads):
    grad = grads[0] / ctx["count"]
    return (_expand_reduced(grad, inputs[0].shape, ctx["axis"], ctx["keepdims"]),)


def masked_sum(x, mask: np.ndarray, axis: int | None = None) -> Tensor:
    """Sum of the entries where mask is true"""
    x = as_tensor(x)
    try:
        weights = np.broadcast_to(np.asarray(mask, dtype=np.float64), x.shape)
    except ValueError:
        raise ShapeError("masked_sum", x.shape, np.shape(mask))
    value = (x.value * weights).sum(axis=axis)
    (out,) = _apply("masked_sum", (x,), (value,), axis=axis, weights=weights)
    return out


@backward_rule("masked_sum")
def _masked_sum_backward(ctx, inputs, grads):
    grad = grads[0]
    if ctx["axis"] is not None:
        grad = np.expand_dims(grad, ctx["axis"])
    return (grad * ctx["weights"],)


def lstm_step(x, h_prev, c_prev, weights: Sequence, mask: np.ndarray | None = None):
    """One LSTM step over a batch.

    `weights` holds W_i, W_f, W_o, W_g, U_i, U_f, U_o, U_g, b_i, b_f, b_o,
    b_g. Rows whose mask is 0 carry h_prev and c_prev through unchanged.
    Returns (h, c).
    """
    x, h_prev, c_prev = as_tensor(x), as_tensor(h_prev), as_tensor(c_prev)
    weights = [as_tensor(weight) for weight in weights]
    if len(weights) != 12:
        raise InvalidNNArgument(f"lstm_step needs 12 weights, got {len(weights)}")
    W, U, b = weights[:4], weights[4:8], weights[8:]
    squeeze = x.ndim == 1
    xv = np.atleast_2d(x.value)
    hv = np.atleast_2d(h_prev.value)
    cv = np.atleast_2d(c_prev.value)
    hidden = U[0].shape[0] if U[0].ndim == 2 else -1
    for idx in range(4):
        if (
            W[idx].ndim != 2
            or W[idx].shape[0] != xv.shape[1]
            or U[idx].shape != (hidden, hidden)
            or b[idx].shape != (hidden,)
            or W[idx].shape[1] != hidden
        ):
            raise ShapeError(
                "lstm_step", xv.shape, W[idx].shape, U[idx].shape, b[idx].shape
            )
    if hv.shape != (xv.shape[0], hidden) or cv.shape != hv.shape:
        raise ShapeError("lstm_step", xv.shape, hv.shape, cv.shape)

    z = [xv @ W[k].value + hv @ U[k].value + b[k].value for k in range(4)]
    i, f, o = (_sigmoid(zk) for zk in z[:3])
    g = np.tanh(z[3])
    c_new = f * cv + i * g
    t = np.tanh(c_new)
    h_new = o * t
    m = (
        np.ones((xv.shape[0], 1))
        if mask is None
        else np.asarray(mask, dtype=np.float64).reshape(-1, 1)
    )
    h_out = m * h_new + (1.0 - m) * hv
    c_out = m * c_new + (1.0 - m) * cv
    if squeeze:
        h_out, c_out = h_out[0], c_out[0]
    h, c = _apply(
        "lstm_step",
        (x, h_prev, c_prev, *weights),
        (h_out, c_out),
        cache=(xv, hv, cv, i, f, o, g, t, m),
    )
    return h, c


@backward_rule("lstm_step")
def _lstm_step_backward(ctx, inputs, grads):
    xv, hv, cv, i, f, o, g, t, m = ctx["cache"]
    x, h_prev, c_prev = inputs[:3]
    W, U = inputs[3:7], inputs[7:11]
    gh = np.atleast_2d(grads[0])
    gc = np.atleast_2d(grads[1])

    gh_new = m * gh
    gc_total = m * gc + gh_new * o * (1.0 - t * t)
    dz = [
        gc_total * g * i * (1.0 - i),
        gc_total * cv * f * (1.0 - f),
        gh_new * t * o * (1.0 - o),
        gc_total * i * (1.0 - g * g),
    ]
    grad_x = _total(dz[k] @ W[k].value.T for k in range(4))
    grad_h = _total(dz[k] @ U[k].value.T for k in range(4)) + (1.0 - m) * gh
    grad_c = gc_total * f + (1.0 - m) * gc
    grad_W = [xv.T @ dz[k] for k in range(4)]
    grad_U = [hv.T @ dz[k] for k in range(4)]
    grad_b = [dz[k].sum(axis=0) for k in range(4)]
    return (
        grad_x.reshape(x.shape),
        grad_h.reshape(h_prev.shape),
        grad_c.reshape(c_prev.shape),
        *grad_W,
        *grad_U,
        *grad_b,
    )


def _total(arrays):
    arrays = iter(arrays)
    total = next(arrays)
    for array in arrays:
        total = total + array
    return total


def cross_entropy(logits, targets, mask: np.ndarray | None = None) -> Tensor:
    """Mean negative log-likelihood of `targets` over unmasked positions.

    logits: (..., V); targets and mask: (...).
    """
    logits = as_tensor(logits)
    targets = np.asarray(targets, dtype=np.int64)
    if logits.shape[:-1] != targets.shape:
        raise ShapeError("cross_entropy", logits.shape, targets.shape)
    vocab_size = logits.shape[-1]
    if targets.size and (targets.min() < 0 or targets.max() >= vocab_size):
        raise InvalidNNArgument(f"cross_entropy: targets outside [0, {vocab_size})")
    weights = (
        np.ones(targets.shape)
        if mask is None
        else np.asarray(mask, dtype=np.float64).reshape(targets.shape)
    )
    n_positions = weights.sum()
    if n_positions <= 0:
        raise InvalidNNArgument("cross_entropy: every position is masked")

    top = logits.value.max(axis=-1, keepdims=True)
    exp = np.exp(logits.value - top)
    total = exp.sum(axis=-1, keepdims=True)
    log_norm = (np.log(total) + top)[..., 0]
    target_logits = np.take_along_axis(logits.value, targets[..., None], axis=-1)[..., 0]
    nll = log_norm - target_logits
    value = (nll * weights).sum() / n_positions
    (out,) = _apply(
        "cross_entropy",
        (logits,),
        (np.array(value),),
        probabilities=exp / total,
        targets=targets,
        weights=weights,
        n_positions=n_positions,
    )
    return out


@backward_rule("cross_entropy")
def _cross_entropy_backward(ctx, inputs, grads):
    grad = ctx["probabilities"].copy()
    np.put_along_axis(
        grad,
        ctx["targets"][..., None],
        np.take_along_axis(grad, ctx["targets"][..., None], axis=-1) - 1.0,
        axis=-1,
    )
    scale = grads[0] * ctx["weights"][..., None] / ctx["n_positions"]
    return (grad * scale,)
