"""Dense feed-forward regressor mapping an R_rs spectrum to log10 BGC values.

Architecture: 301 -> 64 -> 64 -> 3, tanh hidden activations, linear output.
Inputs are stabilised as log10(R_rs + 1e-5) and z-scored per band with
statistics frozen into the parameters at initialisation; outputs are log10 of
(TSS, DOC, TChl-a). The loss is the mean over samples of the squared L2 norm
of the 3-vector residual, with exact analytic backpropagation. Parameters
have value semantics: every update returns a new container.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "MlpParams",
    "init_mlp",
    "mlp_forward",
    "mlp_loss_grad",
    "gradient_step",
    "predict_bgc",
    "flatten_params",
    "unflatten_params",
    "INPUT_EPSILON",
]

N_INPUT = 301
N_OUTPUT = 3
HIDDEN = (64, 64)
INPUT_EPSILON = 1e-5

_WEIGHT_FIELDS = ("w1", "b1", "w2", "b2", "w3", "b3")


@dataclass(frozen=True, eq=False)
class MlpParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    x_mean: np.ndarray
    x_std: np.ndarray

    def __post_init__(self):
        shapes = {
            "w1": (HIDDEN[0], N_INPUT), "b1": (HIDDEN[0],),
            "w2": (HIDDEN[1], HIDDEN[0]), "b2": (HIDDEN[1],),
            "w3": (N_OUTPUT, HIDDEN[1]), "b3": (N_OUTPUT,),
            "x_mean": (N_INPUT,), "x_std": (N_INPUT,),
        }
        for name, want in shapes.items():
            arr = getattr(self, name)
            if arr.shape != want:
                raise ValueError(f"{name} has shape {arr.shape}, expected {want}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
        if np.any(self.x_std <= 0):
            raise ValueError("input standardisation std must be positive")


def init_mlp(seed: int = 0, x_mean: np.ndarray | None = None,
             x_std: np.ndarray | None = None) -> MlpParams:
    """Glorot-uniform weights, zero biases, given input standardisation."""
    rng = np.random.default_rng(seed)

    def glorot(n_out, n_in):
        s = np.sqrt(6.0 / (n_in + n_out))
        return rng.uniform(-s, s, size=(n_out, n_in))

    return MlpParams(
        w1=glorot(HIDDEN[0], N_INPUT), b1=np.zeros(HIDDEN[0]),
        w2=glorot(HIDDEN[1], HIDDEN[0]), b2=np.zeros(HIDDEN[1]),
        w3=glorot(N_OUTPUT, HIDDEN[1]), b3=np.zeros(N_OUTPUT),
        x_mean=np.zeros(N_INPUT) if x_mean is None else np.asarray(x_mean, float),
        x_std=np.ones(N_INPUT) if x_std is None else np.asarray(x_std, float),
    )


def input_stats(rrs: np.ndarray):
    """Per-band mean/std of log10(R_rs + eps) for input standardisation."""
    z = np.log10(np.asarray(rrs, dtype=np.float64) + INPUT_EPSILON)
    std = z.std(axis=0)
    return z.mean(axis=0), np.maximum(std, 1e-6)


def _standardise(params: MlpParams, rrs: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(rrs, dtype=np.float64))
    if x.shape[1] != N_INPUT:
        raise ValueError(f"expected {N_INPUT} bands, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("reflectance input contains non-finite values")
    return (np.log10(x + INPUT_EPSILON) - params.x_mean) / params.x_std


def _forward_pass(params: MlpParams, rrs: np.ndarray):
    x = _standardise(params, rrs)
    h1 = np.tanh(x @ params.w1.T + params.b1)
    h2 = np.tanh(h1 @ params.w2.T + params.b2)
    out = h2 @ params.w3.T + params.b3
    return x, h1, h2, out


def mlp_forward(params: MlpParams, rrs: np.ndarray) -> np.ndarray:
    """Network output (log10 BGC) for spectra of shape (301,) or (n, 301)."""
    squeeze = np.asarray(rrs).ndim == 1
    out = _forward_pass(params, rrs)[3]
    return out[0] if squeeze else out


def predict_bgc(params: MlpParams, rrs: np.ndarray) -> np.ndarray:
    """Linear-space (TSS, DOC, TChl-a) predictions, 10**network output."""
    return 10.0 ** mlp_forward(params, rrs)


def mlp_loss_grad(params: MlpParams, rrs: np.ndarray, targets: np.ndarray):
    """Mean squared 3-vector error and its exact gradients.

    loss = (1/n) * sum_i ||g(x_i) - y_i||^2 with y in log10 space.
    Returns ``(loss, grads)`` where grads is a dict keyed like the weight
    fields of :class:`MlpParams`.
    """
    y = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if y.shape[0] == 0:
        raise ValueError("empty batch")
    if y.shape[1] != N_OUTPUT:
        raise ValueError(f"targets must have {N_OUTPUT} columns")
    x, h1, h2, out = _forward_pass(params, rrs)
    if x.shape[0] != y.shape[0]:
        raise ValueError("inputs and targets disagree on batch size")
    n = x.shape[0]
    resid = out - y
    with np.errstate(over="ignore"):
        loss = float(np.sum(resid ** 2) / n)
    if not np.isfinite(loss):
        raise ArithmeticError("non-finite training loss (diverged parameters?)")

    d_out = (2.0 / n) * resid
    grads = {}
    grads["w3"] = d_out.T @ h2
    grads["b3"] = d_out.sum(axis=0)
    d_h2 = (d_out @ params.w3) * (1.0 - h2 ** 2)
    grads["w2"] = d_h2.T @ h1
    grads["b2"] = d_h2.sum(axis=0)
    d_h1 = (d_h2 @ params.w2) * (1.0 - h1 ** 2)
    grads["w1"] = d_h1.T @ x
    grads["b1"] = d_h1.sum(axis=0)
    return loss, grads


def gradient_step(params: MlpParams, grads: dict, lr: float) -> MlpParams:
    """One plain gradient-descent step; returns a new parameter container."""
    return replace(params, **{
        name: getattr(params, name) - lr * grads[name] for name in _WEIGHT_FIELDS
    })


def flatten_params(params: MlpParams) -> np.ndarray:
    """Trainable weights as one flat vector (standardisation excluded)."""
    return np.concatenate([getattr(params, n).ravel() for n in _WEIGHT_FIELDS])


def unflatten_params(params: MlpParams, flat: np.ndarray) -> MlpParams:
    """Rebuild a parameter container from a flat weight vector."""
    out = {}
    offset = 0
    for name in _WEIGHT_FIELDS:
        shape = getattr(params, name).shape
        size = int(np.prod(shape))
        out[name] = flat[offset:offset + size].reshape(shape).copy()
        offset += size
    if offset != flat.size:
        raise ValueError("flat vector length does not match parameter count")
    return replace(params, **out)
