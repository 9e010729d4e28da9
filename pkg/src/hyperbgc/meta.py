"""Meta-pretraining on SIOP-clustered tasks and region-specific adaptation.

Tasks group synthetic records that share similar optical water types: an
anchor record is drawn at random, its 2K nearest neighbours in (standardised)
SIOP score space are collected, and the neighbourhood is split evenly into a
support half and a query half. The base network is pretrained with a
first-order meta-update: for every task the parameters are adapted on the
support set by plain gradient descent, the query-loss gradient is evaluated
at the adapted parameters, and the averaged query gradients update the shared
initialisation. Regional fine-tuning restarts from that initialisation and
descends the regional support loss, keeping the parameters that scored best
on the held-out query records.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .metrics import retrieval_metrics
from .mlp import (MlpParams, gradient_step, init_mlp, input_stats, mlp_forward,
                  mlp_loss_grad)
from .synthetic import SyntheticDataset

__all__ = [
    "Task",
    "TrainConfig",
    "AdaptConfig",
    "MetaResult",
    "sample_task",
    "sample_task_batch",
    "inner_adapt",
    "meta_pretrain",
    "region_adapt",
    "cross_validate",
    "CvResult",
]

log = logging.getLogger(__name__)

BGC_NAMES = ("tss", "doc", "tchla")


@dataclass(frozen=True, eq=False)
class Task:
    """Support/query halves of one SIOP neighbourhood (targets in log10 space)."""

    support_x: np.ndarray
    support_y: np.ndarray
    query_x: np.ndarray
    query_y: np.ndarray
    centre_scores: np.ndarray

    def __post_init__(self):
        if len(self.support_x) != len(self.query_x):
            raise ValueError("support and query must have equal size")


@dataclass(frozen=True)
class TrainConfig:
    inner_lr: float = 0.01
    outer_lr: float = 0.001
    inner_steps: int = 1
    epochs: int = 200
    n_tasks: int = 200
    k_min: int = 5
    k_max: int = 50
    seed: int = 0
    resample_tasks: bool = False

    def __post_init__(self):
        if self.inner_lr < 0 or self.outer_lr <= 0:
            raise ValueError("learning rates must be positive")
        if self.k_min < 1 or self.k_max < self.k_min:
            raise ValueError("task size range must satisfy 1 <= k_min <= k_max")


@dataclass(frozen=True)
class AdaptConfig:
    lr: float = 0.001
    iterations: int = 500
    patience: int = 25

    def __post_init__(self):
        if self.lr <= 0 or self.iterations < 0 or self.patience < 1:
            raise ValueError("adaptation config values must be positive")


def _standardised_scores(dataset: SyntheticDataset) -> np.ndarray:
    scores = dataset.scores
    std = scores.std(axis=0)
    std[std == 0.0] = 1.0
    return (scores - scores.mean(axis=0)) / std


def sample_task(dataset: SyntheticDataset, k_i: int, rng: np.random.Generator,
                scores_z: np.ndarray | None = None) -> Task:
    """One task: a random anchor plus its 2K-1 nearest SIOP neighbours,
    shuffled and split into equal support/query halves."""
    n = len(dataset)
    if n < 2 * k_i:
        raise ValueError(f"dataset of {n} records cannot form a task of 2x{k_i}")
    if scores_z is None:
        scores_z = _standardised_scores(dataset)
    anchor = int(rng.integers(n))
    d2 = np.sum((scores_z - scores_z[anchor]) ** 2, axis=1)
    # argpartition keeps ties deterministic for a fixed input ordering
    neighbourhood = np.argpartition(d2, 2 * k_i - 1)[:2 * k_i]
    neighbourhood = neighbourhood[np.argsort(d2[neighbourhood], kind="stable")]
    perm = rng.permutation(2 * k_i)
    chosen = neighbourhood[perm]
    sup, qry = chosen[:k_i], chosen[k_i:]
    log_bgc = dataset.log_bgc_matrix
    return Task(
        support_x=dataset.rrs[sup], support_y=log_bgc[sup],
        query_x=dataset.rrs[qry], query_y=log_bgc[qry],
        centre_scores=dataset.scores[anchor].copy(),
    )


def sample_task_batch(dataset: SyntheticDataset, config: TrainConfig,
                      rng: np.random.Generator) -> list:
    scores_z = _standardised_scores(dataset)
    tasks = []
    for _ in range(config.n_tasks):
        k_i = int(rng.integers(config.k_min, config.k_max + 1))
        k_i = min(k_i, len(dataset) // 2)
        tasks.append(sample_task(dataset, k_i, rng, scores_z))
    return tasks


def inner_adapt(params: MlpParams, support_x: np.ndarray, support_y: np.ndarray,
                lr: float, steps: int = 1) -> MlpParams:
    """Full-batch gradient descent on the support loss; input untouched."""
    adapted = params
    for _ in range(steps):
        _, grads = mlp_loss_grad(adapted, support_x, support_y)
        adapted = gradient_step(adapted, grads, lr)
    return adapted


def _mean_grads(grad_list: list) -> dict:
    n = len(grad_list)
    return {name: sum(g[name] for g in grad_list) / n for name in grad_list[0]}


@dataclass(eq=False)
class MetaResult:
    """Outcome of meta-pretraining.

    best_params achieved the lowest mean query loss seen (the deliverable
    model); final_params is the state after the last update, used to resume
    training; history is the per-epoch meta-loss.
    """

    best_params: MlpParams
    final_params: MlpParams
    history: np.ndarray


def meta_pretrain(dataset: SyntheticDataset, config: TrainConfig | None = None,
                  tasks: list | None = None,
                  initial_params: MlpParams | None = None) -> MetaResult:
    """Meta-pretrain the base network on SIOP-clustered tasks.

    Tasks are sampled once up front (set ``config.resample_tasks`` to draw a
    fresh batch every epoch). Each epoch adapts a copy of the shared
    parameters to every task's support set, measures the query loss and its
    gradient at the adapted parameters, and applies the averaged query
    gradient to the shared parameters.
    """
    config = config or TrainConfig()
    if len(dataset) < 2:
        raise ValueError("dataset too small for meta-pretraining")
    rng = np.random.default_rng(config.seed)
    if initial_params is None:
        mean, std = input_stats(dataset.rrs)
        theta = init_mlp(seed=config.seed, x_mean=mean, x_std=std)
    else:
        theta = initial_params
    if tasks is None:
        tasks = sample_task_batch(dataset, config, rng)

    best_loss = np.inf
    best_theta = theta
    history = np.empty(config.epochs)
    for epoch in range(config.epochs):
        if config.resample_tasks and epoch > 0:
            tasks = sample_task_batch(dataset, config, rng)
        query_losses = []
        query_grads = []
        try:
            for task in tasks:
                phi = inner_adapt(theta, task.support_x, task.support_y,
                                  config.inner_lr, config.inner_steps)
                qloss, qgrad = mlp_loss_grad(phi, task.query_x, task.query_y)
                query_losses.append(qloss)
                query_grads.append(qgrad)
        except ArithmeticError as exc:
            raise ArithmeticError(f"epoch {epoch + 1}: {exc}") from exc
        meta_loss = float(np.mean(query_losses))
        if not np.isfinite(meta_loss):
            raise ArithmeticError(f"non-finite meta-loss at epoch {epoch + 1}")
        history[epoch] = meta_loss
        if meta_loss < best_loss:
            best_loss = meta_loss
            best_theta = theta
        theta = gradient_step(theta, _mean_grads(query_grads), config.outer_lr)
    return MetaResult(best_params=best_theta, final_params=theta, history=history)


def region_adapt(base: MlpParams, support_x: np.ndarray, support_y_linear: np.ndarray,
                 config: AdaptConfig | None = None,
                 query_x: np.ndarray | None = None,
                 query_y_linear: np.ndarray | None = None):
    """Fine-tune the pretrained base on one region's samples.

    BGC targets are supplied in linear units and fitted in log10 space.
    Descends the support loss by full-batch gradient descent, tracking the
    query loss each iteration, and returns ``(params, history)`` with the
    parameters that achieved the best query loss. Stops early when the query
    loss has not improved for ``config.patience`` iterations. Without a query
    set the support doubles as the tracking set.
    """
    config = config or AdaptConfig()
    if len(support_x) == 0:
        raise ValueError("region support set is empty")
    support_y = np.log10(np.asarray(support_y_linear, dtype=np.float64))
    if query_x is None:
        query_x, query_y = support_x, support_y
    elif query_y_linear is None:
        raise ValueError("query_x given without query_y_linear")
    else:
        query_y = np.log10(np.asarray(query_y_linear, dtype=np.float64))
    if np.allclose(support_y, support_y[0]):
        log.warning("degenerate region: all support targets identical")

    phi = base
    best = phi
    best_loss = _query_loss(phi, query_x, query_y)
    history = [best_loss]
    since_improved = 0
    for _ in range(config.iterations):
        _, grads = mlp_loss_grad(phi, support_x, support_y)
        phi = gradient_step(phi, grads, config.lr)
        qloss = _query_loss(phi, query_x, query_y)
        history.append(qloss)
        if qloss < best_loss:
            best_loss = qloss
            best = phi
            since_improved = 0
        else:
            since_improved += 1
            if since_improved >= config.patience:
                break
    return best, np.array(history)


def _query_loss(params: MlpParams, x: np.ndarray, y: np.ndarray) -> float:
    resid = mlp_forward(params, x) - y
    return float(np.sum(resid ** 2) / len(x))


@dataclass(eq=False)
class CvResult:
    """Pooled cross-validation output for one region."""

    predictions: np.ndarray           # (n, 3) linear space, original record order
    fold_of_record: np.ndarray        # (n,) fold index of each record
    metrics: dict = field(default_factory=dict)


def cross_validate(base: MlpParams, rrs: np.ndarray, bgc_linear: np.ndarray,
                   folds: int = 10, config: AdaptConfig | None = None,
                   seed: int = 0) -> CvResult:
    """K-fold cross-validated regional adaptation.

    Records are shuffled into approximately equal folds (remainder spread one
    per fold); each fold serves once as the query set while the other folds
    form the support set for adaptation. Predictions are pooled over all
    folds, so every record is predicted exactly once, and the pooled
    predictions are scored per variable in log10 space.
    """
    rrs = np.asarray(rrs, dtype=np.float64)
    bgc = np.asarray(bgc_linear, dtype=np.float64)
    n = len(rrs)
    if n < folds:
        raise ValueError(f"region of {n} records cannot be split into {folds} folds")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    base_size, remainder = divmod(n, folds)
    fold_of_record = np.empty(n, dtype=int)
    predictions = np.empty((n, 3))
    start = 0
    for fold in range(folds):
        size = base_size + (1 if fold < remainder else 0)
        query_idx = order[start:start + size]
        start += size
        support_idx = np.setdiff1d(order, query_idx)
        adapted, _ = region_adapt(
            base, rrs[support_idx], bgc[support_idx], config,
            query_x=rrs[query_idx], query_y_linear=bgc[query_idx])
        predictions[query_idx] = 10.0 ** mlp_forward(adapted, rrs[query_idx])
        fold_of_record[query_idx] = fold
    metrics = {name: retrieval_metrics(predictions[:, j], bgc[:, j])
               for j, name in enumerate(BGC_NAMES)}
    return CvResult(predictions=predictions, fold_of_record=fold_of_record,
                    metrics=metrics)
