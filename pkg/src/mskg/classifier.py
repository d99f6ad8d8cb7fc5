"""Multi-label capability classifier over embedding vectors.

A small feed-forward network (100 -> 20 rectified-linear -> 10 sigmoid)
maps a manufacturer's embedding to ten capability categories. Targets come
from the service hierarchy: a manufacturer is labeled with every category
its provided services roll up to.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.special import expit

from .embedding import EmbeddingTable
from .errors import (
    EmptyTrainingSet,
    ShapeMismatch,
    TooFewSamples,
    UnknownManufacturer,
)
from .graph import CATEGORIES, Graph, NodeLabel, RelationType
from .metrics import ConfusionCounts, Rates, rates
from .optim import Adam

INPUT_DIM = 100
HIDDEN_DIM = 20
OUTPUT_DIM = len(CATEGORIES)

_MODEL_FORMAT = 1


@dataclass(frozen=True)
class LabelVector:
    """Ten binary capability indicators in the fixed category order."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != OUTPUT_DIM:
            raise ValueError(f"expected {OUTPUT_DIM} indicators, got {len(self.bits)}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("indicators must be 0 or 1")

    @classmethod
    def from_names(cls, names) -> "LabelVector":
        unknown = set(names) - set(CATEGORIES)
        if unknown:
            raise ValueError(f"unknown categories: {sorted(unknown)}")
        present = set(names)
        return cls(tuple(int(c in present) for c in CATEGORIES))

    def names(self) -> tuple[str, ...]:
        return tuple(c for c, b in zip(CATEGORIES, self.bits) if b)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.float64)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 100
    batch: int = 32
    split: tuple[float, float, float] = (0.8, 0.1, 0.1)
    folds: int = 10
    repeats: int = 3
    threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.epochs <= 0 or self.batch <= 0:
            raise ValueError("epochs and batch must be positive")
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")
        if self.folds < 2 or self.repeats < 1:
            raise ValueError("need folds >= 2 and repeats >= 1")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class MlpModel:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        shapes = (
            (self.w1.shape, (INPUT_DIM, HIDDEN_DIM)),
            (self.b1.shape, (HIDDEN_DIM,)),
            (self.w2.shape, (HIDDEN_DIM, OUTPUT_DIM)),
            (self.b2.shape, (OUTPUT_DIM,)),
        )
        for got, want in shapes:
            if got != want:
                raise ShapeMismatch(f"layer shape {got} does not match {want}")
        for arr in (self.w1, self.b1, self.w2, self.b2):
            if not np.isfinite(arr).all():
                raise ShapeMismatch("model parameters must be finite")

    def params(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Per-label probabilities for a batch of input vectors."""
        z = self._logits(np.asarray(x, dtype=np.float64))
        return expit(z)

    def _logits(self, x: np.ndarray) -> np.ndarray:
        hidden = np.maximum(x @ self.w1 + self.b1, 0.0)
        return hidden @ self.w2 + self.b2


def init_model(seed: int = 0) -> MlpModel:
    """Fresh network: he-uniform hidden layer, glorot-uniform output layer."""
    rng = np.random.default_rng((seed, 77))
    lim1 = np.sqrt(6.0 / INPUT_DIM)
    lim2 = np.sqrt(6.0 / (HIDDEN_DIM + OUTPUT_DIM))
    return MlpModel(
        w1=rng.uniform(-lim1, lim1, (INPUT_DIM, HIDDEN_DIM)),
        b1=np.zeros(HIDDEN_DIM),
        w2=rng.uniform(-lim2, lim2, (HIDDEN_DIM, OUTPUT_DIM)),
        b2=np.zeros(OUTPUT_DIM),
    )


def loss_and_grads(
    params: Sequence[np.ndarray], x: np.ndarray, y: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Mean binary cross-entropy over every label cell, with its gradient.

    params is [w1, b1, w2, b2]. The loss is computed from logits, so it
    stays finite for any parameter values.
    """
    w1, b1, w2, b2 = params
    z1 = x @ w1 + b1
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ w2 + b2
    loss = float(np.mean(np.logaddexp(0.0, z2) - y * z2))

    dz2 = (expit(z2) - y) / z2.size
    dw2 = a1.T @ dz2
    db2 = dz2.sum(axis=0)
    da1 = dz2 @ w2.T
    dz1 = da1 * (z1 > 0.0)
    dw1 = x.T @ dz1
    db1 = dz1.sum(axis=0)
    return loss, [dw1, db1, dw2, db2]


# -- label derivation ------------------------------------------------------


def derive_labels(graph: Graph, manufacturer_id: str) -> LabelVector:
    """Union of category rollups over the manufacturer's provided services."""
    if not graph.has_node(manufacturer_id):
        raise UnknownManufacturer(manufacturer_id)
    node = graph.node(manufacturer_id)
    if node.label is not NodeLabel.MANUFACTURER:
        raise UnknownManufacturer(f"{manufacturer_id} is a {node.label.value}")
    names: set[str] = set()
    for service_id in graph.out_edges(manufacturer_id, RelationType.PROVIDES):
        names |= graph.rollup_to_categories(service_id)
    return LabelVector.from_names(names)


# -- training --------------------------------------------------------------


@dataclass(frozen=True)
class SplitMetrics:
    size: int
    subset_accuracy: Optional[float]
    micro: Rates

    def to_text(self) -> str:
        acc = "undefined" if self.subset_accuracy is None else f"{self.subset_accuracy:.6f}"
        return f"n={self.size} subset_accuracy={acc} {self.micro.to_text()}"


@dataclass(frozen=True)
class TrainReport:
    model: MlpModel
    epoch_losses: tuple[float, ...]
    train: SplitMetrics
    validation: SplitMetrics
    test: SplitMetrics


def _matrix(table: EmbeddingTable, labels: Mapping[str, LabelVector]):
    if not labels:
        raise EmptyTrainingSet("no labeled manufacturers")
    if table.dim != INPUT_DIM:
        raise ShapeMismatch(f"embeddings have dim {table.dim}, need {INPUT_DIM}")
    ids = sorted(labels)
    x = np.stack([table.vector(i) for i in ids])
    y = np.stack([labels[i].as_array() for i in ids])
    return ids, x, y


def evaluate_predictions(y_true: np.ndarray, probs: np.ndarray, threshold: float) -> SplitMetrics:
    n = len(y_true)
    if n == 0:
        return SplitMetrics(size=0, subset_accuracy=None, micro=Rates(None, None, None, None))
    predicted = probs >= threshold
    actual = y_true >= 0.5
    exact = float(np.mean((predicted == actual).all(axis=1)))
    counts = ConfusionCounts(
        tp=int(np.sum(predicted & actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fp=int(np.sum(predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
    )
    return SplitMetrics(size=n, subset_accuracy=exact, micro=rates(counts))


def _fit(x: np.ndarray, y: np.ndarray, config: TrainConfig, entropy: tuple) -> tuple[MlpModel, list[float]]:
    model = init_model(config.seed)
    params = [p.copy() for p in model.params()]
    opt = Adam(params, lr=config.learning_rate, beta1=config.beta1, beta2=config.beta2, eps=config.eps)
    n = len(x)
    losses = []
    for epoch in range(config.epochs):
        order = np.random.default_rng(entropy + (epoch,)).permutation(n)
        total = 0.0
        for start in range(0, n, config.batch):
            batch = order[start : start + config.batch]
            loss, grads = loss_and_grads(params, x[batch], y[batch])
            opt.step(grads)
            total += loss * len(batch)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss):
            raise ValueError(f"training loss diverged at epoch {epoch}")
        losses.append(epoch_loss)
    return MlpModel(*params), losses


def train(
    table: EmbeddingTable, labels: Mapping[str, LabelVector], config: TrainConfig
) -> TrainReport:
    """Fit the network on an 80:10:10 shuffled split of the labeled ids."""
    _, x, y = _matrix(table, labels)
    n = len(x)
    perm = np.random.default_rng((config.seed, 101)).permutation(n)
    n_train = int(n * config.split[0])
    n_val = int(n * config.split[1])
    train_idx = perm[:n_train]
    val_idx = perm[n_train : n_train + n_val]
    test_idx = perm[n_train + n_val :]
    if len(train_idx) == 0:
        raise EmptyTrainingSet("split leaves no training samples")

    model, losses = _fit(x[train_idx], y[train_idx], config, (config.seed, 7))

    def split_eval(idx):
        if len(idx) == 0:
            return SplitMetrics(size=0, subset_accuracy=None, micro=Rates(None, None, None, None))
        return evaluate_predictions(y[idx], model.forward(x[idx]), config.threshold)

    return TrainReport(
        model=model,
        epoch_losses=tuple(losses),
        train=split_eval(train_idx),
        validation=split_eval(val_idx),
        test=split_eval(test_idx),
    )


# -- prediction ------------------------------------------------------------


@dataclass(frozen=True)
class Prediction:
    probabilities: tuple[float, ...]
    labels: LabelVector


def predict(
    model: MlpModel,
    x,
    table: Optional[EmbeddingTable] = None,
    threshold: float = 0.5,
) -> Prediction:
    """Score one embedding vector, or an id resolved through a table."""
    if isinstance(x, str):
        if table is None:
            raise ValueError("an embedding table is required to resolve an id")
        x = table.vector(x)
    vec = np.asarray(x, dtype=np.float64)
    if vec.shape != (INPUT_DIM,):
        raise ShapeMismatch(f"input has shape {vec.shape}, need ({INPUT_DIM},)")
    probs = model.forward(vec[None, :])[0]
    bits = tuple(int(p >= threshold) for p in probs)
    return Prediction(probabilities=tuple(float(p) for p in probs), labels=LabelVector(bits))


# -- cross-validation ------------------------------------------------------


@dataclass(frozen=True)
class FoldRecord:
    repeat: int
    fold: int
    held_out_ids: tuple[str, ...]
    metrics: SplitMetrics
    train_metrics: SplitMetrics


@dataclass(frozen=True)
class CrossValReport:
    records: tuple[FoldRecord, ...]

    def summary(self) -> dict[str, tuple[float, float]]:
        """Mean and standard deviation per metric over all folds."""
        out = {}
        pulls = {
            "subset_accuracy": lambda m: m.subset_accuracy,
            "precision": lambda m: m.micro.precision,
            "recall": lambda m: m.micro.recall,
            "f1": lambda m: m.micro.f1,
        }
        for name, pull in pulls.items():
            values = [pull(r.metrics) for r in self.records if pull(r.metrics) is not None]
            if values:
                out[name] = (float(np.mean(values)), float(np.std(values)))
        return out

    def to_text(self) -> str:
        lines = [f"folds evaluated: {len(self.records)}"]
        for name, (mean, std) in self.summary().items():
            lines.append(f"{name}: {mean:.6f} +/- {std:.6f}")
        return "\n".join(lines)


def cross_validate(
    table: EmbeddingTable, labels: Mapping[str, LabelVector], config: TrainConfig
) -> CrossValReport:
    """Repeated k-fold evaluation with seeded fold assignment."""
    ids, x, y = _matrix(table, labels)
    n = len(x)
    if n < config.folds:
        raise TooFewSamples(f"{n} samples cannot fill {config.folds} folds")
    records = []
    for repeat in range(config.repeats):
        perm = np.random.default_rng((config.seed, 300 + repeat)).permutation(n)
        chunks = np.array_split(perm, config.folds)
        for fold, held_out in enumerate(chunks):
            train_idx = np.concatenate([c for i, c in enumerate(chunks) if i != fold])
            model, _ = _fit(
                x[train_idx], y[train_idx], config, (config.seed, 400 + repeat, fold)
            )
            metrics = evaluate_predictions(
                y[held_out], model.forward(x[held_out]), config.threshold
            )
            own = evaluate_predictions(
                y[train_idx], model.forward(x[train_idx]), config.threshold
            )
            records.append(
                FoldRecord(
                    repeat=repeat,
                    fold=fold,
                    held_out_ids=tuple(ids[i] for i in held_out),
                    metrics=metrics,
                    train_metrics=own,
                )
            )
    return CrossValReport(records=tuple(records))


# -- model files -----------------------------------------------------------


def save_model(model: MlpModel, path: str) -> None:
    np.savez(
        path,
        format=np.array([_MODEL_FORMAT]),
        w1=model.w1,
        b1=model.b1,
        w2=model.w2,
        b2=model.b2,
    )


def load_model(path: str) -> MlpModel:
    with np.load(path) as data:
        if "format" not in data or int(data["format"][0]) != _MODEL_FORMAT:
            raise ShapeMismatch("unrecognized model file format")
        try:
            return MlpModel(w1=data["w1"], b1=data["b1"], w2=data["w2"], b2=data["b2"])
        except KeyError as exc:
            raise ShapeMismatch(f"model file is missing array {exc}") from exc
