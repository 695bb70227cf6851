"""Feed-forward probe with a shared trunk and separate position heads.

The network is three affine+ReLU trunk layers (inverted dropout after each
when training) followed by one affine head per predicted position, so every
input-to-head path crosses four weight layers. Training minimizes the batch
mean of the summed per-head cross-entropies with AdamW (decoupled weight
decay, biases excluded).

Everything is plain numpy and fully deterministic for a fixed seed.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .annotations import PhonemeInventory
from .embedio import ProbeDataset
from .errors import (
    ArchitectureMismatch,
    BadMagic,
    EmptyDataset,
    NonFiniteActivation,
    ShapeMismatch,
    TargetOutOfRange,
    TruncatedPayload,
)
from .validation import check_matrix, check_targets


@dataclass(frozen=True)
class ProbeConfig:
    input_dim: int
    n_classes: int
    hidden_dims: tuple[int, int, int] = (512, 512, 512)
    dropout: float = 0.1
    heads: int = 3

    def __post_init__(self):
        if len(self.hidden_dims) != 3:
            raise ValueError("hidden_dims must have length 3")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.heads not in (1, 3):
            raise ValueError("heads must be 1 or 3")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    weight_decay: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 256
    epochs: int = 20
    seed: int = 0
    precision: str = "single"  # "single" | "double"

    def __post_init__(self):
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("betas must lie in (0, 1)")
        if self.precision not in ("single", "double"):
            raise ValueError("precision must be 'single' or 'double'")

    @property
    def dtype(self):
        return np.float64 if self.precision == "double" else np.float32


# Parameter keys in serialization order: trunk 1..3 then heads.
def _param_keys(heads: int) -> list[str]:
    keys = []
    for i in (1, 2, 3):
        keys += [f"W{i}", f"b{i}"]
    for h in range(heads):
        keys += [f"Wh{h}", f"bh{h}"]
    return keys


@dataclass
class ProbeModel:
    config: ProbeConfig
    inventory: PhonemeInventory
    params: dict[str, np.ndarray]

    @property
    def dtype(self):
        return self.params["W1"].dtype


def init_model(
    config: ProbeConfig,
    inventory: PhonemeInventory,
    seed: int = 0,
    dtype=np.float32,
) -> ProbeModel:
    """Glorot-uniform weights, zero biases, seeded."""
    rng = np.random.default_rng(seed)
    dims = [config.input_dim, *config.hidden_dims]
    params: dict[str, np.ndarray] = {}
    for i in (1, 2, 3):
        fan_in, fan_out = dims[i - 1], dims[i]
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params[f"W{i}"] = rng.uniform(-limit, limit, (fan_in, fan_out)).astype(dtype)
        params[f"b{i}"] = np.zeros(fan_out, dtype)
    for h in range(config.heads):
        limit = np.sqrt(6.0 / (dims[3] + config.n_classes))
        params[f"Wh{h}"] = rng.uniform(
            -limit, limit, (dims[3], config.n_classes)
        ).astype(dtype)
        params[f"bh{h}"] = np.zeros(config.n_classes, dtype)
    return ProbeModel(config=config, inventory=inventory, params=params)


def _forward_cached(model, x, training, rng):
    """Forward pass returning hidden activations and dropout masks."""
    cfg = model.config
    p = model.params
    keep = 1.0 - cfg.dropout
    h = x
    hiddens = [x]
    masks = []
    for i in (1, 2, 3):
        z = h @ p[f"W{i}"] + p[f"b{i}"]
        h = np.maximum(z, 0)
        if training and cfg.dropout > 0:
            mask = (rng.random(h.shape) < keep).astype(h.dtype) / keep
            h = h * mask
            masks.append(mask)
        else:
            masks.append(None)
        hiddens.append(h)
    logits = [h @ p[f"Wh{k}"] + p[f"bh{k}"] for k in range(cfg.heads)]
    return logits, hiddens, masks


def forward(
    model: ProbeModel,
    x: np.ndarray,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> list[np.ndarray]:
    """Per-head logits for a batch of row vectors."""
    x = check_matrix(x, dim=model.config.input_dim, dtype=model.dtype)
    if training and model.config.dropout > 0 and rng is None:
        rng = np.random.default_rng(0)
    logits, _, _ = _forward_cached(model, x, training, rng)
    for l in logits:
        if not np.all(np.isfinite(l)):
            raise NonFiniteActivation("non-finite logits in forward pass")
    return logits


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _log_softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def triplet_loss(logits: list[np.ndarray], targets: np.ndarray) -> float:
    """Batch mean of the summed per-head cross-entropies."""
    targets = check_targets(targets, len(logits), logits[0].shape[1])
    if logits[0].shape[0] != targets.shape[0]:
        raise ShapeMismatch("batch size of logits and targets differ")
    total = 0.0
    for k, z in enumerate(logits):
        lsm = _log_softmax(np.asarray(z, np.float64))
        total += -lsm[np.arange(len(targets)), targets[:, k]].mean()
    return float(total)


def backward(
    model: ProbeModel, x: np.ndarray, targets: np.ndarray
) -> dict[str, np.ndarray]:
    """Gradients of triplet_loss w.r.t. all parameters, dropout disabled."""
    x = check_matrix(x, dim=model.config.input_dim, dtype=model.dtype)
    targets = check_targets(targets, model.config.heads, model.config.n_classes)
    logits, hiddens, masks = _forward_cached(model, x, False, None)
    return _grads_from_cache(model, logits, hiddens, masks, targets)


def _grads_from_cache(model, logits, hiddens, masks, targets):
    cfg = model.config
    p = model.params
    n = hiddens[0].shape[0]
    grads = {}
    dh_last = np.zeros_like(hiddens[3])
    for k in range(cfg.heads):
        probs = _softmax(logits[k])
        dz = probs.copy()
        dz[np.arange(n), targets[:, k]] -= 1.0
        dz /= n
        grads[f"Wh{k}"] = hiddens[3].T @ dz
        grads[f"bh{k}"] = dz.sum(axis=0)
        dh_last += dz @ p[f"Wh{k}"].T
    dh = dh_last
    for i in (3, 2, 1):
        h = hiddens[i]
        if masks[i - 1] is not None:
            dh = dh * masks[i - 1]
        dz = dh * (h > 0) if masks[i - 1] is None else dh * (hiddens[i] > 0)
        grads[f"W{i}"] = hiddens[i - 1].T @ dz
        grads[f"b{i}"] = dz.sum(axis=0)
        if i > 1:
            dh = dz @ p[f"W{i}"].T
    return grads


@dataclass
class OptimizerState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray]) -> "OptimizerState":
        return cls(
            m={k: np.zeros_like(v) for k, v in params.items()},
            v={k: np.zeros_like(v) for k, v in params.items()},
        )


def adamw_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    cfg: TrainConfig,
) -> None:
    """One AdamW update in place; weight decay is decoupled and skips biases."""
    state.t += 1
    t = state.t
    b1, b2 = cfg.beta1, cfg.beta2
    for k, theta in params.items():
        g = grads[k]
        state.m[k] = b1 * state.m[k] + (1 - b1) * g
        state.v[k] = b2 * state.v[k] + (1 - b2) * g * g
        m_hat = state.m[k] / (1 - b1**t)
        v_hat = state.v[k] / (1 - b2**t)
        update = m_hat / (np.sqrt(v_hat) + cfg.eps)
        if cfg.weight_decay > 0 and not k.startswith("b"):
            update = update + cfg.weight_decay * theta
        params[k] = theta - cfg.learning_rate * update


def train(
    train_set: ProbeDataset,
    cfg: TrainConfig = TrainConfig(),
    probe_cfg: ProbeConfig | None = None,
) -> tuple[ProbeModel, list[float]]:
    """Train a probe on a dataset; returns the model and per-epoch mean loss."""
    if len(train_set) == 0:
        raise EmptyDataset("training set is empty")
    heads = 3 if train_set.labels.ndim == 2 and train_set.labels.shape[1] == 3 else 1
    if probe_cfg is None:
        probe_cfg = ProbeConfig(
            input_dim=train_set.features.shape[1],
            n_classes=len(train_set.inventory),
            heads=heads,
        )
    dtype = cfg.dtype
    model = init_model(probe_cfg, train_set.inventory, seed=cfg.seed, dtype=dtype)
    state = OptimizerState.for_params(model.params)
    rng = np.random.default_rng(cfg.seed + 1)

    x_all = np.asarray(train_set.features, dtype)
    y_all = np.asarray(train_set.labels, np.int64).reshape(len(train_set), -1)
    history = []
    n = len(train_set)
    for _epoch in range(cfg.epochs):
        order = rng.permutation(n)
        losses = []
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            xb, yb = x_all[idx], y_all[idx]
            logits, hiddens, masks = _forward_cached(model, xb, True, rng)
            losses.append(triplet_loss(logits, yb) * len(idx))
            grads = _grads_from_cache(model, logits, hiddens, masks, yb)
            adamw_step(model.params, grads, state, cfg)
        history.append(sum(losses) / n)
    return model, history


def predict(
    model: ProbeModel, x: np.ndarray
) -> tuple[list[np.ndarray], np.ndarray]:
    """Per-head class probabilities and the argmax class-id triplet."""
    logits = forward(model, x, training=False)
    probs = [_softmax(np.asarray(z, np.float64)) for z in logits]
    argmax = np.stack([p.argmax(axis=1) for p in probs], axis=1)
    return probs, argmax


# Model file: magic "PRB1" | u32 metadata_len | JSON metadata | parameter
# blob in _param_keys order, little-endian at declared precision.
PRB_MAGIC = b"PRB1"


def save_model(model: ProbeModel) -> bytes:
    cfg = model.config
    precision = "double" if model.dtype == np.float64 else "single"
    meta = {
        "version": 1,
        "input_dim": cfg.input_dim,
        "hidden_dims": list(cfg.hidden_dims),
        "n_classes": cfg.n_classes,
        "heads": cfg.heads,
        "dropout": cfg.dropout,
        "inventory": list(model.inventory.symbols),
        "counts": model.inventory.counts,
        "precision": precision,
    }
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    fmt = "<f8" if precision == "double" else "<f4"
    parts = [PRB_MAGIC, struct.pack("<I", len(blob)), blob]
    for k in _param_keys(cfg.heads):
        parts.append(np.ascontiguousarray(model.params[k], fmt).tobytes())
    return b"".join(parts)


def load_model(blob: bytes) -> ProbeModel:
    if len(blob) < 8 or blob[:4] != PRB_MAGIC:
        raise BadMagic("not a probe model file")
    (meta_len,) = struct.unpack_from("<I", blob, 4)
    if len(blob) < 8 + meta_len:
        raise TruncatedPayload("metadata truncated")
    meta = json.loads(blob[8 : 8 + meta_len].decode("utf-8"))
    cfg = ProbeConfig(
        input_dim=meta["input_dim"],
        n_classes=meta["n_classes"],
        hidden_dims=tuple(meta["hidden_dims"]),
        dropout=meta["dropout"],
        heads=meta["heads"],
    )
    if cfg.n_classes != len(meta["inventory"]):
        raise ArchitectureMismatch("n_classes does not match inventory size")
    fmt = "<f8" if meta["precision"] == "double" else "<f4"
    itemsize = 8 if meta["precision"] == "double" else 4
    dims = [cfg.input_dim, *cfg.hidden_dims]
    shapes = []
    for i in (1, 2, 3):
        shapes += [(dims[i - 1], dims[i]), (dims[i],)]
    for _h in range(cfg.heads):
        shapes += [(dims[3], cfg.n_classes), (cfg.n_classes,)]
    offset = 8 + meta_len
    params = {}
    for key, shape in zip(_param_keys(cfg.heads), shapes):
        count = int(np.prod(shape))
        if len(blob) < offset + count * itemsize:
            raise TruncatedPayload(f"parameter blob truncated at '{key}'")
        params[key] = np.frombuffer(blob, fmt, count, offset).reshape(shape).copy()
        offset += count * itemsize
    if offset != len(blob):
        raise ArchitectureMismatch("parameter blob size does not match metadata")
    inventory = PhonemeInventory(
        tuple(meta["inventory"]),
        {k: int(v) for k, v in meta.get("counts", {}).items()},
    )
    return ProbeModel(config=cfg, inventory=inventory, params=params)


class TripletProbe(BaseEstimator):
    """sklearn-style front end: fit on (features, class-id triplets).

    y has shape (N, 3) for the three-head probe or (N,) for the single-head
    segment-averaged mode. score() reports ordered accuracy (exact triplet
    match).
    """

    def __init__(
        self,
        hidden_dims=(512, 512, 512),
        dropout=0.1,
        learning_rate=1e-3,
        weight_decay=1e-2,
        batch_size=256,
        epochs=20,
        seed=0,
        precision="single",
    ):
        self.hidden_dims = hidden_dims
        self.dropout = dropout
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed
        self.precision = precision

    def fit(self, X, y, inventory: PhonemeInventory | None = None):
        X = check_matrix(X)
        y = np.asarray(y, np.int64)
        heads = 3 if y.ndim == 2 else 1
        if inventory is None:
            n_classes = int(y.max()) + 1 if y.size else 1
            inventory = PhonemeInventory(tuple(str(i) for i in range(n_classes)))
        dataset = ProbeDataset(
            features=X.astype(np.float32),
            labels=y.reshape(len(X), -1).astype(np.int32),
            speakers=[""] * len(X),
            kinds=np.zeros(len(X), np.uint8),
            inventory=inventory,
        )
        probe_cfg = ProbeConfig(
            input_dim=X.shape[1],
            n_classes=len(inventory),
            hidden_dims=tuple(self.hidden_dims),
            dropout=self.dropout,
            heads=heads,
        )
        cfg = TrainConfig(
            learning_rate=self.learning_rate,
            weight_decay=self.weight_decay,
            batch_size=self.batch_size,
            epochs=self.epochs,
            seed=self.seed,
            precision=self.precision,
        )
        self.model_, self.loss_history_ = train(dataset, cfg, probe_cfg)
        return self

    def predict(self, X):
        _, argmax = predict(self.model_, X)
        return argmax if self.model_.config.heads == 3 else argmax[:, 0]

    def predict_proba(self, X):
        probs, _ = predict(self.model_, X)
        return probs if self.model_.config.heads == 3 else probs[0]

    def score(self, X, y):
        pred = self.predict(X)
        y = np.asarray(y).reshape(pred.shape)
        return float(np.all(np.atleast_2d(pred == y), axis=-1).mean())
