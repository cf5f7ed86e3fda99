"""Dense regression networks in plain numpy.

A network is a stack of affine maps with leaky ReLU (slope 0.01) between
them and no activation after the last layer.  Training is full-batch-shuffled
minibatch Adam on the MSE loss with z-score normalization of inputs and
targets (statistics fitted on the training set only) and early stopping on a
validation set.  Everything is deterministic given (seed, data, config).
"""

import json
from dataclasses import dataclass

import numpy as np

LEAKY_SLOPE = 0.01
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class TrainingDiverged(RuntimeError):
    """Raised when a training or validation loss stops being finite."""


@dataclass
class TrainConfig:
    learning_rate: float = 1e-5
    batch_size: int = 128
    patience: int = 20
    max_epochs: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1 or self.patience < 1 or self.max_epochs < 1:
            raise ValueError("batch_size, patience and max_epochs must be >= 1")


def leaky_relu(z: np.ndarray) -> np.ndarray:
    return np.where(z >= 0.0, z, LEAKY_SLOPE * z)


def leaky_relu_grad(z: np.ndarray) -> np.ndarray:
    return np.where(z >= 0.0, 1.0, LEAKY_SLOPE)


class MlpNetwork:
    """Plain-numpy multilayer perceptron."""

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        if len(weights) != len(biases) or not weights:
            raise ValueError("need matching, non-empty weight and bias lists")
        for l, (w, b) in enumerate(zip(weights, biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {l}: weight {w.shape} / bias {b.shape} mismatch")
            if l > 0 and weights[l - 1].shape[1] != w.shape[0]:
                raise ValueError(f"layer {l}: input dim {w.shape[0]} does not chain")
        self.weights = weights
        self.biases = biases

    @classmethod
    def init(cls, layer_dims: list[int], rng: np.random.Generator) -> "MlpNetwork":
        """He-style uniform initialization, scaled by fan-in; zero biases."""
        if len(layer_dims) < 2 or any(d < 1 for d in layer_dims):
            raise ValueError(f"bad layer dims {layer_dims}")
        weights, biases = [], []
        for d_in, d_out in zip(layer_dims[:-1], layer_dims[1:]):
            limit = np.sqrt(6.0 / d_in)
            weights.append(rng.uniform(-limit, limit, size=(d_in, d_out)))
            biases.append(np.zeros(d_out))
        return cls(weights, biases)

    @property
    def layer_dims(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "MlpNetwork":
        return MlpNetwork([w.copy() for w in self.weights],
                          [b.copy() for b in self.biases])

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        a = np.atleast_2d(x)
        if a.shape[1] != self.weights[0].shape[0]:
            raise ValueError(f"input dim {a.shape[1]}, network expects "
                             f"{self.weights[0].shape[0]}")
        last = len(self.weights) - 1
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w + b
            if l != last:
                a = leaky_relu(a)
        return a[0] if single else a

    def _forward_cached(self, x: np.ndarray):
        """Activations and preactivations of every layer, for backprop."""
        acts, pre = [x], []
        last = len(self.weights) - 1
        a = x
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            pre.append(z)
            a = leaky_relu(z) if l != last else z
            acts.append(a)
        return acts, pre


def mse(pred: np.ndarray, target: np.ndarray) -> float:
    return float(np.mean((pred - target) ** 2))


def gradient(net: MlpNetwork, x: np.ndarray, y: np.ndarray):
    """Analytic gradients of the MSE loss.

    Returns (loss, weight_grads, bias_grads).  The loss averages over every
    entry of the batch, matching ``mse``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    if y.shape != (x.shape[0], net.weights[-1].shape[1]):
        raise ValueError(f"target shape {y.shape} does not match batch")

    acts, pre = net._forward_cached(x)
    loss = mse(acts[-1], y)

    delta = 2.0 * (acts[-1] - y) / y.size
    grads_w = [np.empty(0)] * len(net.weights)
    grads_b = [np.empty(0)] * len(net.weights)
    for l in range(len(net.weights) - 1, -1, -1):
        grads_w[l] = acts[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ net.weights[l].T) * leaky_relu_grad(pre[l - 1])
    return loss, grads_w, grads_b


@dataclass
class AdamState:
    m_w: list
    v_w: list
    m_b: list
    v_b: list
    step: int = 0


def init_adam(net: MlpNetwork) -> AdamState:
    return AdamState(m_w=[np.zeros_like(w) for w in net.weights],
                     v_w=[np.zeros_like(w) for w in net.weights],
                     m_b=[np.zeros_like(b) for b in net.biases],
                     v_b=[np.zeros_like(b) for b in net.biases])


def adam_step(net: MlpNetwork, state: AdamState, grads_w, grads_b, lr: float) -> None:
    """One Adam update, in place."""
    state.step += 1
    t = state.step
    c1 = 1.0 - ADAM_BETA1**t
    c2 = 1.0 - ADAM_BETA2**t
    for p, m, v, g in zip(net.weights + net.biases,
                          state.m_w + state.m_b,
                          state.v_w + state.v_b,
                          grads_w + grads_b):
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + ADAM_EPS)


@dataclass(frozen=True)
class Normalizer:
    """Per-feature z-score transform; zero-deviation features map to 0."""

    mean: np.ndarray
    std: np.ndarray      # sample std (N-1 convention), exactly 0 where degenerate

    def apply(self, x: np.ndarray) -> np.ndarray:
        safe = np.where(self.std > 0.0, self.std, 1.0)
        out = (x - self.mean) / safe
        return np.where(self.std > 0.0, out, 0.0)

    def invert(self, z: np.ndarray) -> np.ndarray:
        return z * self.std + self.mean


def fit_normalizer(x: np.ndarray) -> Normalizer:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 0:
        raise ValueError("cannot fit a normalizer on an empty set")
    mean = x.mean(axis=0)
    if x.shape[0] == 1:
        std = np.zeros(x.shape[1])
    else:
        std = x.std(axis=0, ddof=1)
    return Normalizer(mean=mean, std=std)


@dataclass
class TrainedModel:
    """Network plus the normalizers it was trained under."""

    net: MlpNetwork
    in_norm: Normalizer
    out_norm: Normalizer

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.out_norm.invert(self.net.forward(self.in_norm.apply(x)))


@dataclass
class TrainResult:
    model: TrainedModel
    train_history: np.ndarray
    val_history: np.ndarray
    best_epoch: int        # epoch index of the returned snapshot
    checks: int            # validation checks performed


def train(net: MlpNetwork, train_set, val_set, cfg: TrainConfig) -> TrainResult:
    """Minibatch Adam with early stopping; returns the best-validation snapshot.

    ``train_set`` and ``val_set`` are (inputs, targets) pairs in raw units;
    normalization statistics are fitted on the training pair only.  One
    validation check runs per epoch and training stops after ``cfg.patience``
    checks without improvement (or at ``cfg.max_epochs``).
    """
    x_tr, y_tr = (np.atleast_2d(np.asarray(a, dtype=float)) for a in train_set)
    x_va, y_va = (np.atleast_2d(np.asarray(a, dtype=float)) for a in val_set)
    if x_tr.shape[0] == 0 or x_va.shape[0] == 0:
        raise ValueError("training and validation sets must be non-empty")
    if x_tr.shape[0] != y_tr.shape[0] or x_va.shape[0] != y_va.shape[0]:
        raise ValueError("inputs and targets must pair up")

    in_norm = fit_normalizer(x_tr)
    out_norm = fit_normalizer(y_tr)
    xn, yn = in_norm.apply(x_tr), out_norm.apply(y_tr)
    xv, yv = in_norm.apply(x_va), out_norm.apply(y_va)

    rng = np.random.default_rng(cfg.seed)
    state = init_adam(net)
    n = xn.shape[0]

    best_val = np.inf
    best_weights = [w.copy() for w in net.weights]
    best_biases = [b.copy() for b in net.biases]
    best_epoch = 0
    since_improved = 0
    train_hist, val_hist = [], []

    for epoch in range(cfg.max_epochs):
        perm = rng.permutation(n)
        losses = []
        for lo in range(0, n, cfg.batch_size):
            idx = perm[lo:lo + cfg.batch_size]
            loss, gw, gb = gradient(net, xn[idx], yn[idx])
            adam_step(net, state, gw, gb, cfg.learning_rate)
            losses.append(loss)
        train_loss = float(np.mean(losses))
        val_loss = mse(net.forward(xv), yv)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise TrainingDiverged(
                f"non-finite loss at epoch {epoch}: train={train_loss}, val={val_loss}")
        train_hist.append(train_loss)
        val_hist.append(val_loss)

        if val_loss < best_val:
            best_val = val_loss
            best_weights = [w.copy() for w in net.weights]
            best_biases = [b.copy() for b in net.biases]
            best_epoch = epoch
            since_improved = 0
        else:
            since_improved += 1
            if since_improved >= cfg.patience:
                break

    model = TrainedModel(net=MlpNetwork(best_weights, best_biases),
                         in_norm=in_norm, out_norm=out_norm)
    return TrainResult(model=model,
                       train_history=np.asarray(train_hist),
                       val_history=np.asarray(val_hist),
                       best_epoch=best_epoch,
                       checks=len(val_hist))


def save_model(path, model: TrainedModel, cfg: TrainConfig) -> None:
    """Write a checkpoint that loads back bit-exactly (numpy archive)."""
    arrays = {}
    for l, (w, b) in enumerate(zip(model.net.weights, model.net.biases)):
        arrays[f"w{l}"] = w
        arrays[f"b{l}"] = b
    arrays["in_mean"] = model.in_norm.mean
    arrays["in_std"] = model.in_norm.std
    arrays["out_mean"] = model.out_norm.mean
    arrays["out_std"] = model.out_norm.std
    meta = {"layer_dims": model.net.layer_dims,
            "n_layers": len(model.net.weights),
            "learning_rate": cfg.learning_rate,
            "batch_size": cfg.batch_size,
            "patience": cfg.patience,
            "max_epochs": cfg.max_epochs,
            "seed": cfg.seed}
    arrays["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
    np.savez(path, **arrays)


def load_model(path) -> tuple[TrainedModel, TrainConfig]:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]))
        weights = [data[f"w{l}"] for l in range(meta["n_layers"])]
        biases = [data[f"b{l}"] for l in range(meta["n_layers"])]
        model = TrainedModel(
            net=MlpNetwork(weights, biases),
            in_norm=Normalizer(mean=data["in_mean"], std=data["in_std"]),
            out_norm=Normalizer(mean=data["out_mean"], std=data["out_std"]))
    cfg = TrainConfig(learning_rate=meta["learning_rate"],
                      batch_size=meta["batch_size"],
                      patience=meta["patience"],
                      max_epochs=meta["max_epochs"],
                      seed=meta["seed"])
    return model, cfg
