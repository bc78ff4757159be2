"""From-scratch multilayer perceptron for 16-way syndrome classification.

Architecture: H hidden layers of N units each, affine -> batch norm ->
ReLU, with a final affine + softmax over the 16 logical classes.  He
weight initialization, Adam updates on the mean categorical cross
entropy, 64-bit arithmetic throughout, single-pass training (every
batch is seen exactly once).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

CHECKPOINT_MAGIC = b"SMLP"
CHECKPOINT_VERSION = 1
BN_EPS = 1e-5


@dataclass(frozen=True)
class MLPConfig:
    input_dim: int
    hidden_layers: int
    nodes: int
    output_dim: int = 16
    batch_size: int = 10_000
    step_size: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    # running-moment horizon ~10 batches: with 1e4-sample batches the
    # statistics are stable and inference tracks training closely
    bn_momentum: float = 0.9
    # "cosine" decays the step size to ~zero over the announced budget;
    # constant is the bare optimizer default
    lr_schedule: str = "constant"
    seed: int = 0

    def __post_init__(self):
        if self.hidden_layers < 1 or self.nodes < 1:
            raise ValueError("need at least one hidden layer and one node")


@dataclass
class MLPState:
    config: MLPConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    bn_gamma: list[np.ndarray]
    bn_beta: list[np.ndarray]
    bn_mean: list[np.ndarray]
    bn_var: list[np.ndarray]
    adam_m: dict = field(default_factory=dict)
    adam_v: dict = field(default_factory=dict)
    step: int = 0

    def parameter_count(self) -> int:
        total = sum(w.size for w in self.weights)
        total += sum(b.size for b in self.biases)
        total += sum(g.size for g in self.bn_gamma) * 2
        return total


def init(config: MLPConfig) -> MLPState:
    """He-initialized weights, zero biases, identity batch norm."""
    rng = np.random.Generator(np.random.Philox(key=np.array(
        [config.seed % (1 << 64), 0x4D4C50], dtype=np.uint64)))
    dims = ([config.input_dim] + [config.nodes] * config.hidden_layers
            + [config.output_dim])
    weights = []
    biases = []
    for i in range(len(dims) - 1):
        scale = np.sqrt(2.0 / dims[i])
        weights.append(rng.normal(0.0, scale, size=(dims[i], dims[i + 1])))
        biases.append(np.zeros(dims[i + 1]))
    h = config.hidden_layers
    state = MLPState(
        config=config,
        weights=weights,
        biases=biases,
        bn_gamma=[np.ones(config.nodes) for _ in range(h)],
        bn_beta=[np.zeros(config.nodes) for _ in range(h)],
        bn_mean=[np.zeros(config.nodes) for _ in range(h)],
        bn_var=[np.ones(config.nodes) for _ in range(h)],
    )
    for key, arr in _parameters(state):
        state.adam_m[key] = np.zeros_like(arr)
        state.adam_v[key] = np.zeros_like(arr)
    return state


def _parameters(state: MLPState):
    for i, w in enumerate(state.weights):
        yield ("w", i), w
    for i, b in enumerate(state.biases):
        yield ("b", i), b
    for i, g in enumerate(state.bn_gamma):
        yield ("g", i), g
    for i, b in enumerate(state.bn_beta):
        yield ("s", i), b


def _forward(state: MLPState, x: np.ndarray, training: bool):
    """Returns (probs, cache); cache is None outside training mode."""
    cfg = state.config
    if x.shape[1] != cfg.input_dim:
        raise ValueError(
            f"input width {x.shape[1]} != configured {cfg.input_dim}")
    cache = [] if training else None
    a = x.astype(np.float64, copy=False)
    for i in range(cfg.hidden_layers):
        z = a @ state.weights[i] + state.biases[i]
        if training:
            mu = z.mean(axis=0)
            var = z.var(axis=0)
            state.bn_mean[i] *= cfg.bn_momentum
            state.bn_mean[i] += (1 - cfg.bn_momentum) * mu
            state.bn_var[i] *= cfg.bn_momentum
            state.bn_var[i] += (1 - cfg.bn_momentum) * var
        else:
            mu = state.bn_mean[i]
            var = state.bn_var[i]
        inv_std = 1.0 / np.sqrt(var + BN_EPS)
        z_hat = (z - mu) * inv_std
        pre = state.bn_gamma[i] * z_hat + state.bn_beta[i]
        out = np.maximum(pre, 0.0)
        if training:
            cache.append((a, z_hat, inv_std, pre))
        a = out
    logits = a @ state.weights[-1] + state.biases[-1]
    logits -= logits.max(axis=1, keepdims=True)
    ex = np.exp(logits)
    probs = ex / ex.sum(axis=1, keepdims=True)
    if training:
        cache.append(a)
    return probs, cache


def forward(state: MLPState, x: np.ndarray, training: bool = False
            ) -> np.ndarray:
    """Class probabilities; training mode also refreshes running moments."""
    probs, _ = _forward(state, x, training)
    return probs


def loss_and_gradients(state: MLPState, x: np.ndarray, labels: np.ndarray):
    """Mean cross entropy and gradients for every trainable parameter."""
    cfg = state.config
    n = x.shape[0]
    probs, cache = _forward(state, x, training=True)
    eps = 1e-300
    loss = float(-np.log(probs[np.arange(n), labels] + eps).mean())
    grads = {}
    delta = probs.copy()
    delta[np.arange(n), labels] -= 1.0
    delta /= n
    a_last = cache[-1]
    grads[("w", cfg.hidden_layers)] = a_last.T @ delta
    grads[("b", cfg.hidden_layers)] = delta.sum(axis=0)
    da = delta @ state.weights[-1].T
    for i in range(cfg.hidden_layers - 1, -1, -1):
        a_in, z_hat, inv_std, pre = cache[i]
        dpre = da * (pre > 0)
        grads[("g", i)] = (dpre * z_hat).sum(axis=0)
        grads[("s", i)] = dpre.sum(axis=0)
        dz_hat = dpre * state.bn_gamma[i]
        # batch-norm backward with batch statistics
        dz = inv_std * (dz_hat - dz_hat.mean(axis=0)
                        - z_hat * (dz_hat * z_hat).mean(axis=0))
        grads[("w", i)] = a_in.T @ dz
        grads[("b", i)] = dz.sum(axis=0)
        if i > 0:
            da = dz @ state.weights[i].T
    return loss, grads


def train_step(state: MLPState, x: np.ndarray, labels: np.ndarray,
               lr_scale: float = 1.0) -> float:
    """One Adam update on the batch; returns the batch loss."""
    cfg = state.config
    loss, grads = loss_and_gradients(state, x, labels)
    if not np.isfinite(loss):
        raise FloatingPointError(
            f"non-finite loss {loss} at step {state.step}")
    state.step += 1
    t = state.step
    bc1 = 1.0 - cfg.beta1 ** t
    bc2 = 1.0 - cfg.beta2 ** t
    lr = cfg.step_size * lr_scale
    for key, arr in _parameters(state):
        g = grads[key]
        m = state.adam_m[key]
        v = state.adam_v[key]
        m *= cfg.beta1
        m += (1 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1 - cfg.beta2) * g * g
        arr -= lr * (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)
    return loss


def _lr_scale(config: MLPConfig, step: int, total_steps: int | None) -> float:
    if config.lr_schedule == "constant" or not total_steps:
        return 1.0
    if config.lr_schedule == "cosine":
        t = min(1.0, step / total_steps)
        return max(0.02, 0.5 * (1.0 + np.cos(np.pi * t)))
    raise ValueError(f"unknown lr schedule {config.lr_schedule!r}")


def train(config: MLPConfig, records, log_every: int = 0,
          progress=None, total_steps: int | None = None) -> MLPState:
    """Single-pass training over a stream of (bits, label) records.

    Records are consumed in batches of config.batch_size; each batch is
    fed exactly once.  A trailing partial batch is dropped (batch norm
    needs a full batch's statistics).  Stream exhaustion terminates
    training normally.  total_steps announces the budget to the
    learning-rate schedule (unused by the constant schedule).
    """
    state = init(config)
    xs = np.empty((config.batch_size, config.input_dim), dtype=np.float64)
    ys = np.empty(config.batch_size, dtype=np.int64)
    fill = 0
    for bits_vec, label in records:
        xs[fill] = bits_vec
        ys[fill] = label
        fill += 1
        if fill == config.batch_size:
            scale = _lr_scale(config, state.step, total_steps)
            loss = train_step(state, xs, ys, lr_scale=scale)
            fill = 0
            if log_every and state.step % log_every == 0 and progress:
                progress(state.step, loss)
    return state


def predict(state: MLPState, x: np.ndarray) -> np.ndarray:
    return forward(state, x, training=False).argmax(axis=1)


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    phat = k / n
    denom = 1 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def evaluate(state: MLPState, records, batch: int = 4096):
    """Accuracy and residual logical error rate on labeled records.

    The classifier corrects the simple decoder, so a record is an error
    exactly when the predicted class differs from the true class.
    Returns (accuracy, p_bar, wilson 95% interval of p_bar, n).
    """
    total = 0
    wrong = 0
    xs = []
    ys = []

    def flush():
        nonlocal total, wrong
        if not xs:
            return
        x = np.asarray(xs, dtype=np.float64)
        y = np.asarray(ys, dtype=np.int64)
        pred = predict(state, x)
        wrong += int((pred != y).sum())
        total += len(y)
        xs.clear()
        ys.clear()

    for bits_vec, label in records:
        xs.append(bits_vec)
        ys.append(label)
        if len(xs) == batch:
            flush()
    flush()
    p_bar = wrong / total if total else 0.0
    return 1.0 - p_bar, p_bar, wilson_interval(wrong, total), total


def save_checkpoint(state: MLPState, path) -> None:
    cfg = state.config
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<BIIIIQ", CHECKPOINT_VERSION, cfg.input_dim,
                             cfg.hidden_layers, cfg.nodes, cfg.output_dim,
                             state.step))
        for arrs in (state.weights, state.biases, state.bn_gamma,
                     state.bn_beta, state.bn_mean, state.bn_var):
            for arr in arrs:
                fh.write(arr.astype("<f8").tobytes())


def load_checkpoint(path) -> MLPState:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"bad checkpoint magic {magic!r}")
        header = fh.read(struct.calcsize("<BIIIIQ"))
        version, input_dim, h, n, out, step = struct.unpack("<BIIIIQ", header)
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        config = MLPConfig(input_dim=input_dim, hidden_layers=h, nodes=n,
                           output_dim=out)
        state = init(config)
        state.step = step

        def read_into(arr):
            raw = fh.read(arr.size * 8)
            if len(raw) != arr.size * 8:
                raise ValueError("truncated checkpoint")
            arr[:] = np.frombuffer(raw, dtype="<f8").reshape(arr.shape)

        for arrs in (state.weights, state.biases, state.bn_gamma,
                     state.bn_beta, state.bn_mean, state.bn_var):
            for arr in arrs:
                read_into(arr)
        if fh.read(1):
            raise ValueError("trailing bytes in checkpoint")
    return state
