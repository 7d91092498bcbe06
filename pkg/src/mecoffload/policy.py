"""Learned offloading policy: MLP actor, noisy order-preserving quantizer,
adaptive candidate count, replay memory, and the Adam cross-entropy update.

The network maps a normalized observation (3N features) to a relaxed
offloading decision in (0,1)^N through two rectifier hidden layers and a
sigmoid output. Training fits the most recent selected actions with binary
cross-entropy, one Adam step per training event.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig
from .env import FrameObservation


def sigmoid(z):
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def normalize_input(obs: FrameObservation, cfg: SimConfig,
                    mean_gains: np.ndarray | None = None) -> np.ndarray:
    """Feature vector [h/h_bar, Q/Q_scale, Y/Y_scale], length 3N."""
    if mean_gains is None:
        mean_gains = cfg.mean_gains()
    return np.concatenate(
        [obs.h / mean_gains, obs.Q / cfg.Q_scale, obs.Y / cfg.Y_scale]
    )


class Mlp:
    """Plain feed-forward network with rectifier hidden layers and a sigmoid
    output, trained with binary cross-entropy."""

    def __init__(self, sizes, rng: np.random.Generator, init_mode: str = "xavier"):
        self.sizes = list(sizes)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            if init_mode == "xavier":
                bound = np.sqrt(6.0 / (fan_in + fan_out))
                W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            elif init_mode == "normal":
                W = rng.standard_normal((fan_in, fan_out))
            else:
                raise ValueError(f"unknown init mode {init_mode!r}")
            self.weights.append(W)
            self.biases.append(np.zeros(fan_out))

    def forward(self, features: np.ndarray) -> np.ndarray:
        """Relaxed decision in (0,1)^N for a single feature vector."""
        return self._forward_batch(np.asarray(features)[None, :])[0]

    def _forward_batch(self, X: np.ndarray, keep: list | None = None) -> np.ndarray:
        if X.shape[1] != self.sizes[0]:
            raise ValueError(f"expected {self.sizes[0]} features, got {X.shape[1]}")
        a = X
        if keep is not None:
            keep.append(a)
        last = len(self.weights) - 1
        for k, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W + b
            a = sigmoid(z) if k == last else np.maximum(z, 0.0)
            if keep is not None:
                keep.append(a)
        return a

    def loss_and_grads(self, X: np.ndarray, labels: np.ndarray):
        """Mean (over batch) binary cross-entropy summed over outputs, with
        gradients for every weight matrix and bias vector."""
        acts: list[np.ndarray] = []
        out = self._forward_batch(X, keep=acts)
        eps = 1e-12
        out_c = np.clip(out, eps, 1.0 - eps)
        B = X.shape[0]
        loss = -np.sum(labels * np.log(out_c) + (1 - labels) * np.log(1 - out_c)) / B

        gw = [np.zeros_like(W) for W in self.weights]
        gb = [np.zeros_like(b) for b in self.biases]
        delta = (out - labels) / B  # sigmoid + cross-entropy
        for k in range(len(self.weights) - 1, -1, -1):
            gw[k] = acts[k].T @ delta
            gb[k] = delta.sum(axis=0)
            if k > 0:
                delta = (delta @ self.weights[k].T) * (acts[k] > 0)
        return loss, gw, gb


class Adam:
    def __init__(self, mlp: Mlp, cfg: SimConfig):
        self.lr = cfg.learning_rate
        self.b1 = cfg.adam_beta1
        self.b2 = cfg.adam_beta2
        self.eps = cfg.adam_eps
        self.t = 0
        self.mw = [np.zeros_like(W) for W in mlp.weights]
        self.vw = [np.zeros_like(W) for W in mlp.weights]
        self.mb = [np.zeros_like(b) for b in mlp.biases]
        self.vb = [np.zeros_like(b) for b in mlp.biases]

    def step(self, mlp: Mlp, gw, gb) -> None:
        self.t += 1
        c1 = 1 - self.b1**self.t
        c2 = 1 - self.b2**self.t
        for k in range(len(mlp.weights)):
            self.mw[k] = self.b1 * self.mw[k] + (1 - self.b1) * gw[k]
            self.vw[k] = self.b2 * self.vw[k] + (1 - self.b2) * gw[k] ** 2
            mlp.weights[k] -= self.lr * (self.mw[k] / c1) / (np.sqrt(self.vw[k] / c2) + self.eps)
            self.mb[k] = self.b1 * self.mb[k] + (1 - self.b1) * gb[k]
            self.vb[k] = self.b2 * self.vb[k] + (1 - self.b2) * gb[k] ** 2
            mlp.biases[k] -= self.lr * (self.mb[k] / c1) / (np.sqrt(self.vb[k] / c2) + self.eps)


class ReplayMemory:
    """Ring buffer of (feature vector, chosen binary action) pairs."""

    def __init__(self, capacity: int, feature_dim: int, action_dim: int):
        self.capacity = capacity
        self.features = np.zeros((capacity, feature_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.cursor = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def add(self, features: np.ndarray, action: np.ndarray) -> None:
        self.features[self.cursor] = features
        self.actions[self.cursor] = action
        self.cursor = (self.cursor + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator):
        idx = rng.integers(0, self.size, size=min(batch_size, self.size))
        return self.features[idx], self.actions[idx]


def _opq(xhat: np.ndarray, count: int) -> np.ndarray:
    """Order-preserving quantizer: the 0.5-rounded action followed by
    ``count - 1`` threshold actions, thresholds being the entries of ``xhat``
    closest to 0.5 in increasing distance order."""
    n = len(xhat)
    actions = np.zeros((count, n), dtype=int)
    actions[0] = (xhat > 0.5).astype(int)
    if count > 1:
        order = np.argsort(np.abs(xhat - 0.5), kind="stable")
        for m in range(1, count):
            thr = xhat[order[m - 1]]
            above = xhat > thr
            equal = xhat == thr
            actions[m] = (above | (equal & (thr <= 0.5))).astype(int)
    return actions


def nop_quantize(xhat: np.ndarray, M: int, rng: np.random.Generator) -> np.ndarray:
    """Noisy order-preserving quantization into M binary candidates.

    The first M/2 candidates quantize ``xhat`` directly; the rest apply the
    same quantizer to sigmoid(xhat + standard normal noise).
    """
    xhat = np.asarray(xhat, dtype=float)
    n = len(xhat)
    if M % 2 != 0 or not 2 <= M <= 2 * n:
        raise ValueError("candidate count must be even and in [2, 2N]")
    half = M // 2
    noisy = sigmoid(xhat + rng.standard_normal(n))
    return np.vstack([_opq(xhat, half), _opq(noisy, half)])


@dataclass
class QuantizerSchedule:
    """Adaptive candidate count: periodically shrink/grow M based on where
    the recently selected candidates ranked inside their half."""

    N: int
    delta_M: int
    M: int = 0
    history: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.M == 0:
            self.M = 2 * self.N

    def record(self, selected_index: int) -> None:
        self.history.append(selected_index % (self.M // 2))

    def maybe_update(self, t: int) -> int:
        if t % self.delta_M == 0 and self.history:
            self.M = 2 * min(max(self.history[-self.delta_M:]) + 1, self.N)
            self.history.clear()
        return self.M


def train_step(mlp: Mlp, adam: Adam, memory: ReplayMemory,
               rng: np.random.Generator, cfg: SimConfig) -> float | None:
    """One sampled-batch cross-entropy Adam update; no-op (returns None)
    until the memory holds more than half its capacity."""
    if len(memory) <= memory.capacity // 2:
        return None
    X, labels = memory.sample(cfg.batch_size, rng)
    loss, gw, gb = mlp.loss_and_grads(X, labels)
    adam.step(mlp, gw, gb)
    return float(loss)


# ----- checkpoint I/O: plain text, layer sizes then row-major params -----

def save_checkpoint(mlp: Mlp, path: str) -> None:
    """Text checkpoint: a header line, the layer sizes, then per layer one
    line of row-major weights and one line of biases."""
    with open(path, "w") as fp:
        fp.write("mlp-checkpoint v1\n")
        fp.write(" ".join(str(s) for s in mlp.sizes) + "\n")
        for W, b in zip(mlp.weights, mlp.biases):
            fp.write(" ".join(repr(float(v)) for v in W.ravel()) + "\n")
            fp.write(" ".join(repr(float(v)) for v in b) + "\n")


def load_checkpoint(path: str) -> Mlp:
    with open(path) as fp:
        header = fp.readline().strip()
        if header != "mlp-checkpoint v1":
            raise ValueError(f"not a checkpoint file: {path}")
        sizes = [int(s) for s in fp.readline().split()]
        mlp = Mlp(sizes, np.random.default_rng(0))
        for k, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            mlp.weights[k] = np.array(fp.readline().split(), dtype=float).reshape(fan_in, fan_out)
            mlp.biases[k] = np.array(fp.readline().split(), dtype=float)
    return mlp
