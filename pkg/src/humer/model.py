"""Classifier contract, the built-in reference model, and the external bridge.

The reference model is a hashed bag-of-tokens logistic regression trained by
per-sample SGD.  It exists so the whole pipeline runs deterministically at
desk scale; heavyweight detectors plug in through the line-delimited-JSON
subprocess bridge instead.
"""

from __future__ import annotations

import hashlib
import json
import math
import pickle
import random
import subprocess
import zlib
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from humer.corpus import Dataset, FunctionSample
from humer.cparse import lex

DEFAULT_FEATURE_DIM = 32768
DEFAULT_LEARNING_RATE = 0.1
DEFAULT_L2 = 1e-4
DEFAULT_EPSILON = 1e-4
DEFAULT_MAX_EPOCHS = 10


class ModelError(RuntimeError):
    pass


class BridgeError(ModelError):
    """External model process failed or broke protocol."""


class SnapshotUnsupported(ModelError):
    """The external model did not advertise the snapshot capability."""


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "reference"  # "reference" | "external"
    seed: int = 0
    hyperparameters: dict = field(default_factory=dict)

    def hp(self, key: str, default):
        return self.hyperparameters.get(key, default)


@dataclass(frozen=True)
class ConvergencePolicy:
    """Training stops once an epoch fails to cut the loss by more than epsilon."""

    epsilon: float = DEFAULT_EPSILON

    def converged(self, losses: list[float]) -> bool:
        return len(losses) >= 2 and losses[-1] >= losses[-2] - self.epsilon


@dataclass(frozen=True)
class TrainReport:
    epoch_losses: tuple[float, ...]
    epochs_run: int
    converged: bool


@dataclass(frozen=True)
class Prediction:
    probability: float
    predicted_label: int

    @staticmethod
    def from_probability(p: float) -> "Prediction":
        return Prediction(p, 1 if p > 0.5 else 0)


@dataclass(frozen=True)
class ModelState:
    kind: str
    payload: bytes


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary parts (independent of hash seeds)."""
    text = "|".join(repr(p) for p in parts)
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "big") >> 1


# ---------------------------------------------------------------------------
# Feature extraction

_FEATURE_KINDS = frozenset(["identifier", "keyword", "operator"])


@lru_cache(maxsize=65536)
def hashed_token_counts(code: str, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Hashed bag of identifier/keyword/operator tokens.

    Returns (indices, values) with the value vector L2-normalized, the usual
    convention for hashed text features: it bounds the step size of one SGD
    update regardless of function length.
    """
    counts: dict[int, int] = {}
    for t in lex(code):
        if t.kind in _FEATURE_KINDS:
            idx = zlib.crc32(t.text.encode()) % dim
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    idx = np.fromiter(counts.keys(), dtype=np.int64, count=len(counts))
    cnt = np.fromiter(counts.values(), dtype=np.float64, count=len(counts))
    order = np.argsort(idx)
    cnt = cnt[order]
    return idx[order], cnt / np.linalg.norm(cnt)


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def logistic_loss_and_grad(
    weights: np.ndarray, bias: float, features: list[tuple[np.ndarray, np.ndarray]],
    labels: np.ndarray, l2: float,
) -> tuple[float, np.ndarray, float]:
    """Full-batch logistic loss with L2 on the weights (not the bias).

    Returns (loss, d loss / d weights, d loss / d bias).  Kept separate from
    the SGD loop so gradient checks exercise an independent surface.
    """
    n = len(features)
    grad_w = np.zeros_like(weights)
    grad_b = 0.0
    loss = 0.0
    for (idx, cnt), y in zip(features, labels):
        z = float(weights[idx] @ cnt) + bias
        p = _sigmoid(z)
        loss += _log_loss(p, y)
        grad_w[idx] += (p - y) * cnt
        grad_b += p - y
    loss = loss / n + 0.5 * l2 * float(weights @ weights)
    grad_w = grad_w / n + l2 * weights
    return loss, grad_w, grad_b / n


def _log_loss(p: float, y: float) -> float:
    eps = 1e-12
    p = min(max(p, eps), 1.0 - eps)
    return -(y * math.log(p) + (1.0 - y) * math.log(1.0 - p))


class ReferenceClassifier:
    """Hashed bag-of-tokens logistic regression, trained by seeded SGD.

    The same spec and the same training stream produce byte-identical
    snapshots: all randomness flows from the spec seed through one RNG.
    """

    capabilities = ("snapshot",)

    def __init__(self, spec: ClassifierSpec):
        self.spec = spec
        self.dim = int(spec.hp("feature_dim", DEFAULT_FEATURE_DIM))
        self.learning_rate = float(spec.hp("learning_rate", DEFAULT_LEARNING_RATE))
        self.l2 = float(spec.hp("l2", DEFAULT_L2))
        # weights are kept as scale * values so L2 decay costs O(1) per step
        self._values = np.zeros(self.dim, dtype=np.float64)
        self._scale = 1.0
        self.bias = 0.0
        self._rng = random.Random(derive_seed("reference", spec.seed))
        self.trained = False

    @property
    def weights(self) -> np.ndarray:
        return self._scale * self._values

    # -- scoring ----------------------------------------------------------

    def _features(self, code: str) -> tuple[np.ndarray, np.ndarray]:
        return hashed_token_counts(code, self.dim)

    def predict_probability(self, code: str) -> float:
        idx, cnt = self._features(code)
        z = self._scale * float(self._values[idx] @ cnt) + self.bias if len(idx) else self.bias
        return _sigmoid(z)

    def predict(self, sample: FunctionSample) -> Prediction:
        return Prediction.from_probability(self.predict_probability(sample.code))

    # -- training ---------------------------------------------------------

    def _epoch(self, data: Dataset) -> float:
        order = list(range(len(data)))
        self._rng.shuffle(order)
        lr = self.learning_rate
        decay = 1.0 - lr * self.l2
        total = 0.0
        for i in order:
            s = data.samples[i]
            idx, cnt = self._features(s.code)
            z = self._scale * float(self._values[idx] @ cnt) + self.bias if len(idx) else self.bias
            p = _sigmoid(z)
            total += _log_loss(p, s.label)
            g = p - s.label
            if self.l2 > 0.0:
                self._scale *= decay
                if self._scale < 1e-9:
                    self._values *= self._scale
                    self._scale = 1.0
            if len(idx):
                self._values[idx] -= lr * g * cnt / self._scale
            self.bias -= lr * g
        return total / len(data)

    def train(
        self,
        data: Dataset,
        max_epochs: int = DEFAULT_MAX_EPOCHS,
        convergence: ConvergencePolicy | None = None,
    ) -> TrainReport:
        if len(data) == 0:
            raise ModelError("cannot train on an empty dataset")
        if data.labels() != {0, 1}:
            raise ModelError(f"training data must contain both labels, got {sorted(data.labels())}")
        convergence = convergence or ConvergencePolicy()
        losses: list[float] = []
        converged = False
        for _ in range(max_epochs):
            losses.append(self._epoch(data))
            if convergence.converged(losses):
                converged = True
                break
        self.trained = True
        return TrainReport(tuple(losses), len(losses), converged)

    def fine_tune(self, data: Dataset, epochs: int) -> TrainReport:
        if not self.trained:
            raise ModelError("fine_tune requires a previously trained classifier")
        if epochs < 0:
            raise ModelError("epochs must be nonnegative")
        if len(data) == 0:
            return TrainReport((), 0, False)
        losses = [self._epoch(data) for _ in range(epochs)]
        return TrainReport(tuple(losses), len(losses), False)

    # -- state ------------------------------------------------------------

    def snapshot(self) -> ModelState:
        payload = pickle.dumps(
            {
                "spec": (self.spec.kind, self.spec.seed, sorted(self.spec.hyperparameters.items())),
                "values": self._values.tobytes(),
                "scale": self._scale,
                "bias": self.bias,
                "rng_state": self._rng.getstate(),
                "trained": self.trained,
            },
            protocol=4,
        )
        return ModelState("reference", payload)

    @staticmethod
    def restore(state: ModelState) -> "ReferenceClassifier":
        blob = pickle.loads(state.payload)
        kind, seed, hp = blob["spec"]
        clf = ReferenceClassifier(ClassifierSpec(kind, seed, dict(hp)))
        clf._values = np.frombuffer(blob["values"], dtype=np.float64).copy()
        clf._scale = blob["scale"]
        clf.bias = blob["bias"]
        clf._rng.setstate(blob["rng_state"])
        clf.trained = blob["trained"]
        return clf


# ---------------------------------------------------------------------------
# External model bridge: line-delimited JSON over a child process's stdio.


class ExternalClassifier:
    """Client for an out-of-process model speaking the stdio protocol.

    One JSON object per line on stdin; the child answers one JSON object per
    request, in order.  The handshake reply advertises capabilities; models
    without "snapshot" refuse snapshot/restore explicitly.
    """

    def __init__(self, spec: ClassifierSpec):
        self.spec = spec
        command = spec.hp("command", None)
        if not command:
            raise BridgeError("external spec needs a 'command' hyperparameter")
        if isinstance(command, str):
            command = command.split()
        try:
            self._proc = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise BridgeError(f"failed to launch external model: {exc}") from exc
        reply = self._request({"cmd": "handshake", "seed": spec.seed})
        if not reply.get("ok"):
            self.close()
            raise BridgeError(f"handshake rejected: {reply!r}")
        self.capabilities = tuple(reply.get("capabilities", ()))
        self.trained = False

    def _request(self, message: dict) -> dict:
        proc = self._proc
        if proc.poll() is not None:
            raise BridgeError("external model process has exited")
        try:
            proc.stdin.write(json.dumps(message) + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise BridgeError(f"bridge I/O failure: {exc}") from exc
        if not line:
            raise BridgeError("external model closed its output stream")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BridgeError(f"invalid JSON from external model: {line!r}") from exc
        if "error" in reply:
            raise BridgeError(f"external model error: {reply['error']}")
        return reply

    @staticmethod
    def _wire_samples(data: Dataset) -> list[dict]:
        return [{"id": s.id, "code": s.code, "label": s.label} for s in data]

    def predict_probability(self, code: str) -> float:
        return float(self._request({"cmd": "predict", "code": code})["p"])

    def predict(self, sample: FunctionSample) -> Prediction:
        return Prediction.from_probability(self.predict_probability(sample.code))

    def train(
        self,
        data: Dataset,
        max_epochs: int = DEFAULT_MAX_EPOCHS,
        convergence: ConvergencePolicy | None = None,
    ) -> TrainReport:
        convergence = convergence or ConvergencePolicy()
        reply = self._request(
            {"cmd": "train", "samples": self._wire_samples(data), "max_epochs": max_epochs}
        )
        losses = [float(x) for x in reply["epoch_losses"]]
        self.trained = True
        converged = bool(reply.get("converged", convergence.converged(losses)))
        return TrainReport(tuple(losses), len(losses), converged)

    def fine_tune(self, data: Dataset, epochs: int) -> TrainReport:
        if not self.trained:
            raise ModelError("fine_tune requires a previously trained classifier")
        reply = self._request(
            {"cmd": "fine_tune", "samples": self._wire_samples(data), "epochs": epochs}
        )
        losses = [float(x) for x in reply["epoch_losses"]]
        return TrainReport(tuple(losses), len(losses), False)

    def snapshot(self) -> ModelState:
        if "snapshot" not in self.capabilities:
            raise SnapshotUnsupported("external model does not support snapshots")
        reply = self._request({"cmd": "snapshot"})
        blob = pickle.dumps(
            {"spec": (self.spec.kind, self.spec.seed, sorted(self.spec.hyperparameters.items())),
             "state": reply["state"]},
            protocol=4,
        )
        return ModelState("external", blob)

    def restore_state(self, state_b64: str) -> None:
        if "snapshot" not in self.capabilities:
            raise SnapshotUnsupported("external model does not support snapshots")
        self._request({"cmd": "restore", "state": state_b64})

    def close(self) -> None:
        proc = self._proc
        if proc.poll() is None:
            try:
                proc.stdin.close()
            except OSError:
                pass
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


Classifier = ReferenceClassifier | ExternalClassifier


def new_classifier(spec: ClassifierSpec) -> Classifier:
    if spec.kind == "reference":
        return ReferenceClassifier(spec)
    if spec.kind == "external":
        return ExternalClassifier(spec)
    raise ModelError(f"unknown classifier kind {spec.kind!r}")


def train(
    c: Classifier,
    data: Dataset,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    convergence: ConvergencePolicy | None = None,
) -> TrainReport:
    return c.train(data, max_epochs, convergence)


def predict(c: Classifier, sample: FunctionSample) -> Prediction:
    return c.predict(sample)


def fine_tune(c: Classifier, data: Dataset, epochs: int) -> TrainReport:
    return c.fine_tune(data, epochs)


def snapshot(c: Classifier) -> ModelState:
    return c.snapshot()


def restore(state: ModelState) -> Classifier:
    if state.kind == "reference":
        return ReferenceClassifier.restore(state)
    if state.kind == "external":
        blob = pickle.loads(state.payload)
        kind, seed, hp = blob["spec"]
        clf = ExternalClassifier(ClassifierSpec(kind, seed, dict(hp)))
        clf.restore_state(blob["state"])
        clf.trained = True
        return clf
    raise ModelError(f"unknown snapshot kind {state.kind!r}")


def spec_with_seed(spec: ClassifierSpec, seed: int) -> ClassifierSpec:
    return replace(spec, seed=seed)
