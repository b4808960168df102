"""Binary sentiment classification: contract, baseline model, backends.

Labels are 'positive'/'negative'. Any scorer is a backend: the built-in
bag-of-words logistic baseline, or an external process speaking the
solsent-clf/1 line-delimited JSON protocol over stdio or TCP.
"""
from __future__ import annotations

import json
import math
import queue
import random
import re
import socket
import subprocess
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator

from ._validation import check_probability, check_texts
from .textprep import NormalizedText

POSITIVE = "positive"
NEGATIVE = "negative"
PROTOCOL_NAME = "solsent-clf/1"
MODEL_FORMAT = "solsent-baseline/1"

_TOKEN_RE = re.compile(r"[\w']+")


class AnnotationError(ValueError):
    """Bad annotations file; message names the offending line."""


class BackendProtocolError(RuntimeError):
    """External backend violated the wire protocol or timed out."""


@dataclass(frozen=True)
class AnnotatedExample:
    text: str
    label: str

    def __post_init__(self):
        if self.label not in (POSITIVE, NEGATIVE):
            raise ValueError(f"label must be positive/negative, got {self.label!r}")


@dataclass(frozen=True)
class SentimentPrediction:
    post_id: str
    p_positive: float
    label: str
    backend_id: str

    @classmethod
    def from_probability(cls, post_id: str, p: float, backend_id: str) -> "SentimentPrediction":
        p = check_probability(p, "p_positive")
        # Tie at exactly 0.5 goes to positive.
        return cls(post_id, p, POSITIVE if p >= 0.5 else NEGATIVE, backend_id)


@dataclass(frozen=True)
class SplitSpec:
    train: float = 0.8
    dev: float = 0.1
    test: float = 0.1
    seed: int = 0

    def __post_init__(self):
        fractions = (self.train, self.dev, self.test)
        if any(f <= 0 for f in fractions):
            raise ValueError(f"split fractions must be positive, got {fractions}")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {fractions}")


@dataclass(frozen=True)
class EvalMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
        }


def load_annotations(path: str | Path) -> tuple[list[AnnotatedExample], int]:
    """Load a TSV of text<TAB>label rows.

    Labels are case-insensitive; 'neutral' rows are dropped and counted,
    any other unknown label is an error naming the line. Returns
    (examples, n_neutral_dropped).
    """
    path = Path(path)
    examples: list[AnnotatedExample] = []
    n_neutral = 0
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.strip():
            raise AnnotationError(f"{path.name}: empty file")
        cols = header.rstrip("\n").split("\t")
        if [c.strip().lower() for c in cols[:2]] != ["text", "label"]:
            raise AnnotationError(f"{path.name}: header must be 'text<TAB>label'")
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 2:
                raise AnnotationError(f"{path.name}:{line_no}: expected text<TAB>label")
            text, label = parts[0], parts[1].strip().lower()
            if label == "neutral":
                n_neutral += 1
                continue
            if label not in (POSITIVE, NEGATIVE):
                raise AnnotationError(f"{path.name}:{line_no}: unknown label {label!r}")
            examples.append(AnnotatedExample(text=text, label=label))
    if not examples:
        raise AnnotationError(f"{path.name}: no examples")
    return examples, n_neutral


def split(
    examples: Sequence[AnnotatedExample], spec: SplitSpec = SplitSpec()
) -> tuple[list[AnnotatedExample], list[AnnotatedExample], list[AnnotatedExample]]:
    """Deterministic seeded-shuffle split into (train, dev, test).

    Sizes are floor(n*train) and floor(n*dev), remainder to test, which
    reproduces the 4097/512/513 partition of 5,122 examples.
    """
    if len(examples) < 10:
        raise ValueError(f"need at least 10 examples to split, got {len(examples)}")
    shuffled = list(examples)
    random.Random(spec.seed).shuffle(shuffled)
    n = len(shuffled)
    n_train = int(math.floor(n * spec.train + 1e-9))
    n_dev = int(math.floor(n * spec.dev + 1e-9))
    train = shuffled[:n_train]
    dev = shuffled[n_train:n_train + n_dev]
    test = shuffled[n_train + n_dev:]
    return train, dev, test


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class BaselineClassifier(BaseEstimator):
    """Lowercased unigram+bigram bag-of-words logistic model.

    Fit by full-batch gradient descent with L2 penalty and backtracking
    line search (training loss is non-increasing by construction). An
    optional dev set drives early stopping on accuracy. No randomness is
    consumed: initialization is zeros and updates are deterministic.
    """

    def __init__(
        self,
        learning_rate: float = 1.0,
        l2: float = 1e-4,
        epochs: int = 200,
        patience: int = 25,
        min_df: int = 1,
        seed: int = 0,
    ):
        self.learning_rate = learning_rate
        self.l2 = l2
        self.epochs = epochs
        self.patience = patience
        self.min_df = min_df
        self.seed = seed

    # -- featurization ---------------------------------------------------

    @staticmethod
    def _features(text: str) -> list[str]:
        tokens = _TOKEN_RE.findall(text.casefold())
        return tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]

    def _vectorize(self, texts: Sequence[str]) -> sparse.csr_matrix:
        indptr, indices, data = [0], [], []
        for text in texts:
            counts: dict[int, int] = {}
            for feat in self._features(text):
                idx = self.vocabulary_.get(feat)
                if idx is not None:
                    counts[idx] = counts.get(idx, 0) + 1
            for idx in sorted(counts):
                indices.append(idx)
                data.append(float(counts[idx]))
            indptr.append(len(indices))
        return sparse.csr_matrix(
            (data, indices, indptr), shape=(len(texts), len(self.vocabulary_))
        )

    # -- training ---------------------------------------------------------

    def _loss(self, X, y, w, b) -> float:
        z = X @ w + b
        # log(1 + exp(-|z|)) is stable for both signs.
        ll = np.logaddexp(0.0, -np.abs(z)) + np.where(y > 0.5, np.maximum(-z, 0), np.maximum(z, 0))
        return float(ll.mean() + 0.5 * self.l2 * float(w @ w))

    def fit(self, X, y, dev_texts: Sequence[str] | None = None, dev_labels: Sequence[str] | None = None):
        texts = check_texts(X)
        labels = list(y)
        if len(texts) != len(labels):
            raise ValueError("X and y lengths differ")
        if set(labels) != {POSITIVE, NEGATIVE}:
            raise ValueError("training data must contain both classes")

        df: dict[str, int] = {}
        for text in texts:
            for feat in set(self._features(text)):
                df[feat] = df.get(feat, 0) + 1
        self.vocabulary_ = {
            feat: i
            for i, feat in enumerate(sorted(f for f, c in df.items() if c >= self.min_df))
        }

        Xmat = self._vectorize(texts)
        yvec = np.array([1.0 if lb == POSITIVE else 0.0 for lb in labels])
        n = len(texts)
        w = np.zeros(len(self.vocabulary_))
        b = 0.0
        step = self.learning_rate
        loss = self._loss(Xmat, yvec, w, b)
        self.loss_history_ = [loss]

        best = (-1.0, w.copy(), b)
        stale = 0
        for _ in range(self.epochs):
            p = _sigmoid(Xmat @ w + b)
            grad_w = Xmat.T @ (p - yvec) / n + self.l2 * w
            grad_b = float((p - yvec).mean())
            accepted = False
            for _ in range(40):
                w_new = w - step * grad_w
                b_new = b - step * grad_b
                loss_new = self._loss(Xmat, yvec, w_new, b_new)
                if loss_new <= loss:
                    w, b, loss = w_new, b_new, loss_new
                    step = min(step * 1.2, self.learning_rate * 16)
                    accepted = True
                    break
                step *= 0.5
            self.loss_history_.append(loss)
            if not accepted:
                break
            if dev_texts is not None and dev_labels is not None:
                self.weights_, self.bias_ = w, b
                acc = float(
                    np.mean([pl == dl for pl, dl in zip(self.predict(dev_texts), dev_labels)])
                )
                if acc > best[0]:
                    best = (acc, w.copy(), b)
                    stale = 0
                else:
                    stale += 1
                    if stale >= self.patience:
                        break

        if dev_texts is not None and dev_labels is not None and best[0] >= 0:
            _, w, b = best
        self.weights_, self.bias_ = w, b
        return self

    # -- inference ---------------------------------------------------------

    def predict_proba(self, X) -> np.ndarray:
        texts = check_texts(X)
        if not hasattr(self, "weights_"):
            raise RuntimeError("model is not fitted")
        if not texts:
            return np.zeros(0)
        return _sigmoid(self._vectorize(texts) @ self.weights_ + self.bias_)

    def predict(self, X) -> list[str]:
        return [POSITIVE if p >= 0.5 else NEGATIVE for p in self.predict_proba(X)]

    # -- persistence --------------------------------------------------------

    def save(self, path: str | Path) -> None:
        payload = {
            "format": MODEL_FORMAT,
            "params": self.get_params(),
            "vocabulary": self.vocabulary_,
            "weights": self.weights_.tolist(),
            "bias": self.bias_,
        }
        Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "BaselineClassifier":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("format") != MODEL_FORMAT:
            raise ValueError(f"{path}: not a {MODEL_FORMAT} model file")
        model = cls(**payload["params"])
        model.vocabulary_ = {str(k): int(v) for k, v in payload["vocabulary"].items()}
        model.weights_ = np.array(payload["weights"], dtype=float)
        model.bias_ = float(payload["bias"])
        return model


def train_baseline(
    train: Sequence[AnnotatedExample],
    dev: Sequence[AnnotatedExample],
    **params,
) -> BaselineClassifier:
    """Fit the baseline on train with dev-based early stopping."""
    model = BaselineClassifier(**params)
    model.fit(
        [ex.text for ex in train],
        [ex.label for ex in train],
        dev_texts=[ex.text for ex in dev],
        dev_labels=[ex.label for ex in dev],
    )
    return model


# -- backends ----------------------------------------------------------------


class BaselineBackend:
    """In-process backend wrapping a fitted or loadable baseline model."""

    def __init__(self, model: BaselineClassifier, backend_id: str = "baseline"):
        self.model = model
        self.backend_id = backend_id

    @classmethod
    def from_file(cls, path: str | Path) -> "BaselineBackend":
        return cls(BaselineClassifier.load(path))

    def score(self, items: Sequence[tuple[str, str]]) -> list[SentimentPrediction]:
        probs = self.model.predict_proba([text for _, text in items])
        return [
            SentimentPrediction.from_probability(post_id, float(p), self.backend_id)
            for (post_id, _), p in zip(items, probs)
        ]

    def close(self) -> None:
        pass


class _LineReader:
    """Reads lines from a byte stream on a thread so reads can time out."""

    def __init__(self, stream):
        self._queue: queue.Queue = queue.Queue()
        self._thread = threading.Thread(target=self._pump, args=(stream,), daemon=True)
        self._thread.start()

    def _pump(self, stream):
        try:
            for line in stream:
                self._queue.put(line)
        except Exception as exc:  # surfaced as timeout/EOF by readline
            self._queue.put(exc)
        self._queue.put(None)

    def readline(self, timeout: float) -> str:
        try:
            item = self._queue.get(timeout=timeout)
        except queue.Empty:
            raise BackendProtocolError(f"backend timed out after {timeout}s") from None
        if item is None:
            raise BackendProtocolError("backend closed the stream mid-batch")
        if isinstance(item, Exception):
            raise BackendProtocolError(f"backend read failed: {item}")
        return item.decode("utf-8") if isinstance(item, bytes) else item


class ExternalBackend:
    """Client for the solsent-clf/1 protocol over stdio or TCP."""

    def __init__(self, writer, reader: _LineReader, timeout: float = 60.0, closer=None):
        self._writer = writer
        self._reader = reader
        self.timeout = timeout
        self._closer = closer
        self.backend_id = self._handshake()

    @classmethod
    def spawn(cls, command: Sequence[str], timeout: float = 60.0) -> "ExternalBackend":
        proc = subprocess.Popen(
            list(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE
        )

        def close():
            try:
                proc.stdin.close()
                proc.wait(timeout=10)
            except Exception:
                proc.kill()

        return cls(proc.stdin, _LineReader(proc.stdout), timeout, close)

    @classmethod
    def connect(cls, address: str, timeout: float = 60.0) -> "ExternalBackend":
        host, _, port = address.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"address must be host:port, got {address!r}")
        sock = socket.create_connection((host, int(port)), timeout=timeout)
        return cls(sock.makefile("wb"), _LineReader(sock.makefile("rb")), timeout, sock.close)

    def _handshake(self) -> str:
        line = self._reader.readline(self.timeout)
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            raise BackendProtocolError(f"bad handshake line: {line!r}") from None
        if obj.get("protocol") != PROTOCOL_NAME or "backend_id" not in obj:
            raise BackendProtocolError(f"unsupported handshake: {obj!r}")
        return str(obj["backend_id"])

    def _send(self, obj: dict) -> None:
        self._writer.write((json.dumps(obj) + "\n").encode("utf-8"))
        self._writer.flush()

    def score(self, items: Sequence[tuple[str, str]]) -> list[SentimentPrediction]:
        ids = [post_id for post_id, _ in items]
        if len(set(ids)) != len(ids):
            raise ValueError("batch contains duplicate ids")
        for post_id, text in items:
            self._send({"id": post_id, "text": text})
        self._send({"end_batch": True})

        received: dict[str, float] = {}
        pending = set(ids)
        while True:
            try:
                line = self._reader.readline(self.timeout)
            except BackendProtocolError as exc:
                raise BackendProtocolError(
                    f"{exc}; still awaiting ids {sorted(pending)[:5]}"
                ) from None
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                raise BackendProtocolError(f"non-JSON response line: {line!r}") from None
            if obj.get("end_batch"):
                break
            post_id = obj.get("id")
            if post_id not in pending:
                raise BackendProtocolError(f"unexpected or duplicate id in response: {post_id!r}")
            try:
                p = check_probability(obj["p_positive"], f"p_positive for {post_id}")
            except (KeyError, TypeError, ValueError) as exc:
                raise BackendProtocolError(f"bad response for id {post_id!r}: {exc}") from None
            received[post_id] = p
            pending.discard(post_id)
        if pending:
            raise BackendProtocolError(f"missing responses for ids: {sorted(pending)[:5]}")
        return [
            SentimentPrediction.from_probability(post_id, received[post_id], self.backend_id)
            for post_id in ids
        ]

    def close(self) -> None:
        if self._closer:
            try:
                self._closer()
            except Exception:
                pass


def score_batch(backend, texts: Iterable[NormalizedText]) -> list[SentimentPrediction]:
    """Score normalized texts; output order and length match the input."""
    items = [(nt.source_id, nt.value) for nt in texts]
    if not items:
        return []
    return backend.score(items)


def evaluate(
    predictions: Sequence[SentimentPrediction], gold: Mapping[str, str]
) -> EvalMetrics:
    """Confusion-matrix metrics for the positive class."""
    pred_ids = {p.post_id for p in predictions}
    if len(pred_ids) != len(predictions):
        raise ValueError("duplicate prediction ids")
    if pred_ids != set(gold):
        raise ValueError("prediction ids do not match gold ids")
    tp = fp = fn = tn = 0
    for pred in predictions:
        actual = gold[pred.post_id]
        if pred.label == POSITIVE and actual == POSITIVE:
            tp += 1
        elif pred.label == POSITIVE and actual == NEGATIVE:
            fp += 1
        elif pred.label == NEGATIVE and actual == POSITIVE:
            fn += 1
        else:
            tn += 1
    n = tp + fp + fn + tn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalMetrics(
        accuracy=(tp + tn) / n if n else 0.0,
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
    )
