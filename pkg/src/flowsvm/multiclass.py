"""One-vs-one composition of binary SVMs with majority voting."""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, LabelScheme, StandardScaler, class_counts, fit_scaler
from .errors import ConvergenceError, DataError
from .smo import BinarySvmModel, TrainConfig, train_binary


@dataclass(frozen=True)
class OvoModel:
    classes: tuple[str, ...]
    models: dict  # (i, j) with i < j -> BinarySvmModel, +1 means classes[i]
    scaler: StandardScaler
    scheme: LabelScheme

    def __post_init__(self):
        k = len(self.classes)
        expected = set(itertools.combinations(range(k), 2))
        if set(self.models) != expected:
            raise ValueError(f"need exactly one binary model per class pair ({len(expected)}), "
                             f"got {len(self.models)}")
        for (i, j), m in self.models.items():
            if tuple(m.pair) != (self.classes[i], self.classes[j]):
                raise ValueError(f"model for pair {(i, j)} has labels {m.pair}")

    @property
    def config(self) -> TrainConfig:
        return next(iter(self.models.values())).config

    def votes(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Vote counts and summed |decision value| per class for standardized rows."""
        x = np.atleast_2d(x)
        n, k = len(x), len(self.classes)
        votes = np.zeros((n, k), dtype=int)
        margin = np.zeros((n, k))
        rows = np.arange(n)
        for (i, j), m in sorted(self.models.items()):
            d = m.decision_values(x)
            winner = np.where(d > 0, i, j)
            votes[rows, winner] += 1
            margin[rows, winner] += np.abs(d)
        return votes, margin


def _pair_job(args):
    x, y, config, pair = args
    try:
        return train_binary(x, y, config, pair=pair)
    except ConvergenceError as exc:
        exc.pair = pair
        raise


def train_ovo(train: Dataset, scheme: LabelScheme, config: TrainConfig,
              jobs: int = 1) -> OvoModel:
    labels = [scheme(l) for l in train.labels]
    counts = class_counts(labels)
    classes = tuple(c for c in scheme.classes if c in counts)
    if len(classes) < 2:
        raise DataError(f"training data has fewer than 2 classes under {scheme.id}")
    for c in classes:
        if counts[c] < 2:
            raise DataError(f"class {c} has {counts[c]} sample(s) under {scheme.id}; need at least 2")

    scaler = fit_scaler(train)
    x = scaler.transform(train.features)
    lab = np.array(labels, dtype=object)
    pairs = list(itertools.combinations(range(len(classes)), 2))
    tasks = []
    for i, j in pairs:
        mask = (lab == classes[i]) | (lab == classes[j])
        y = np.where(lab[mask] == classes[i], 1.0, -1.0)
        tasks.append((x[mask], y, config, (classes[i], classes[j])))

    if jobs is None or jobs < 1:
        jobs = os.cpu_count() or 1
    if jobs == 1 or len(tasks) == 1:
        fitted = [_pair_job(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            fitted = list(pool.map(_pair_job, tasks))
    return OvoModel(classes, dict(zip(pairs, fitted)), scaler, scheme)


def _decide(votes: np.ndarray, margin: np.ndarray) -> np.ndarray:
    # most votes, then largest summed |margin|, then class-list order
    top = votes == votes.max(axis=1, keepdims=True)
    masked = np.where(top, margin, -np.inf)
    return np.argmax(masked, axis=1)


def predict_matrix(model: OvoModel, features) -> list[str]:
    """Predict from raw (unstandardized) feature rows."""
    features = np.asarray(features, dtype=float)
    if features.size == 0:
        return []
    votes, margin = model.votes(model.scaler.transform(np.atleast_2d(features)))
    return [model.classes[k] for k in _decide(votes, margin)]


def predict(model: OvoModel, sample) -> str:
    return predict_matrix(model, [sample.feature_vector()])[0]


def predict_batch(model: OvoModel, data) -> list[str]:
    if data is None:
        return []
    if isinstance(data, Dataset):
        return predict_matrix(model, data.features)
    samples = list(data)
    if not samples:
        return []
    return predict_matrix(model, [s.feature_vector() for s in samples])
