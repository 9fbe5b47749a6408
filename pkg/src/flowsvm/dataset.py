"""Flow-pattern data schema, CSV I/O, label schemes, scaling and splitting.

A :class:`Dataset` is an immutable, ordered collection of :class:`FlowSample`
records. Everything downstream (kernel, solver, OvO) works on plain numpy
feature matrices obtained via :attr:`Dataset.features`.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, LabelError, RowError, SchemaError

FEATURES = (
    "vsl",
    "vsg",
    "visc_l",
    "visc_g",
    "dens_l",
    "dens_g",
    "surface_tension",
    "angle",
    "diameter",
)

CSV_COLUMNS = (
    "vsl_m_s",
    "vsg_m_s",
    "visc_l_pa_s",
    "visc_g_pa_s",
    "dens_l_kg_m3",
    "dens_g_kg_m3",
    "surface_tension_n_m",
    "angle_deg",
    "diameter_m",
    "label",
)


class FlowPattern(str, enum.Enum):
    DB = "DB"
    SS = "SS"
    SW = "SW"
    A = "A"
    I = "I"  # noqa: E741
    B = "B"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, token: str) -> "FlowPattern":
        return cls(token.strip())


@dataclass(frozen=True)
class FlowSample:
    vsl: float
    vsg: float
    visc_l: float
    visc_g: float
    dens_l: float
    dens_g: float
    surface_tension: float
    angle: float
    diameter: float
    label: FlowPattern

    def __post_init__(self):
        problem = _sample_problem(self)
        if problem:
            raise ValueError(problem)

    def feature_vector(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in FEATURES)


def _sample_problem(s: FlowSample) -> str | None:
    values = s.feature_vector()
    for name, v in zip(FEATURES, values):
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            return f"{name} is not a finite number: {v!r}"
    for name in ("vsl", "vsg", "visc_l", "visc_g", "dens_g", "surface_tension", "diameter"):
        if getattr(s, name) <= 0:
            return f"{name} must be positive, got {getattr(s, name)!r}"
    if not s.dens_l > s.dens_g:
        return f"liquid density {s.dens_l!r} must exceed gas density {s.dens_g!r}"
    if not -90.0 <= s.angle <= 90.0:
        return f"angle {s.angle!r} outside [-90, 90]"
    if not isinstance(s.label, FlowPattern):
        return f"label {s.label!r} is not a FlowPattern"
    return None


@dataclass(frozen=True)
class Dataset:
    samples: tuple[FlowSample, ...]
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise DataError("dataset is empty")
        if len({s.label for s in self.samples}) < 2:
            raise DataError("dataset needs at least 2 distinct labels")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @cached_property
    def features(self) -> np.ndarray:
        """``n x 9`` float matrix in :data:`FEATURES` order (read-only)."""
        arr = np.array([s.feature_vector() for s in self.samples], dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def labels(self) -> tuple[FlowPattern, ...]:
        return tuple(s.label for s in self.samples)

    def subset(self, indices: Iterable[int], source: str | None = None) -> "Dataset":
        return Dataset(tuple(self.samples[i] for i in indices),
                       self.source if source is None else source)


# -- label schemes ----------------------------------------------------------

@dataclass(frozen=True)
class LabelScheme:
    id: str
    mapping: dict = field(hash=False)
    classes: tuple[str, ...]

    def __call__(self, label: FlowPattern | str) -> str:
        return self.mapping[FlowPattern(label)]

    @classmethod
    def get(cls, name: str) -> "LabelScheme":
        try:
            return SCHEMES[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown label scheme {name!r}; expected one of "
                             f"{', '.join(SCHEMES)}") from None


_P = FlowPattern
TEST1 = LabelScheme(
    "test1",
    {p: p.value for p in FlowPattern},
    ("DB", "SS", "SW", "A", "I", "B"),
)
TEST2 = LabelScheme(
    "test2",
    {_P.DB: "DB", _P.SS: "ST", _P.SW: "ST", _P.A: "A", _P.I: "I", _P.B: "B"},
    ("DB", "ST", "A", "I", "B"),
)
TEST3 = LabelScheme(
    "test3",
    {_P.DB: "Dispersed", _P.B: "Dispersed",
     _P.SS: "Segregated", _P.SW: "Segregated", _P.A: "Segregated",
     _P.I: "Intermittent"},
    ("Dispersed", "Segregated", "Intermittent"),
)
SCHEMES = {s.id: s for s in (TEST1, TEST2, TEST3)}


@dataclass(frozen=True)
class LabeledData:
    """Raw features with labels already mapped through a scheme."""

    features: np.ndarray
    labels: tuple[str, ...]
    scheme: LabelScheme

    def __len__(self) -> int:
        return len(self.labels)


def relabel(data: Dataset, scheme: LabelScheme) -> LabeledData:
    return LabeledData(data.features, tuple(scheme(l) for l in data.labels), scheme)


def class_counts(labels: Sequence) -> dict:
    counts: dict = {}
    for l in labels:
        counts[l] = counts.get(l, 0) + 1
    return counts


# -- standardization --------------------------------------------------------

@dataclass(frozen=True)
class StandardScaler:
    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        scale = np.asarray(self.scale, dtype=float)
        if mean.shape != scale.shape or mean.ndim != 1:
            raise ValueError("mean and scale must be 1-d arrays of equal length")
        if not np.all(scale > 0):
            raise ValueError("scale entries must be strictly positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", scale)

    def transform(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) / self.scale

    def inverse(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) * self.scale + self.mean


def fit_scaler(train) -> StandardScaler:
    """Population mean/std per feature; zero-variance columns get scale 1."""
    x = train.features if hasattr(train, "features") else np.asarray(train, dtype=float)
    if x.size == 0 or len(x) == 0:
        raise DataError("cannot fit a scaler on an empty dataset")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return StandardScaler(mean, std)


def apply_scaler(scaler: StandardScaler, data) -> np.ndarray:
    x = data.features if hasattr(data, "features") else data
    return scaler.transform(x)


# -- splitting --------------------------------------------------------------

def _group_indices(labels: Sequence) -> dict:
    groups: dict = {}
    for i, l in enumerate(labels):
        groups.setdefault(l, []).append(i)
    return groups


def split_indices(labels: Sequence, test_fraction: float, seed: int):
    """Stratified train/test index split; both returned lists are sorted."""
    if not 0 < test_fraction < 1:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label, idx in _group_indices(labels).items():
        n = len(idx)
        if n < 2:
            raise DataError(f"class {label} has {n} sample(s); stratified split needs at least 2")
        n_test = min(max(math.floor(n * test_fraction + 0.5), 1), n - 1)
        order = rng.permutation(n)
        test.extend(idx[k] for k in order[:n_test])
        train.extend(idx[k] for k in order[n_test:])
    return sorted(train), sorted(test)


def stratified_split(data: Dataset, test_fraction: float = 0.2, seed: int = 0,
                     scheme: LabelScheme | None = None) -> tuple[Dataset, Dataset]:
    """Split ``data`` so each class keeps roughly ``test_fraction`` in the test part.

    Stratification is on base labels unless ``scheme`` is given, in which case
    the scheme's classes are used.
    """
    labels = data.labels if scheme is None else [scheme(l) for l in data.labels]
    train, test = split_indices(labels, test_fraction, seed)
    return (data.subset(train, f"{data.source}#train"),
            data.subset(test, f"{data.source}#test"))


def stratified_folds(labels: Sequence, folds: int, seed: int) -> list[list[int]]:
    """Assign every index to one of ``folds`` stratified folds."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    rng = np.random.default_rng(seed)
    out: list[list[int]] = [[] for _ in range(folds)]
    for label, idx in _group_indices(labels).items():
        if len(idx) < folds:
            raise DataError(f"class {label} has {len(idx)} sample(s); {folds}-fold CV needs at least {folds}")
        for pos, k in enumerate(rng.permutation(len(idx))):
            out[pos % folds].append(idx[k])
    return [sorted(f) for f in out]


# -- CSV --------------------------------------------------------------------

def load_csv(path) -> Dataset:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected header {','.join(CSV_COLUMNS)}") from None
        if tuple(header) != CSV_COLUMNS:
            missing = [c for c in CSV_COLUMNS if c not in header]
            extra = [c for c in header if c not in CSV_COLUMNS]
            raise SchemaError(
                f"{path}: header mismatch (missing: {missing or 'none'}; "
                f"unexpected: {extra or 'none'}); expected {','.join(CSV_COLUMNS)}")
        samples = []
        # row numbers count the header as row 1
        for rowno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_COLUMNS):
                raise RowError(rowno, f"expected {len(CSV_COLUMNS)} fields, got {len(row)}")
            values = []
            for col, cell in zip(CSV_COLUMNS[:-1], row[:-1]):
                try:
                    v = float(cell)
                except ValueError:
                    raise RowError(rowno, f"{col}: not a number: {cell!r}") from None
                if not math.isfinite(v):
                    raise RowError(rowno, f"{col}: non-finite value {cell!r}")
                values.append(v)
            try:
                label = FlowPattern.parse(row[-1])
            except ValueError:
                raise LabelError(rowno, row[-1]) from None
            try:
                samples.append(FlowSample(*values, label=label))
            except ValueError as exc:
                raise RowError(rowno, str(exc)) from None
    if not samples:
        raise DataError(f"{path}: no data rows")
    return Dataset(tuple(samples), str(path))


def save_csv(data: Dataset, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for s in data.samples:
            w.writerow([repr(float(v)) for v in s.feature_vector()] + [s.label.value])
