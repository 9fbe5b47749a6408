"""Grid search over (C, gamma) scored by stratified k-fold cross-validation."""
from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .dataset import Dataset, LabelScheme, stratified_folds
from .errors import ConvergenceError
from .metrics import accuracy
from .multiclass import predict_batch, train_ovo
from .smo import TrainConfig

log = logging.getLogger(__name__)

DEFAULT_C = (0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0)
DEFAULT_GAMMA = (0.01, 0.1, 1.0, 10.0, 100.0)


def _check_values(name, values):
    if not values:
        raise ValueError(f"{name} must not be empty")
    if any(not v > 0 for v in values):
        raise ValueError(f"{name} must be positive")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly increasing")


@dataclass(frozen=True)
class GridSpec:
    c_values: tuple[float, ...] = DEFAULT_C
    gamma_values: tuple[float, ...] = DEFAULT_GAMMA
    folds: int = 5
    seed: int = 0
    kkt_tolerance: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "c_values", tuple(float(c) for c in self.c_values))
        object.__setattr__(self, "gamma_values", tuple(float(g) for g in self.gamma_values))
        _check_values("c_values", self.c_values)
        _check_values("gamma_values", self.gamma_values)
        if self.folds < 2:
            raise ValueError("folds must be >= 2")


@dataclass(frozen=True)
class CellResult:
    c: float
    gamma: float
    fold_accuracies: tuple[float, ...]
    failed_folds: tuple[int, ...] = ()

    @property
    def mean(self) -> float:
        return sum(self.fold_accuracies) / len(self.fold_accuracies)

    @property
    def failed(self) -> bool:
        return bool(self.failed_folds)


@dataclass(frozen=True)
class GridResult:
    cells: tuple[CellResult, ...]  # c-major, gamma-minor order
    best: CellResult
    rule: str = field(default="max mean CV accuracy; ties -> smaller C, then smaller gamma")

    @property
    def selected(self) -> tuple[float, float]:
        return self.best.c, self.best.gamma

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["c", "gamma", "fold", "accuracy"])
        for cell in self.cells:
            for k, acc in enumerate(cell.fold_accuracies):
                w.writerow([repr(cell.c), repr(cell.gamma), k, repr(acc)])
            w.writerow([repr(cell.c), repr(cell.gamma), "mean", repr(cell.mean)])
        return buf.getvalue()


def _score_fold(args):
    train, test, scheme, config = args
    try:
        model = train_ovo(train, scheme, config)
    except ConvergenceError as exc:
        log.warning("C=%g gamma=%g: %s", config.c, config.kernel.gamma, exc)
        return None
    truth = [scheme(l) for l in test.labels]
    return accuracy(truth, predict_batch(model, test))


def _fold_tasks(train: Dataset, scheme: LabelScheme, config: TrainConfig, folds: int, seed: int):
    labels = [scheme(l) for l in train.labels]
    parts = stratified_folds(labels, folds, seed)
    tasks = []
    for k, held in enumerate(parts):
        held_set = set(held)
        rest = [i for i in range(len(train)) if i not in held_set]
        tasks.append((train.subset(rest, f"{train.source}#cv{k}-train"),
                      train.subset(held, f"{train.source}#cv{k}-test"), scheme, config))
    return tasks


def cross_validate(train: Dataset, scheme: LabelScheme, config: TrainConfig,
                   folds: int = 5, seed: int = 0) -> list[float]:
    """Per-fold accuracies; a fold whose training fails to converge scores 0."""
    out = []
    for task in _fold_tasks(train, scheme, config, folds, seed):
        acc = _score_fold(task)
        out.append(0.0 if acc is None else acc)
    return out


def select_best(cells) -> CellResult:
    best = None
    for cell in sorted(cells, key=lambda c: (c.c, c.gamma)):
        if best is None or cell.mean > best.mean:
            best = cell
    return best


def grid_search(train: Dataset, scheme: LabelScheme, grid: GridSpec | None = None,
                jobs: int = 1) -> GridResult:
    grid = grid or GridSpec()
    keys = [(c, g) for c in grid.c_values for g in grid.gamma_values]
    tasks, owners = [], []
    for cell_index, (c, g) in enumerate(keys):
        config = TrainConfig.of(c, g, kkt_tolerance=grid.kkt_tolerance)
        for fold, task in enumerate(_fold_tasks(train, scheme, config, grid.folds, grid.seed)):
            tasks.append(task)
            owners.append((cell_index, fold))

    if jobs is None or jobs < 1:
        jobs = os.cpu_count() or 1
    if jobs == 1:
        scores = [_score_fold(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(_score_fold, tasks))

    per_cell = [[0.0] * grid.folds for _ in keys]
    failed = [[] for _ in keys]
    for (cell_index, fold), acc in zip(owners, scores):
        if acc is None:
            failed[cell_index].append(fold)
        else:
            per_cell[cell_index][fold] = acc
    cells = tuple(CellResult(c, g, tuple(per_cell[k]), tuple(failed[k]))
                  for k, (c, g) in enumerate(keys))
    best = select_best(cells)
    log.info("grid search selected C=%g gamma=%g (mean CV accuracy %.4f)", best.c, best.gamma, best.mean)
    return GridResult(cells, best)


def parse_values(text: str) -> tuple[float, ...]:
    """Parse a comma-separated list of numbers such as ``"0.1,1,10"``."""
    return tuple(float(t) for t in text.split(",") if t.strip())
