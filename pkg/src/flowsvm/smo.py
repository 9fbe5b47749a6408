"""Binary soft-margin C-SVC trained with Sequential Minimal Optimization.

The dual problem solved is::

    max  sum(a) - 1/2 * sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0

Working pairs are chosen by the maximal-violating-pair rule and each pair is
optimized analytically, with the result clipped back into the box.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DataError
from .kernel import DEFAULT_FULL_GRAM_CAP, KernelParams, KernelRows, cross_kernel

log = logging.getLogger(__name__)

# curvature floor for (near-)duplicate points
TAU = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    c: float
    kernel: KernelParams
    kkt_tolerance: float = 1e-3
    max_passes: int | None = None  # stalled updates allowed; None -> 10 * n
    max_iter: int | None = None  # hard cap; None -> max(100_000, 1000 * n)
    selection: str = "second-order"  # or "first-order" (maximal violating pair)
    gram_cap: int = DEFAULT_FULL_GRAM_CAP

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"C must be positive, got {self.c!r}")
        if self.selection not in ("first-order", "second-order"):
            raise ValueError(f"unknown working-set selection {self.selection!r}")
        if not self.kkt_tolerance > 0:
            raise ValueError(f"kkt_tolerance must be positive, got {self.kkt_tolerance!r}")

    @classmethod
    def of(cls, c: float, gamma: float, **kw) -> "TrainConfig":
        return cls(c=float(c), kernel=KernelParams(float(gamma)), **kw)


@dataclass(frozen=True)
class BinarySvmModel:
    support_vectors: np.ndarray  # rows of the standardized training matrix
    coef: np.ndarray  # alpha_i * y_i
    bias: float
    config: TrainConfig
    pair: tuple[str, str]  # (label for +1, label for -1)
    dual_objective: float = float("nan")
    iterations: int = 0
    support_indices: np.ndarray | None = field(default=None, compare=False)

    @property
    def n_support(self) -> int:
        return len(self.coef)

    def decision_values(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return cross_kernel(self.config.kernel, x, self.support_vectors) @ self.coef + self.bias

    def predict(self, x) -> list[str]:
        pos, neg = self.pair
        return [pos if v > 0 else neg for v in self.decision_values(x)]


def decision_value(model: BinarySvmModel, x) -> float:
    return float(model.decision_values(np.asarray(x, dtype=float)[None, :])[0])


def dual_objective(alpha, y, k) -> float:
    """Dual objective evaluated directly from a Gram matrix."""
    ay = np.asarray(alpha, dtype=float) * np.asarray(y, dtype=float)
    return float(np.sum(alpha) - 0.5 * ay @ np.asarray(k) @ ay)


def _violating_pair(y, alpha, grad, c):
    """Return (i, j, m, M) for the maximal violating pair."""
    score = -y * grad
    up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
    up_scores = np.where(up, score, -np.inf)
    low_scores = np.where(low, score, np.inf)
    i = int(np.argmax(up_scores))
    j = int(np.argmin(low_scores))
    return i, j, float(up_scores[i]), float(low_scores[j])


def _second_order_j(y, alpha, grad, c, i, k_i, m_up):
    """Pick j maximizing the guaranteed objective gain for the fixed i."""
    score = -y * grad
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
    b = m_up - score
    cand = low & (b > 0)
    if not np.any(cand):
        return None
    a = 2.0 - 2.0 * k_i  # K_ii + K_tt - 2 K_it with unit diagonal
    a = np.where(a > 0, a, TAU)
    gain = np.where(cand, -(b * b) / a, np.inf)
    return int(np.argmin(gain))


def _bias(y, alpha, grad, c) -> float:
    yg = y * grad
    free = (alpha > 0) & (alpha < c)
    if np.any(free):
        return -float(np.mean(yg[free]))
    at_upper = alpha >= c
    ub_mask = (at_upper & (y < 0)) | (~at_upper & (y > 0))
    lb_mask = ~ub_mask
    ub = float(np.min(yg[ub_mask])) if np.any(ub_mask) else np.inf
    lb = float(np.max(yg[lb_mask])) if np.any(lb_mask) else -np.inf
    if not np.isfinite(ub):
        ub = lb
    if not np.isfinite(lb):
        lb = ub
    return -(ub + lb) / 2.0


def train_binary(features, labels, config: TrainConfig, pair=("+1", "-1"),
                 trace: list | None = None) -> BinarySvmModel:
    """Fit a C-SVC on ``features`` with labels in {-1, +1}.

    If ``trace`` is a list, the dual objective after every accepted pair
    update is appended to it (costs an extra O(n) per iteration).
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    n = len(y)
    if x.ndim != 2 or len(x) != n:
        raise ValueError("features must be an n x d matrix matching labels")
    if not np.all((y == 1) | (y == -1)):
        raise ValueError("labels must be -1 or +1")
    if n < 2 or not (np.any(y > 0) and np.any(y < 0)):
        raise DataError(f"binary training needs both classes present (pair {pair})")

    c = float(config.c)
    tol = config.kkt_tolerance
    stall_limit = config.max_passes if config.max_passes is not None else 10 * n
    max_iter = config.max_iter if config.max_iter is not None else max(100_000, 1000 * n)

    rows = KernelRows(config.kernel, x, cap=config.gram_cap)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - e'a, Q_ij = y_i y_j K_ij
    iterations = 0
    stalled = 0
    violation = np.inf
    while True:
        i, j, m_up, m_low = _violating_pair(y, alpha, grad, c)
        violation = m_up - m_low
        if violation <= tol:
            # refresh the gradient to shed accumulated rounding before stopping
            ay = alpha * y
            if rows.full is not None:
                fresh = y * (rows.full @ ay) - 1.0
            else:
                fresh = -np.ones(n)
                for s in np.flatnonzero(alpha):
                    fresh += y * (rows.row(s) * ay[s])
            drift = float(np.max(np.abs(fresh - grad)))
            grad = fresh
            if drift <= tol * 1e-3:
                break
            continue
        if iterations >= max_iter or stalled >= stall_limit:
            raise ConvergenceError(
                f"SMO did not converge for pair {pair} after {iterations} iterations "
                f"(max KKT violation {violation:.3g} > {tol:g})", violation, pair)
        iterations += 1

        k_i = rows.row(i)
        if config.selection == "second-order":
            j2 = _second_order_j(y, alpha, grad, c, i, k_i, m_up)
            if j2 is not None:
                j = j2
        k_j = rows.row(j)
        yi, yj = y[i], y[j]
        eta = k_i[i] + k_j[j] - 2.0 * k_i[j]
        if eta <= 0:
            eta = TAU
        ai_old, aj_old = alpha[i], alpha[j]
        if yi != yj:
            delta = (-grad[i] - grad[j]) / eta
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > c:
                    ai, aj = c, c - diff
            elif aj > c:
                aj, ai = c, c + diff
        else:
            delta = (grad[i] - grad[j]) / eta
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > c:
                if ai > c:
                    ai, aj = c, total - c
            elif aj < 0:
                aj, ai = 0.0, total
            if total > c:
                if aj > c:
                    aj, ai = c, total - c
            elif ai < 0:
                ai, aj = 0.0, total
        d_i, d_j = ai - ai_old, aj - aj_old
        if d_i == 0.0 and d_j == 0.0:
            stalled += 1
            continue
        stalled = 0
        alpha[i], alpha[j] = ai, aj
        grad += y * (k_i * (yi * d_i) + k_j * (yj * d_j))
        if trace is not None:
            trace.append(0.5 * float(np.sum(alpha)) - 0.5 * float(alpha @ grad))

    bias = _bias(y, alpha, grad, c)
    sv = np.flatnonzero(alpha > 0)
    objective = 0.5 * float(np.sum(alpha)) - 0.5 * float(alpha @ grad)
    log.debug("pair %s: %d iterations, %d SVs, violation %.3g", pair, iterations, len(sv), violation)
    return BinarySvmModel(
        support_vectors=x[sv].copy(),
        coef=(alpha * y)[sv],
        bias=bias,
        config=config,
        pair=tuple(pair),
        dual_objective=objective,
        iterations=iterations,
        support_indices=sv,
    )
