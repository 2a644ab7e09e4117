"""Rank-based evaluation metrics with deterministic tie handling.

Spearman is the Pearson correlation of average ranks; Kendall is the tau-b
variant; hits@k intersects the top-k sets with ties broken by value
descending then node index ascending.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np


@dataclass
class MetricSet:
    spearman: float
    kendall_tau: float
    hits_at_k: int
    mae: float
    k: int = 10

    def as_dict(self) -> dict:
        return {
            "spearman": self.spearman,
            "kendall_tau": self.kendall_tau,
            f"hits_at_{self.k}": self.hits_at_k,
            "mae": self.mae,
        }


def average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n, with tied values assigned the mean of their rank block."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(n, dtype=float)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        return math.nan
    return float(xc @ yc) / denom


def spearman(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError("length mismatch between prediction and truth")
    if len(pred) < 2:
        raise ValueError("rank correlation needs at least 2 values")
    rho = _pearson(average_ranks(pred), average_ranks(truth))
    if math.isnan(rho):
        warnings.warn("spearman undefined for a constant vector; returning NaN", stacklevel=2)
    return rho


def kendall_tau(pred, truth) -> float:
    """Kendall tau-b via pair counting."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError("length mismatch between prediction and truth")
    n = len(pred)
    if n < 2:
        raise ValueError("rank correlation needs at least 2 values")
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = pred[i] - pred[j]
            dy = truth[i] - truth[j]
            if dx == 0 and dy == 0:
                ties_x += 1
                ties_y += 1
            elif dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - ties_x) * (n0 - ties_y))
    if denom == 0.0:
        warnings.warn("kendall tau undefined for a constant vector; returning NaN", stacklevel=2)
        return math.nan
    return (concordant - discordant) / denom


def top_k_indices(values, k: int) -> list[int]:
    """Indices of the k largest values; ties resolved by smaller index first."""
    values = np.asarray(values, dtype=float)
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    return order[:k]


def hits_at_k(pred, truth, k: int = 10) -> int:
    return len(set(top_k_indices(pred, k)) & set(top_k_indices(truth, k)))


def mean_absolute_error(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError("length mismatch between prediction and truth")
    return float(np.abs(pred - truth).mean())


def rank_metrics(pred, truth, k: int = 10) -> MetricSet:
    """All evaluation metrics for one prediction/ground-truth pair."""
    return MetricSet(
        spearman=spearman(pred, truth),
        kendall_tau=kendall_tau(pred, truth),
        hits_at_k=hits_at_k(pred, truth, k),
        mae=mean_absolute_error(pred, truth),
        k=k,
    )
