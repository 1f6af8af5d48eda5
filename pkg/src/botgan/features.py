"""Information-gain feature ranking and top-k selection."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .dataio import BOT, HUMAN, Dataset
from .errors import DomainError


@dataclass(frozen=True)
class FeatureRanking:
    scores: np.ndarray  # information gain in bits, per feature
    order: np.ndarray  # feature indices, best first
    bin_count: int
    feature_names: tuple[str, ...] = ()
    label_entropy: float = 0.0

    def top(self, k: int) -> np.ndarray:
        return self.order[:k]


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Base-2 entropy along the last axis of a count array, with 0 log 0 = 0."""
    total = counts.sum(axis=-1, keepdims=True)
    p = np.divide(counts, total, out=np.zeros_like(counts, dtype=np.float64), where=total > 0)
    logs = np.log2(p, out=np.zeros_like(p), where=p > 0)
    return -(p * logs).sum(axis=-1)


def discretize(x: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width bin codes on [0, 1] per column; {0,1}-valued columns keep two codes.

    Returns ``(codes, n_codes)`` where ``n_codes[j]`` is 2 for boolean columns
    and ``bins`` otherwise.
    """
    x = np.asarray(x, dtype=np.float64)
    boolean = np.all((x == 0.0) | (x == 1.0), axis=0)
    codes = np.clip(np.floor(np.clip(x, 0.0, 1.0) * bins), 0, bins - 1).astype(np.int64)
    codes[:, boolean] = x[:, boolean].astype(np.int64)
    n_codes = np.where(boolean, 2, bins)
    return codes, n_codes


def information_gain_codes(codes: np.ndarray, labels: np.ndarray, n_codes: int) -> tuple[np.ndarray, float]:
    """IG of each column of integer ``codes`` (n x d, values < n_codes) about binary labels."""
    y = np.asarray(labels, dtype=np.int64)
    n, d = codes.shape
    joint = np.zeros((d, n_codes, 2), dtype=np.float64)
    flat = (np.arange(d)[None, :] * n_codes + codes) * 2 + y[:, None]
    joint.reshape(-1)[:] = np.bincount(flat.ravel(), minlength=d * n_codes * 2)
    h_y = float(_entropy_rows(np.bincount(y, minlength=2).astype(np.float64)))
    p_bin = joint.sum(axis=2) / n
    cond = (p_bin * _entropy_rows(joint)).sum(axis=1)
    ig = np.clip(h_y - cond, 0.0, h_y)
    return ig, h_y


def information_gain(dataset: Dataset, bins: int = 10) -> FeatureRanking:
    """Rank features by H(Y) - H(Y | binned feature), labeled rows only."""
    if bins < 2:
        raise DomainError("bins must be >= 2")
    rows = dataset.labeled_indices()
    y = dataset.labels[rows]
    if rows.size < 2 or not (np.any(y == HUMAN) and np.any(y == BOT)):
        raise DomainError("information gain needs >= 2 labeled rows covering both classes")
    codes, _ = discretize(dataset.features[rows], bins)
    scores, h_y = information_gain_codes(codes, y, bins)
    order = np.argsort(-scores, kind="stable")
    return FeatureRanking(scores, order, bins, dataset.feature_names, h_y)


def select_top_k(dataset: Dataset, ranking: FeatureRanking, k: int) -> Dataset:
    d = dataset.n_features
    if not 1 <= k <= d:
        raise DomainError(f"k must lie in [1, {d}], got {k}")
    if ranking.order.size != d:
        raise DomainError(f"ranking covers {ranking.order.size} features, dataset has {d}")
    return dataset.select_columns(ranking.order[:k])


def write_ranking_csv(ranking: FeatureRanking, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["feature_index", "feature_name", "information_gain", "rank"])
        for rank, idx in enumerate(ranking.order, start=1):
            name = ranking.feature_names[idx] if ranking.feature_names else str(idx)
            w.writerow([int(idx), name, f"{ranking.scores[idx]:.6f}", rank])


def ranking_records(ranking: FeatureRanking) -> list[dict]:
    return [
        {
            "feature_index": int(idx),
            "feature_name": ranking.feature_names[idx] if ranking.feature_names else str(idx),
            "information_gain": float(ranking.scores[idx]),
            "rank": rank,
        }
        for rank, idx in enumerate(ranking.order, start=1)
    ]
