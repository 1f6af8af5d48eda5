"""Evaluation: classification metrics, impact mitigation, F1 by account age,
generator closeness and augmentation sweeps, plus CSV/JSON report writers."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import nncore
from .dataio import HUMAN, Dataset
from .errors import DomainError, ShapeError
from .gan import augment_dataset, feature_dim_of, generate_samples
from .nncore import MlpParams
from .rng import derive_seed, stream


@dataclass(frozen=True)
class ClassMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricsRecord:
    binary: ClassMetrics  # bot is the positive class
    macro: ClassMetrics  # per-class precision/recall averaged; f1 is their harmonic mean
    tp: int
    fp: int
    fn: int
    tn: int

    def as_dict(self) -> dict:
        out = {f"{k}": v for k, v in asdict(self.binary).items()}
        out.update({f"macro_{k}": v for k, v in asdict(self.macro).items()})
        out.update(tp=self.tp, fp=self.fp, fn=self.fn, tn=self.tn)
        return out


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def _harmonic(p: float, r: float) -> float:
    if p == r:
        return p  # avoid a rounding step when the mean is trivially exact
    return 2 * p * r / (p + r) if p + r else 0.0


def classification_metrics(predictions, labels) -> MetricsRecord:
    pred = np.asarray(predictions).astype(np.int64).ravel()
    true = np.asarray(labels).astype(np.int64).ravel()
    if pred.shape != true.shape:
        raise ShapeError(f"{pred.size} predictions for {true.size} labels")
    if pred.size == 0:
        raise DomainError("metrics need at least one prediction")
    tp = int(np.sum((pred == 1) & (true == 1)))
    fp = int(np.sum((pred == 1) & (true == 0)))
    fn = int(np.sum((pred == 0) & (true == 1)))
    tn = int(np.sum((pred == 0) & (true == 0)))
    n = pred.size
    acc = (tp + tn) / n
    p1, r1 = _ratio(tp, tp + fp), _ratio(tp, tp + fn)
    f1 = _ratio(2 * tp, 2 * tp + fp + fn)  # equals 2PR/(P+R) without the extra rounding
    p0, r0 = _ratio(tn, tn + fn), _ratio(tn, tn + fp)
    mp, mr = (p1 + p0) / 2, (r1 + r0) / 2
    return MetricsRecord(ClassMetrics(acc, p1, r1, f1), ClassMetrics(acc, mp, mr, _harmonic(mp, mr)),
                         tp, fp, fn, tn)


# --- impact ---------------------------------------------------------------

@dataclass(frozen=True)
class ImpactRecord:
    followers: float
    posts: float
    impact: float


@dataclass(frozen=True)
class ImpactScores:
    followers: np.ndarray
    posts: np.ndarray
    impact: np.ndarray
    degenerate: bool  # every follower*post product was zero

    def records(self) -> list[ImpactRecord]:
        return [ImpactRecord(float(f), float(p), float(i))
                for f, p, i in zip(self.followers, self.posts, self.impact)]


def impact_scores(followers, posts) -> ImpactScores:
    """``impact_i = F_i P_i / sum_j F_j P_j``."""
    f = np.asarray(followers, dtype=np.float64).ravel()
    p = np.asarray(posts, dtype=np.float64).ravel()
    if f.shape != p.shape:
        raise ShapeError("followers and posts differ in length")
    if np.any(f < 0) or np.any(p < 0) or not (np.all(np.isfinite(f)) and np.all(np.isfinite(p))):
        raise DomainError("followers and posts must be finite and non-negative")
    prod = f * p
    total = prod.sum()
    if total == 0:
        return ImpactScores(f, p, np.zeros_like(prod), True)
    return ImpactScores(f, p, prod / total, False)


def impact_mitigation(predictions, labels, impacts) -> float:
    """Signed impact sum: +impact for each correct decision, -impact for each error."""
    imp = impacts.impact if isinstance(impacts, ImpactScores) else np.asarray(impacts, dtype=np.float64).ravel()
    pred = np.asarray(predictions).ravel()
    true = np.asarray(labels).ravel()
    if not (pred.shape == true.shape == imp.shape):
        raise ShapeError("predictions, labels and impacts must have equal lengths")
    total = imp.sum()
    if total == 0:
        return 0.0
    if abs(total - 1.0) > 1e-9:
        raise DomainError(f"impacts must be normalised over the evaluation set (sum={total!r})")
    ok = pred == true
    correct, wrong = float(imp[ok].sum()), float(imp[~ok].sum())
    # dividing by the realised total keeps rounding from leaving [-1, 1]
    return (correct - wrong) / (correct + wrong)


def dataset_impacts(data: Dataset) -> tuple[ImpactScores, bool]:
    """Impacts from raw counts when present, else from the scaled feature columns
    named like followers/posts (second value flags the scaled fallback)."""
    if data.has_raw_aux:
        return impact_scores(data.followers_raw, data.posts_raw), False
    names = [n.lower() for n in data.feature_names]
    fi = next((i for i, n in enumerate(names) if "follower" in n and "ratio" not in n), None)
    pi = next((i for i, n in enumerate(names) if "status" in n or "post" in n), None)
    if fi is None or pi is None:
        raise DomainError("dataset has no raw follower/post counts and no matching scaled columns")
    return impact_scores(data.features[:, fi], data.features[:, pi]), True


# --- F1 by creation-date percentile --------------------------------------

@dataclass(frozen=True)
class BandF1:
    band_upper_percentile: float
    f1: float
    n_rows: int


def percentile_f1(model_predict_fn: Callable[[np.ndarray], np.ndarray], test_data: Dataset,
                  band_percent: float = 5, cumulative: bool = True) -> list[BandF1]:
    """Bot-positive F1 on creation-date percentile bands, oldest accounts first.

    Band ``j`` covers the first ``ceil(n * j * b / 100)`` rows after a stable
    ascending sort on the creation feature (ties keep row order). Cumulative
    bands grow from 0; disjoint bands hold only the rows added by that step.
    """
    if test_data.created_at_index is None:
        raise DomainError("test data has no creation-time feature")
    band = Fraction(str(band_percent))
    if band <= 0 or Fraction(100) % band != 0:
        raise DomainError(f"band_percent must divide 100, got {band_percent}")
    data = test_data.labeled()
    n = data.n_rows
    if n == 0:
        raise DomainError("no labeled test rows")
    order = np.argsort(data.features[:, data.created_at_index], kind="stable")
    preds = np.asarray(model_predict_fn(data.features)).ravel()[order]
    labels = data.labels[order]
    out, prev = [], 0
    steps = int(Fraction(100) / band)
    for j in range(1, steps + 1):
        upper = band * j
        cut = math.ceil(Fraction(n) * upper / 100)
        lo = 0 if cumulative else prev
        if cut > lo:
            f1 = classification_metrics(preds[lo:cut], labels[lo:cut]).binary.f1
        else:
            f1 = float("nan")
        out.append(BandF1(float(upper), f1, cut - lo))
        prev = cut
    return out


# --- closeness ------------------------------------------------------------

@dataclass(frozen=True)
class ClosenessRow:
    feature_index: int
    feature_name: str
    close_count: int
    close_fraction: float


def closeness_from_samples(samples: np.ndarray, real: Dataset, tolerance: float = 0.05,
                           floor: float = 1e-6) -> list[ClosenessRow]:
    """Count, per feature, samples within ``tolerance * max(|mu|, floor)`` of the
    human mean ``mu``; rows sorted by descending count, then feature index."""
    humans = real.features[real.labels == HUMAN].astype(np.float64)
    if len(humans) == 0:
        raise DomainError("closeness needs at least one human row")
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != real.n_features:
        raise ShapeError(f"samples shape {samples.shape} does not match {real.n_features} features")
    mu = humans.mean(axis=0)
    close = np.abs(samples - mu) <= tolerance * np.maximum(np.abs(mu), floor)
    counts = close.sum(axis=0)
    order = np.lexsort((np.arange(len(counts)), -counts))
    m = len(samples)
    return [ClosenessRow(int(j), real.feature_names[j], int(counts[j]), counts[j] / m if m else 0.0)
            for j in order]


def closeness_analysis(generator: MlpParams, real: Dataset, tolerance: float = 0.05,
                       n_samples: int = 1000, rng: np.random.Generator | None = None) -> list[ClosenessRow]:
    if feature_dim_of(generator) != real.n_features:
        raise ShapeError(f"generator emits {feature_dim_of(generator)} features, data has {real.n_features}")
    if not np.any(real.labels == HUMAN):
        raise DomainError("closeness needs at least one human row")
    samples, _ = generate_samples(generator, n_samples, rng if rng is not None else np.random.default_rng(0))
    return closeness_from_samples(samples, real, tolerance)


# --- augmentation sweep ---------------------------------------------------

@dataclass(frozen=True)
class AugmentationRow:
    fraction: float
    test_accuracy: float
    test_loss: float


def augmentation_sweep(
    dstar_trainer_fn: Callable[[Dataset, int], tuple[float, float]],
    real: Dataset,
    generator: MlpParams,
    fractions: Sequence[float],
    seed: int,
    repeats: int = 10,
) -> list[AugmentationRow]:
    """Mean (accuracy, loss) of ``dstar_trainer_fn(augmented_train, run_seed)``
    over ``repeats`` runs per synthetic fraction. Run seeds depend only on the
    repeat index, so fraction 0 reproduces the unaugmented result."""
    fr = sorted(float(f) for f in fractions)
    if any(not 0.0 <= f <= 1.0 for f in fr):
        raise DomainError("fractions must lie in [0, 1]")
    rows = []
    for fi, f in enumerate(fr):
        accs, losses = [], []
        for r in range(repeats):
            run_seed = derive_seed(seed, "aug_run", r)
            aug = augment_dataset(real, generator, f, stream(seed, "augment", r, fi))
            acc, loss = dstar_trainer_fn(aug, run_seed)
            accs.append(acc)
            losses.append(loss)
        rows.append(AugmentationRow(f, float(np.mean(accs)), float(np.mean(losses))))
    return rows


def hb_eval(discriminator: MlpParams, data: Dataset) -> tuple[float, float]:
    """(accuracy, BCE loss) of the hb head on labeled rows."""
    data = data.labeled()
    logits = nncore.predict(discriminator, data.features)[:, 0]
    loss, _ = nncore.bce_with_logits(logits, data.labels.astype(np.float64))
    return float(np.mean((logits > 0) == (data.labels == 1))), loss


# --- reports --------------------------------------------------------------

def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and (math.isnan(v) or math.isinf(v)):
        return str(v)
    return v


def write_report(rows: Sequence[dict], path, fmt: str = "csv", meta: dict | None = None) -> None:
    rows = [{k: _plain(v) for k, v in r.items()} for r in rows]
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump({"meta": meta or {}, "rows": rows}, fh, indent=2)
        return
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    keys: list[str] = []
    for r in rows:
        keys.extend(k for k in r if k not in keys)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(rows)
