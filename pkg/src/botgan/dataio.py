"""Account-feature datasets: container, BDF binary format, CSV import, scaling,
stratified splitting and a seeded synthetic generator.
"""

from __future__ import annotations

import csv
import json
import math
import struct
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError, FormatError, ManifestError, NumericError, ParseError, ShapeError
from .rng import stream

HUMAN = 0
BOT = 1
UNLABELED = 255

BDF_MAGIC = b"BDF1"
BDF_VERSION = 1


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray  # (n, d) float32
    labels: np.ndarray  # (n,) uint8 in {0, 1, 255}
    feature_names: tuple[str, ...]
    created_at_index: int | None = None
    followers_raw: np.ndarray | None = None
    posts_raw: np.ndarray | None = None

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float32)
        if feats.ndim != 2:
            raise ShapeError(f"features must be 2-D, got shape {feats.shape}")
        n, d = feats.shape
        labels = np.ascontiguousarray(self.labels, dtype=np.uint8)
        if labels.shape != (n,):
            raise ShapeError(f"labels shape {labels.shape} != ({n},)")
        if not np.all(np.isin(labels, (HUMAN, BOT, UNLABELED))):
            raise DomainError("labels must be 0 (human), 1 (bot) or 255 (unlabeled)")
        names = tuple(str(s) for s in self.feature_names)
        if len(names) != d:
            raise ShapeError(f"{len(names)} feature names for {d} columns")
        if self.created_at_index is not None and not 0 <= self.created_at_index < d:
            raise ShapeError(f"created_at_index {self.created_at_index} out of range for d={d}")
        if (self.followers_raw is None) != (self.posts_raw is None):
            raise ShapeError("followers_raw and posts_raw must be given together")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)
        for name in ("followers_raw", "posts_raw"):
            raw = getattr(self, name)
            if raw is not None:
                raw = np.ascontiguousarray(raw, dtype=np.float64)
                if raw.shape != (n,):
                    raise ShapeError(f"{name} shape {raw.shape} != ({n},)")
                object.__setattr__(self, name, raw)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def has_raw_aux(self) -> bool:
        return self.followers_raw is not None

    def labeled_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels != UNLABELED)

    def class_counts(self) -> dict[int, int]:
        return {HUMAN: int(np.sum(self.labels == HUMAN)), BOT: int(np.sum(self.labels == BOT)),
                UNLABELED: int(np.sum(self.labels == UNLABELED))}

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return replace(
            self,
            features=self.features[rows],
            labels=self.labels[rows],
            followers_raw=None if self.followers_raw is None else self.followers_raw[rows],
            posts_raw=None if self.posts_raw is None else self.posts_raw[rows],
        )

    def labeled(self) -> "Dataset":
        return self.subset(self.labeled_indices())

    def select_columns(self, columns: Sequence[int]) -> "Dataset":
        columns = [int(c) for c in columns]
        created = None
        if self.created_at_index is not None:
            if self.created_at_index in columns:
                created = columns.index(self.created_at_index)
            else:
                warnings.warn(
                    f"creation-time feature {self.feature_names[self.created_at_index]!r} "
                    "dropped by column selection",
                    stacklevel=2,
                )
        return replace(
            self,
            features=self.features[:, columns],
            feature_names=tuple(self.feature_names[c] for c in columns),
            created_at_index=created,
        )

    def columns_by_name(self, names: Sequence[str]) -> "Dataset":
        index = {n: i for i, n in enumerate(self.feature_names)}
        missing = [n for n in names if n not in index]
        if missing:
            raise ShapeError(
                f"{len(missing)} of {len(names)} expected features missing from dataset "
                f"(d={self.n_features}), e.g. {missing[:3]}"
            )
        return self.select_columns([index[n] for n in names])

    def equals(self, other: "Dataset") -> bool:
        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.dtype == b.dtype and a.shape == b.shape and a.tobytes() == b.tobytes()

        return (
            same(self.features, other.features)
            and same(self.labels, other.labels)
            and self.feature_names == other.feature_names
            and self.created_at_index == other.created_at_index
            and same(self.followers_raw, other.followers_raw)
            and same(self.posts_raw, other.posts_raw)
        )


# --- BDF v1 ---------------------------------------------------------------

def write_bdf(dataset: Dataset, path) -> None:
    manifest = {
        "n_rows": dataset.n_rows,
        "n_cols": dataset.n_features,
        "feature_names": list(dataset.feature_names),
        "has_labels": True,
        "created_at_index": dataset.created_at_index,
        "has_raw_aux": dataset.has_raw_aux,
    }
    blob = json.dumps(manifest).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(BDF_MAGIC)
        fh.write(struct.pack("<II", BDF_VERSION, len(blob)))
        fh.write(blob)
        fh.write(dataset.features.astype("<f4", copy=False).tobytes(order="C"))
        fh.write(dataset.labels.tobytes())
        if dataset.has_raw_aux:
            fh.write(dataset.followers_raw.astype("<f8", copy=False).tobytes())
            fh.write(dataset.posts_raw.astype("<f8", copy=False).tobytes())


def _take(buf: bytes, offset: int, size: int, what: str) -> bytes:
    if offset + size > len(buf):
        raise FormatError(
            f"truncated payload: {what} needs {size} bytes at offset {offset}, "
            f"only {len(buf) - offset} available"
        )
    return buf[offset:offset + size]


def read_bdf(path) -> Dataset:
    buf = Path(path).read_bytes()
    try:
        return _decode_bdf(buf)
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _decode_bdf(buf: bytes) -> Dataset:
    magic = _take(buf, 0, 4, "magic")
    if magic != BDF_MAGIC:
        raise FormatError(f"bad magic {magic!r} at offset 0 (expected {BDF_MAGIC!r})")
    version, mlen = struct.unpack("<II", _take(buf, 4, 8, "header"))
    if version != BDF_VERSION:
        raise FormatError(f"unsupported BDF version {version} at offset 4")
    try:
        manifest = json.loads(_take(buf, 12, mlen, "manifest").decode("utf-8"))
        n, d = int(manifest["n_rows"]), int(manifest["n_cols"])
        names = manifest["feature_names"]
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"malformed manifest at offset 12: {exc}") from exc
    off = 12 + mlen
    feats = np.frombuffer(_take(buf, off, 4 * n * d, "features"), dtype="<f4").reshape(n, d)
    off += 4 * n * d
    if manifest.get("has_labels", True):
        labels = np.frombuffer(_take(buf, off, n, "labels"), dtype=np.uint8)
        off += n
    else:
        labels = np.full(n, UNLABELED, dtype=np.uint8)
    followers = posts = None
    if manifest.get("has_raw_aux", False):
        followers = np.frombuffer(_take(buf, off, 8 * n, "followers_raw"), dtype="<f8")
        off += 8 * n
        posts = np.frombuffer(_take(buf, off, 8 * n, "posts_raw"), dtype="<f8")
        off += 8 * n
    if off != len(buf):
        raise FormatError(f"{len(buf) - off} unexpected trailing bytes at offset {off}")
    return Dataset(
        features=feats.astype(np.float32),
        labels=labels.copy(),
        feature_names=tuple(names),
        created_at_index=manifest.get("created_at_index"),
        followers_raw=None if followers is None else followers.astype(np.float64),
        posts_raw=None if posts is None else posts.astype(np.float64),
    )


# --- CSV import -----------------------------------------------------------

@dataclass
class CsvManifest:
    feature_names: list[str]
    label_column: str
    followers_column: str | None = None
    posts_column: str | None = None
    created_column: str | None = None

    @classmethod
    def from_json(cls, path) -> "CsvManifest":
        data = json.loads(Path(path).read_text())
        try:
            return cls(**data)
        except TypeError as exc:
            raise ManifestError(f"{path}: {exc}") from exc


_LABELS = {"human": HUMAN, "0": HUMAN, "bot": BOT, "1": BOT, "unlabeled": UNLABELED, "255": UNLABELED, "": UNLABELED}


def import_csv(path, manifest: CsvManifest) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file, header row required") from None
        col = {h: i for i, h in enumerate(header)}
        if manifest.label_column not in col:
            raise ManifestError(f"{path}: label column {manifest.label_column!r} not in header")
        missing = [f for f in manifest.feature_names if f not in col]
        if missing:
            raise ManifestError(f"{path}: feature columns missing from header: {missing}")
        raw_cols = [manifest.followers_column, manifest.posts_column]
        if (raw_cols[0] is None) != (raw_cols[1] is None):
            raise ManifestError("followers_column and posts_column must be given together")
        for c in raw_cols:
            if c is not None and c not in col:
                raise ManifestError(f"{path}: raw column {c!r} not in header")

        feats, labels, followers, posts = [], [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            values = []
            for name in manifest.feature_names:
                values.append(_parse_float(row, col[name], line_no, name, path))
            feats.append(values)
            lab = row[col[manifest.label_column]].strip().lower() if col[manifest.label_column] < len(row) else ""
            if lab not in _LABELS:
                raise ParseError(f"{path}: line {line_no}, column {manifest.label_column!r}: bad label {lab!r}")
            labels.append(_LABELS[lab])
            if raw_cols[0] is not None:
                followers.append(_parse_float(row, col[raw_cols[0]], line_no, raw_cols[0], path))
                posts.append(_parse_float(row, col[raw_cols[1]], line_no, raw_cols[1], path))

    created = None
    if manifest.created_column is not None:
        if manifest.created_column not in manifest.feature_names:
            raise ManifestError(f"created_column {manifest.created_column!r} is not a listed feature")
        created = manifest.feature_names.index(manifest.created_column)
    d = len(manifest.feature_names)
    return Dataset(
        features=np.array(feats, dtype=np.float64).reshape(-1, d),
        labels=np.array(labels, dtype=np.uint8),
        feature_names=tuple(manifest.feature_names),
        created_at_index=created,
        followers_raw=np.array(followers) if raw_cols[0] is not None else None,
        posts_raw=np.array(posts) if raw_cols[0] is not None else None,
    )


def _parse_float(row, idx, line_no, name, path) -> float:
    cell = row[idx].strip() if idx < len(row) else ""
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"{path}: line {line_no}, column {name!r}: cannot parse {cell!r} as a number") from None


# --- scaling --------------------------------------------------------------

@dataclass(frozen=True)
class ScalingRecord:
    mins: np.ndarray
    maxs: np.ndarray

    def to_json(self) -> dict:
        return {"min": self.mins.tolist(), "max": self.maxs.tolist()}

    def inverse(self, scaled: np.ndarray) -> np.ndarray:
        return scaled * (self.maxs - self.mins) + self.mins


def minmax_scale(dataset: Dataset) -> tuple[Dataset, ScalingRecord]:
    """Map each column onto [0, 1]; constant columns become 0."""
    x = dataset.features.astype(np.float64)
    if not np.all(np.isfinite(x)):
        bad = np.argwhere(~np.isfinite(x))[0]
        raise NumericError(f"non-finite value at row {bad[0]}, feature {dataset.feature_names[bad[1]]!r}")
    if x.shape[0] == 0:
        return dataset, ScalingRecord(np.zeros(x.shape[1]), np.zeros(x.shape[1]))
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (x - lo) / safe, 0.0)
    return replace(dataset, features=np.clip(scaled, 0.0, 1.0)), ScalingRecord(lo, hi)


# --- splitting ------------------------------------------------------------

@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray


def _apportion(total: int, counts: dict[int, int], capacity: dict[int, int]) -> dict[int, int]:
    """Largest-remainder allocation of ``total`` rows across classes."""
    n = sum(counts.values())
    quotas = {c: total * k / n for c, k in counts.items()}
    alloc = {c: min(int(math.floor(q)), capacity[c]) for c, q in quotas.items()}
    order = sorted(counts, key=lambda c: (-(quotas[c] - math.floor(quotas[c])), c))
    while sum(alloc.values()) < total:
        progressed = False
        for c in order:
            if sum(alloc.values()) == total:
                break
            if alloc[c] < capacity[c]:
                alloc[c] += 1
                progressed = True
        if not progressed:
            raise DomainError(f"cannot place {total} rows within class capacities {capacity}")
    return alloc


def split_80_10_10(dataset: Dataset, rng: np.random.Generator) -> SplitIndices:
    """Stratified 80/10/10 split of the labeled rows.

    The test and validation sizes are ``floor(n / 10)`` each and are shared
    between classes by largest remainder, so every split holds each class
    within one row of its global proportion.
    """
    labeled = dataset.labeled_indices()
    n = labeled.size
    if n < 10:
        raise DomainError(f"need at least 10 labeled rows to split, got {n}")
    by_class = {c: labeled[dataset.labels[labeled] == c] for c in (HUMAN, BOT)}
    by_class = {c: idx for c, idx in by_class.items() if idx.size}
    counts = {c: idx.size for c, idx in by_class.items()}
    n_hold = n // 10
    test_alloc = _apportion(n_hold, counts, counts)
    remaining = {c: counts[c] - test_alloc[c] for c in counts}
    val_alloc = _apportion(n_hold, counts, remaining)

    train, val, test = [], [], []
    for c, idx in by_class.items():
        perm = idx[rng.permutation(idx.size)]
        t, v = test_alloc[c], val_alloc[c]
        test.append(perm[:t])
        val.append(perm[t:t + v])
        train.append(perm[t + v:])
    return SplitIndices(
        train=np.sort(np.concatenate(train)),
        validation=np.sort(np.concatenate(val)),
        test=np.sort(np.concatenate(test)),
    )


# --- synthetic data -------------------------------------------------------

@dataclass
class SynthConfig:
    n_rows: int = 10_000
    n_features: int = 100
    bot_fraction: float = 0.27
    cluster_separation: float = 0.8
    boolean_feature_fraction: float = 0.1
    seed: int = 0
    noise_scale: float = 0.1  # per-feature standard deviation of each cluster

    def validate(self) -> None:
        if self.n_rows < 1:
            raise ConfigError("n_rows must be positive")
        if self.n_features < 2:
            raise ConfigError("n_features must be >= 2")
        if not 0.0 < self.bot_fraction < 1.0:
            raise ConfigError("bot_fraction must lie in (0, 1)")
        if self.cluster_separation < 0:
            raise ConfigError("cluster_separation must be >= 0")
        if not 0.0 <= self.boolean_feature_fraction <= 1.0:
            raise ConfigError("boolean_feature_fraction must lie in [0, 1]")
        if self.noise_scale <= 0:
            raise ConfigError("noise_scale must be positive")


def _truncated_normal(rng: np.random.Generator, mean: np.ndarray, sd: float) -> np.ndarray:
    out = rng.normal(mean, sd)
    bad = (out < 0.0) | (out > 1.0)
    while np.any(bad):
        out[bad] = rng.normal(np.broadcast_to(mean, out.shape)[bad], sd)
        bad = (out < 0.0) | (out > 1.0)
    return out


def synth_generate(config: SynthConfig) -> Dataset:
    """Two truncated-Gaussian clusters in [0, 1]^d, humans=0 and bots=1.

    Column 0 is ``created`` (account age proxy). Cluster means sit at
    ``base -/+ separation/2 * u`` for a seeded random unit vector ``u``.
    """
    config.validate()
    n, d = config.n_rows, config.n_features
    rng = stream(config.seed, "synth")
    n_bots = int(round(config.bot_fraction * n))
    labels = np.zeros(n, dtype=np.uint8)
    labels[:n_bots] = BOT
    labels = labels[rng.permutation(n)]

    base = rng.uniform(0.3, 0.7, size=d)
    u = rng.normal(size=d)
    u /= np.linalg.norm(u)
    shift = 0.5 * config.cluster_separation * u
    means = np.where(labels[:, None] == BOT, base + shift, base - shift)
    x = _truncated_normal(rng, means, config.noise_scale)

    n_bool = min(int(round(config.boolean_feature_fraction * d)), d - 1)
    bool_cols = np.sort(rng.choice(np.arange(1, d), size=n_bool, replace=False)) if n_bool else np.array([], int)
    x[:, bool_cols] = (x[:, bool_cols] > base[bool_cols]).astype(np.float64)

    # bots: fewer followers, more posts
    mu_f = np.where(labels == BOT, 3.0, 5.0)
    mu_p = np.where(labels == BOT, 7.0, 6.0)
    followers = np.floor(rng.lognormal(mu_f, 1.5))
    posts = np.floor(rng.lognormal(mu_p, 1.2))

    is_bool = set(bool_cols.tolist())
    names = ["created"] + [f"f{j:03d}" + ("_bool" if j in is_bool else "") for j in range(1, d)]
    return Dataset(
        features=x,
        labels=labels,
        feature_names=tuple(names),
        created_at_index=0,
        followers_raw=followers,
        posts_raw=posts,
    )
