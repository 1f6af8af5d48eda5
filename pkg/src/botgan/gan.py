"""Conventional GAN for bot detection.

The discriminator has a shared trunk and two logits: ``hb`` (human=0 / bot=1)
and ``rf`` (fake=0 / real=1). The generator maps noise to ``d`` sigmoid
features plus a sigmoid *label unit*; rounding the label unit gives each
generated account a human/bot label, which is what makes generator class
balance (and therefore mode collapse) measurable.

Random streams used by the trainers, all derived from one seed via
:func:`botgan.rng.stream`: ``g_init``, ``d_init/<i>``, ``shuffle``, ``noise``,
``d_dropout/<i>``, ``g_dropout`` and ``probe``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import nncore
from .dataio import BOT, HUMAN, Dataset
from .errors import ConfigError, DomainError, ShapeError
from .nncore import MlpParams
from .rng import stream

HB, RF = 0, 1  # discriminator output columns


@dataclass
class GanConfig:
    noise_dim: int = 100
    learning_rate: float = 0.002
    batch_size: int = 256
    epochs: int = 50
    dropout_rate: float = 0.5  # discriminator hidden layers
    hidden_widths: tuple[int, ...] = (128, 128)
    activation: str = "relu"
    feature_dim: int | None = None
    generator_dropout: float = 0.0
    probe_size: int = 1000

    def __post_init__(self):
        self.hidden_widths = tuple(int(w) for w in self.hidden_widths)

    def validate(self) -> None:
        for name in ("noise_dim", "batch_size", "epochs", "probe_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if any(w < 1 for w in self.hidden_widths):
            raise ConfigError("hidden widths must be positive")
        for name in ("dropout_rate", "generator_dropout"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must lie in [0, 1)")
        if self.feature_dim is not None and self.feature_dim < 1:
            raise ConfigError("feature_dim must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_widths"] = list(self.hidden_widths)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "GanConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


# --- networks -------------------------------------------------------------

def generator_specs(config: GanConfig, feature_dim: int) -> list[nncore.LayerSpec]:
    return nncore.dense_specs(
        [config.noise_dim, *config.hidden_widths, feature_dim + 1],
        hidden=config.activation, output="sigmoid",
    )


def discriminator_specs(config: GanConfig, feature_dim: int) -> list[nncore.LayerSpec]:
    return nncore.dense_specs(
        [feature_dim, *config.hidden_widths, 2], hidden=config.activation, output="identity",
    )


def feature_dim_of(generator: MlpParams) -> int:
    return generator.out_dim - 1


def check_pair(generator: MlpParams, discriminator: MlpParams) -> None:
    if discriminator.out_dim != 2:
        raise ShapeError(f"discriminator must emit 2 logits, has {discriminator.out_dim}")
    if feature_dim_of(generator) != discriminator.in_dim:
        raise ShapeError(
            f"generator emits {feature_dim_of(generator)} features, discriminator expects {discriminator.in_dim}"
        )


def label_targets(label_units: np.ndarray) -> np.ndarray:
    """Hard human/bot labels from the label unit (0.5 rounds up to bot)."""
    return (np.asarray(label_units) >= 0.5).astype(np.float64)


def generate_samples(generator: MlpParams, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` generated accounts: ``(features in [0,1]^d, label units in (0,1))``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    z = rng.standard_normal((n, generator.in_dim))
    out = nncore.predict(generator, z)
    return out[:, :-1], out[:, -1]


def discriminator_logits(discriminator: MlpParams, x: np.ndarray) -> np.ndarray:
    return nncore.predict(discriminator, x)


def classify_hb(discriminator: MlpParams, x: np.ndarray) -> np.ndarray:
    """Bot (1) / human (0) decisions from the hb head."""
    return (discriminator_logits(discriminator, x)[:, HB] > 0).astype(np.uint8)


# --- logs -----------------------------------------------------------------

@dataclass(frozen=True)
class BotHumanRatio:
    """Bot-to-human count ratio; ``infinite`` flags the zero-human case."""

    bots: int
    humans: int

    @property
    def infinite(self) -> bool:
        return self.humans == 0

    @property
    def value(self) -> float:
        return math.inf if self.infinite else self.bots / self.humans

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    d_loss: float
    g_loss: float
    bot_human_ratio: BotHumanRatio | None = None
    hb_validation_accuracy: float | None = None


@dataclass
class TrainLog:
    records: list[EpochRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[EpochRecord]:
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def append(self, rec: EpochRecord) -> None:
        self.records.append(rec)

    def ratios(self) -> list[BotHumanRatio | None]:
        return [r.bot_human_ratio for r in self.records]

    def to_rows(self) -> list[dict]:
        rows = []
        for r in self.records:
            ratio = r.bot_human_ratio
            rows.append({
                "epoch": r.epoch,
                "d_loss": r.d_loss,
                "g_loss": r.g_loss,
                "bot_human_ratio": "" if ratio is None else ("inf" if ratio.infinite else ratio.value),
                "ratio_infinite": "" if ratio is None else int(ratio.infinite),
                "val_acc": "" if r.hb_validation_accuracy is None else r.hb_validation_accuracy,
            })
        return rows

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["epoch", "d_loss", "g_loss", "bot_human_ratio",
                                               "ratio_infinite", "val_acc"])
            w.writeheader()
            w.writerows(self.to_rows())


@dataclass
class GanBundle:
    generator: MlpParams
    discriminator: MlpParams
    config: GanConfig
    log: TrainLog
    seed: int
    generator_steps: int = 0
    discriminator_steps: int = 0


# --- mode collapse --------------------------------------------------------

def mode_collapse_ratio(discriminator: MlpParams, samples: np.ndarray) -> BotHumanRatio:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or len(samples) == 0:
        raise DomainError("need at least one sample to compute a bot/human ratio")
    decisions = classify_hb(discriminator, samples)
    bots = int(decisions.sum())
    return BotHumanRatio(bots, len(decisions) - bots)


def detect_mode_collapse(log: TrainLog | Sequence, threshold: float = 10.0, patience: int = 3) -> int | None:
    """Index of the first epoch that starts ``patience`` consecutive epochs at or
    above ``threshold`` (infinite ratios always count), else ``None``."""
    ratios = log.ratios() if isinstance(log, TrainLog) else list(log)
    run = 0
    for i, r in enumerate(ratios):
        if r is None:
            run = 0
            continue
        val = r.value if isinstance(r, BotHumanRatio) else float(r)
        run = run + 1 if val >= threshold else 0
        if run >= patience:
            return i - patience + 1
    return None


# --- training helpers -----------------------------------------------------

def minibatches(n: int, batch_size: int, rng: np.random.Generator) -> Iterable[np.ndarray]:
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def _both_classes(data: Dataset) -> Dataset:
    data = data.labeled()
    if not (np.any(data.labels == HUMAN) and np.any(data.labels == BOT)):
        raise DomainError("training data must contain both humans and bots")
    return data


def hb_accuracy(discriminator: MlpParams, data: Dataset) -> float | None:
    data = data.labeled()
    if data.n_rows == 0:
        return None
    return float(np.mean(classify_hb(discriminator, data.features) == data.labels))


def _resolve(config: GanConfig, feature_dim: int) -> GanConfig:
    config.validate()
    if config.feature_dim is not None and config.feature_dim != feature_dim:
        raise ShapeError(f"config.feature_dim={config.feature_dim} but data has {feature_dim} features")
    return GanConfig.from_dict({**config.to_dict(), "feature_dim": feature_dim})


def train_conventional(train_data: Dataset, val_data: Dataset | None, config: GanConfig, seed: int) -> GanBundle:
    """Two-head GAN training; the discriminator doubles as the bot classifier.

    Per minibatch the discriminator minimises
    ``BCE(hb(real), y) + BCE(hb(fake), round(l)) + BCE(rf([real; fake]), [1; 0])``
    and the generator minimises ``BCE(rf(G(z)), 1) + BCE(hb(G(z)), round(l))``
    with the rounded label unit held constant.
    """
    data = _both_classes(train_data)
    d = data.n_features
    cfg = _resolve(config, d)
    x_all = data.features.astype(np.float64)
    y_all = data.labels.astype(np.float64)

    gen = nncore.init_mlp(generator_specs(cfg, d), stream(seed, "g_init"))
    disc = nncore.init_mlp(discriminator_specs(cfg, d), stream(seed, "d_init", 0))
    g_opt = nncore.init_adam(gen, cfg.learning_rate)
    d_opt = nncore.init_adam(disc, cfg.learning_rate)
    shuffle, noise = stream(seed, "shuffle"), stream(seed, "noise")
    d_drop, g_drop = stream(seed, "d_dropout", 0), stream(seed, "g_dropout")
    probe_z = stream(seed, "probe").standard_normal((cfg.probe_size, cfg.noise_dim))

    log = TrainLog()
    for epoch in range(cfg.epochs):
        d_losses, g_losses = [], []
        for idx in minibatches(len(x_all), cfg.batch_size, shuffle):
            b = len(idx)
            real, y = x_all[idx], y_all[idx]

            # discriminator step, generator output detached
            g_out = nncore.predict(gen, noise.standard_normal((b, cfg.noise_dim)))
            fake, fake_y = g_out[:, :d], label_targets(g_out[:, d])
            logits, cache = nncore.forward(disc, np.vstack([real, fake]), True, cfg.dropout_rate, d_drop)
            l_hb_real, g_hb_real = nncore.bce_with_logits(logits[:b, HB], y)
            l_hb_fake, g_hb_fake = nncore.bce_with_logits(logits[b:, HB], fake_y)
            rf_t = np.concatenate([np.ones(b), np.zeros(b)])
            l_rf, g_rf = nncore.bce_with_logits(logits[:, RF], rf_t)
            grad = np.column_stack([np.concatenate([g_hb_real, g_hb_fake]), g_rf])
            disc, d_opt = nncore.adam_step(disc, nncore.backward(disc, cache, grad), d_opt)
            d_losses.append(l_hb_real + l_hb_fake + l_rf)

            # generator step through the (fixed) discriminator
            z = noise.standard_normal((b, cfg.noise_dim))
            g_out, g_cache = nncore.forward(gen, z, True, cfg.generator_dropout, g_drop)
            fake, fake_y = g_out[:, :d], label_targets(g_out[:, d])
            logits, cache = nncore.forward(disc, fake, True, cfg.dropout_rate, d_drop)
            l_rf, g_rf = nncore.bce_with_logits(logits[:, RF], np.ones(b))
            l_hb, g_hb = nncore.bce_with_logits(logits[:, HB], fake_y)
            dx = nncore.backward(disc, cache, np.column_stack([g_hb, g_rf])).inputs
            g_grad = nncore.backward(gen, g_cache, np.column_stack([dx, np.zeros(b)]))
            gen, g_opt = nncore.adam_step(gen, g_grad, g_opt)
            g_losses.append(l_rf + l_hb)

        probe = nncore.predict(gen, probe_z)[:, :d]
        log.append(EpochRecord(
            epoch=epoch,
            d_loss=sum(d_losses) / len(d_losses),
            g_loss=sum(g_losses) / len(g_losses),
            bot_human_ratio=mode_collapse_ratio(disc, probe),
            hb_validation_accuracy=None if val_data is None else hb_accuracy(disc, val_data),
        ))
    return GanBundle(gen, disc, cfg, log, seed, g_opt.t, d_opt.t)


def train_rf_gan(train_data: Dataset, config: GanConfig, seed: int) -> GanBundle:
    """Plain real-vs-fake GAN using only the rf head; labels are ignored.

    Per minibatch: one discriminator step on ``BCE(rf([real; fake]), [1; 0])``
    and one generator step on ``BCE(rf(G(z)), 1)``.
    """
    data = train_data.labeled()
    if data.n_rows == 0:
        raise DomainError("no labeled rows to train on")
    d = data.n_features
    cfg = _resolve(config, d)
    x_all = data.features.astype(np.float64)

    gen = nncore.init_mlp(generator_specs(cfg, d), stream(seed, "g_init"))
    disc = nncore.init_mlp(discriminator_specs(cfg, d), stream(seed, "d_init", 0))
    g_opt = nncore.init_adam(gen, cfg.learning_rate)
    d_opt = nncore.init_adam(disc, cfg.learning_rate)
    shuffle, noise = stream(seed, "shuffle"), stream(seed, "noise")
    d_drop, g_drop = stream(seed, "d_dropout", 0), stream(seed, "g_dropout")

    log = TrainLog()
    for epoch in range(cfg.epochs):
        d_losses, g_losses = [], []
        for idx in minibatches(len(x_all), cfg.batch_size, shuffle):
            b = len(idx)
            fake = nncore.predict(gen, noise.standard_normal((b, cfg.noise_dim)))[:, :d]
            logits, cache = nncore.forward(disc, np.vstack([x_all[idx], fake]), True, cfg.dropout_rate, d_drop)
            loss, g = nncore.bce_with_logits(logits[:, RF], np.concatenate([np.ones(b), np.zeros(b)]))
            grad = np.column_stack([np.zeros(2 * b), g])
            disc, d_opt = nncore.adam_step(disc, nncore.backward(disc, cache, grad), d_opt)
            d_losses.append(loss)

            z = noise.standard_normal((b, cfg.noise_dim))
            g_out, g_cache = nncore.forward(gen, z, True, cfg.generator_dropout, g_drop)
            logits, cache = nncore.forward(disc, g_out[:, :d], True, cfg.dropout_rate, d_drop)
            loss, g = nncore.bce_with_logits(logits[:, RF], np.ones(b))
            dx = nncore.backward(disc, cache, np.column_stack([np.zeros(b), g])).inputs
            gen, g_opt = nncore.adam_step(gen, nncore.backward(gen, g_cache, np.column_stack([dx, np.zeros(b)])), g_opt)
            g_losses.append(loss)

        log.append(EpochRecord(epoch, sum(d_losses) / len(d_losses), sum(g_losses) / len(g_losses)))
    return GanBundle(gen, disc, cfg, log, seed, g_opt.t, d_opt.t)


# --- augmentation ---------------------------------------------------------

def augment_dataset(real: Dataset, generator: MlpParams, synthetic_fraction: float,
                    rng: np.random.Generator) -> Dataset:
    """Replace ``ceil(fraction * n)`` seeded rows of ``real`` with generated
    accounts labeled by their rounded label unit."""
    if not 0.0 <= synthetic_fraction <= 1.0:
        raise DomainError(f"synthetic_fraction must lie in [0, 1], got {synthetic_fraction}")
    if feature_dim_of(generator) != real.n_features:
        raise ShapeError(f"generator emits {feature_dim_of(generator)} features, data has {real.n_features}")
    n = real.n_rows
    m = min(n, math.ceil(synthetic_fraction * n - 1e-12))
    if m == 0:
        return real
    rows = rng.choice(n, size=m, replace=False)
    feats, units = generate_samples(generator, m, rng)
    x = real.features.copy()
    y = real.labels.copy()
    x[rows] = feats
    y[rows] = label_targets(units).astype(np.uint8)
    followers = posts = None
    if real.has_raw_aux:
        followers, posts = real.followers_raw.copy(), real.posts_raw.copy()
        followers[rows] = 0.0
        posts[rows] = 0.0
    return Dataset(x, y, real.feature_names, real.created_at_index, followers, posts)
