"""Dropout-GAN: one generator trained against a randomly gated set of k
discriminators, plus the D*-vs-G* stages built on top of it.

Each epoch every discriminator draws ``u ~ U(0, 1)`` from the ``select``
stream and is active iff ``u > keep_threshold``; if none is active one is
forced uniformly at random. Active discriminators train their rf head on
real-vs-generated data. The generator takes exactly one step per minibatch
on the *mean* rf loss over the active set.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import nncore
from .dataio import Dataset
from .errors import ConfigError, DomainError
from .gan import (
    HB,
    RF,
    BotHumanRatio,
    EpochRecord,
    GanConfig,
    TrainLog,
    _resolve,
    check_pair,
    classify_hb,
    discriminator_specs,
    generate_samples,
    generator_specs,
    hb_accuracy,
    label_targets,
    minibatches,
    mode_collapse_ratio,
    train_conventional,
)
from .nncore import MlpParams
from .rng import derive_seed, stream


@dataclass
class DropoutGanConfig:
    base: GanConfig = field(default_factory=GanConfig)
    num_discriminators: int = 5
    keep_threshold: float = 0.5

    def validate(self) -> None:
        if self.num_discriminators < 1:
            raise ConfigError(f"num_discriminators must be >= 1, got {self.num_discriminators}")
        if not 0.0 <= self.keep_threshold < 1.0:
            raise ConfigError("keep_threshold must lie in [0, 1)")
        self.base.validate()

    def to_dict(self) -> dict:
        return {"base": self.base.to_dict(), "num_discriminators": self.num_discriminators,
                "keep_threshold": self.keep_threshold}

    @classmethod
    def from_dict(cls, data: dict) -> "DropoutGanConfig":
        return cls(GanConfig.from_dict(data.get("base", {})), int(data.get("num_discriminators", 5)),
                   float(data.get("keep_threshold", 0.5)))


@dataclass(frozen=True)
class DropoutEpochRecord:
    epoch: int
    disc_losses: tuple[float | None, ...]  # None marks an inactive discriminator
    g_loss: float
    active: tuple[int, ...]
    bot_human_ratio: BotHumanRatio | None = None

    @property
    def mean_active_loss(self) -> float:
        vals = [l for l in self.disc_losses if l is not None]
        return sum(vals) / len(vals)


@dataclass
class DropoutGanBundle:
    generator: MlpParams
    discriminators: list[MlpParams]
    config: DropoutGanConfig
    log: list[DropoutEpochRecord]
    seed: int
    generator_steps: int = 0
    discriminator_steps: list[int] = field(default_factory=list)


def select_active(rng: np.random.Generator, k: int, threshold: float) -> tuple[int, ...]:
    u = rng.random(k)
    active = tuple(int(i) for i in np.flatnonzero(u > threshold))
    if not active:
        active = (int(rng.integers(k)),)
    return active


def _rf_step(disc, opt, real, fake, dropout, rng):
    b = len(real)
    logits, cache = nncore.forward(disc, np.vstack([real, fake]), True, dropout, rng)
    loss, g = nncore.bce_with_logits(logits[:, RF], np.concatenate([np.ones(len(real)), np.zeros(len(fake))]))
    grad = np.column_stack([np.zeros(b + len(fake)), g])
    disc, opt = nncore.adam_step(disc, nncore.backward(disc, cache, grad), opt)
    return disc, opt, loss


def train_dropout(
    train_data: Dataset,
    config: DropoutGanConfig,
    seed: int,
    probe_classifier: MlpParams | None = None,
    include_unlabeled: bool = False,
    workers: int = 1,
) -> DropoutGanBundle:
    """Train one generator against ``k`` gated discriminators (rf heads only).

    Labels are never used. ``probe_classifier`` (typically D*) classifies a
    fixed probe of generated samples each epoch to log a bot/human ratio.
    ``workers > 1`` steps active discriminators in threads; results are the
    same as the sequential path because every discriminator owns its streams.
    """
    config.validate()
    data = train_data if include_unlabeled else train_data.labeled()
    if data.n_rows == 0:
        raise DomainError("no rows to train on")
    d = data.n_features
    cfg = _resolve(config.base, d)
    k = config.num_discriminators
    x_all = data.features.astype(np.float64)

    gen = nncore.init_mlp(generator_specs(cfg, d), stream(seed, "g_init"))
    discs = [nncore.init_mlp(discriminator_specs(cfg, d), stream(seed, "d_init", i)) for i in range(k)]
    g_opt = nncore.init_adam(gen, cfg.learning_rate)
    d_opts = [nncore.init_adam(p, cfg.learning_rate) for p in discs]
    d_drops = [stream(seed, "d_dropout", i) for i in range(k)]
    shuffle, noise = stream(seed, "shuffle"), stream(seed, "noise")
    g_drop, select = stream(seed, "g_dropout"), stream(seed, "select")
    probe_z = stream(seed, "probe").standard_normal((cfg.probe_size, cfg.noise_dim))
    pool = ThreadPoolExecutor(workers) if workers > 1 else None

    log: list[DropoutEpochRecord] = []
    try:
        for epoch in range(cfg.epochs):
            active = select_active(select, k, config.keep_threshold)
            losses = {i: [] for i in active}
            g_losses = []
            for idx in minibatches(len(x_all), cfg.batch_size, shuffle):
                b = len(idx)
                real = x_all[idx]
                fake = nncore.predict(gen, noise.standard_normal((b, cfg.noise_dim)))[:, :d]

                def step(i):
                    return _rf_step(discs[i], d_opts[i], real, fake, cfg.dropout_rate, d_drops[i])

                results = list(pool.map(step, active)) if pool else [step(i) for i in active]
                for i, (p, o, loss) in zip(active, results):
                    discs[i], d_opts[i] = p, o
                    losses[i].append(loss)

                # generator: mean of per-discriminator losses and input gradients
                z = noise.standard_normal((b, cfg.noise_dim))
                g_out, g_cache = nncore.forward(gen, z, True, cfg.generator_dropout, g_drop)
                fake = g_out[:, :d]
                dx = np.zeros_like(fake)
                total = 0.0
                for i in active:
                    logits, cache = nncore.forward(discs[i], fake, True, cfg.dropout_rate, d_drops[i])
                    loss, g = nncore.bce_with_logits(logits[:, RF], np.ones(b))
                    dx = dx + nncore.backward(discs[i], cache, np.column_stack([np.zeros(b), g])).inputs
                    total += loss
                n_active = float(len(active))
                dx = dx / n_active
                g_grad = nncore.backward(gen, g_cache, np.column_stack([dx, np.zeros(b)]))
                gen, g_opt = nncore.adam_step(gen, g_grad, g_opt)
                g_losses.append(total / n_active)

            ratio = None
            if probe_classifier is not None:
                ratio = mode_collapse_ratio(probe_classifier, nncore.predict(gen, probe_z)[:, :d])
            log.append(DropoutEpochRecord(
                epoch=epoch,
                disc_losses=tuple(sum(losses[i]) / len(losses[i]) if i in losses else None for i in range(k)),
                g_loss=sum(g_losses) / len(g_losses),
                active=active,
                bot_human_ratio=ratio,
            ))
    finally:
        if pool is not None:
            pool.shutdown()
    return DropoutGanBundle(gen, discs, DropoutGanConfig(cfg, k, config.keep_threshold), log, seed,
                            g_opt.t, [o.t for o in d_opts])


def dropout_log_rows(log: list[DropoutEpochRecord]) -> list[dict]:
    k = len(log[0].disc_losses) if log else 0
    rows = []
    for r in log:
        ratio = r.bot_human_ratio
        row = {
            "epoch": r.epoch,
            "g_loss": r.g_loss,
            "mean_active_d_loss": r.mean_active_loss,
            "active": " ".join(map(str, r.active)),
            "bot_human_ratio": "" if ratio is None else ("inf" if ratio.infinite else ratio.value),
            "ratio_infinite": "" if ratio is None else int(ratio.infinite),
        }
        row.update({f"d{i}_loss": "" if r.disc_losses[i] is None else r.disc_losses[i] for i in range(k)})
        rows.append(row)
    return rows


def write_dropout_log_csv(log: list[DropoutEpochRecord], path) -> None:
    rows = dropout_log_rows(log)
    k = len(log[0].disc_losses) if log else 0
    keys = ["epoch", "g_loss", "mean_active_d_loss", "active", "bot_human_ratio", "ratio_infinite"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys + [f"d{i}_loss" for i in range(k)])
        w.writeheader()
        w.writerows(rows)


# --- D* against G* -------------------------------------------------------

def refine_dstar(
    dstar: MlpParams,
    gstar: MlpParams,
    real: Dataset,
    epochs: int,
    seed: int,
    config: GanConfig | None = None,
    val_data: Dataset | None = None,
    pseudo_labels: str = "teacher",
) -> tuple[MlpParams, TrainLog]:
    """Fine-tune both heads of D* against a frozen G*.

    Loss per minibatch: ``BCE(hb(real), y) + BCE(hb(G*), y_syn) +
    BCE(rf([real; G*]), [1; 0])``. ``y_syn`` comes from the frozen starting
    copy of D* (``pseudo_labels="teacher"``) or from G*'s rounded label unit
    (``"label_unit"``); a G* trained on rf losses alone never receives a
    gradient on its label unit, which is why the teacher is the default.
    """
    check_pair(gstar, dstar)
    if epochs < 0:
        raise DomainError("epochs must be >= 0")
    if pseudo_labels not in ("teacher", "label_unit"):
        raise ConfigError(f"unknown pseudo_labels mode {pseudo_labels!r}")
    cfg = config or GanConfig()
    if epochs == 0:
        return dstar.copy(), TrainLog()
    data = real.labeled()
    if data.n_rows == 0:
        raise DomainError("refinement needs labeled real rows")
    x_all = data.features.astype(np.float64)
    y_all = data.labels.astype(np.float64)
    d = x_all.shape[1]
    teacher = dstar.copy()
    disc = dstar.copy()
    opt = nncore.init_adam(disc, cfg.learning_rate)
    shuffle, noise = stream(seed, "refine_shuffle"), stream(seed, "refine_noise")
    drop = stream(seed, "refine_dropout")
    probe_z = stream(seed, "probe").standard_normal((cfg.probe_size, gstar.in_dim))

    log = TrainLog()
    for epoch in range(epochs):
        d_losses = []
        for idx in minibatches(len(x_all), cfg.batch_size, shuffle):
            b = len(idx)
            g_out = nncore.predict(gstar, noise.standard_normal((b, gstar.in_dim)))
            fake = g_out[:, :d]
            if pseudo_labels == "teacher":
                fake_y = classify_hb(teacher, fake).astype(np.float64)
            else:
                fake_y = label_targets(g_out[:, d])
            logits, cache = nncore.forward(disc, np.vstack([x_all[idx], fake]), True, cfg.dropout_rate, drop)
            l1, g1 = nncore.bce_with_logits(logits[:b, HB], y_all[idx])
            l2, g2 = nncore.bce_with_logits(logits[b:, HB], fake_y)
            l3, g3 = nncore.bce_with_logits(logits[:, RF], np.concatenate([np.ones(b), np.zeros(b)]))
            grad = np.column_stack([np.concatenate([g1, g2]), g3])
            disc, opt = nncore.adam_step(disc, nncore.backward(disc, cache, grad), opt)
            d_losses.append(l1 + l2 + l3)
        probe = nncore.predict(gstar, probe_z)[:, :d]
        log.append(EpochRecord(
            epoch=epoch,
            d_loss=sum(d_losses) / len(d_losses),
            g_loss=float("nan"),  # generator frozen
            bot_human_ratio=mode_collapse_ratio(disc, probe),
            hb_validation_accuracy=None if val_data is None else hb_accuracy(disc, val_data),
        ))
    return disc, log


def evaluate_dstar_vs_gstar(
    dstar: MlpParams,
    gstar: MlpParams,
    real_test: Dataset,
    n_generated: int | None = None,
    rng: np.random.Generator | None = None,
) -> dict:
    """rf-head accuracy / BCE of D* on real test rows (target 1) plus the same
    number of G* samples (target 0). A row counts as "real" when its rf logit
    is >= 0, i.e. sigmoid >= 0.5."""
    check_pair(gstar, dstar)
    if real_test.n_rows == 0:
        raise DomainError("empty test set")
    n_gen = real_test.n_rows if n_generated is None else int(n_generated)
    if n_gen < 1:
        raise DomainError("n_generated must be >= 1")
    if rng is None:
        rng = np.random.default_rng(0)
    fake, _ = generate_samples(gstar, n_gen, rng)
    x = np.vstack([real_test.features.astype(np.float64), fake])
    t = np.concatenate([np.ones(real_test.n_rows), np.zeros(n_gen)])
    logits = nncore.predict(dstar, x)[:, RF]
    loss, _ = nncore.bce_with_logits(logits, t)
    acc = float(np.mean((logits >= 0) == (t == 1)))
    return {"rf_accuracy": acc, "rf_loss": loss}


@dataclass(frozen=True)
class SweepRow:
    k: int
    dstar_accuracy: float
    dstar_loss: float
    refined_accuracy: float | None = None
    refined_loss: float | None = None


def sweep_discriminator_count(
    train_data: Dataset,
    test_data: Dataset,
    config_base: GanConfig,
    k_range,
    seed: int,
    dstar: MlpParams | None = None,
    keep_threshold: float = 0.5,
    refine_epochs: int = 0,
    workers: int = 1,
) -> list[SweepRow]:
    """For each k: train a Dropout-GAN, then score the conventional D* (frozen,
    and optionally refined for ``refine_epochs``) against the resulting G*."""
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise DomainError("k_range is empty")
    if dstar is None:
        dstar = train_conventional(train_data, None, config_base, derive_seed(seed, "dstar")).discriminator

    def run(k: int) -> SweepRow:
        run_seed = derive_seed(seed, "sweep_k", k)
        bundle = train_dropout(train_data, DropoutGanConfig(config_base, k, keep_threshold), run_seed)
        res = evaluate_dstar_vs_gstar(dstar, bundle.generator, test_data, rng=stream(run_seed, "eval"))
        ref_acc = ref_loss = None
        if refine_epochs > 0:
            refined, _ = refine_dstar(dstar, bundle.generator, train_data, refine_epochs, run_seed, config_base)
            r2 = evaluate_dstar_vs_gstar(refined, bundle.generator, test_data, rng=stream(run_seed, "eval"))
            ref_acc, ref_loss = r2["rf_accuracy"], r2["rf_loss"]
        return SweepRow(k, res["rf_accuracy"], res["rf_loss"], ref_acc, ref_loss)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(run, ks))
    return [run(k) for k in ks]


def sweep_rows(rows: list[SweepRow]) -> list[dict]:
    out = []
    for r in rows:
        row = {"k": r.k, "dstar_test_accuracy": r.dstar_accuracy, "dstar_test_loss": r.dstar_loss}
        if r.refined_accuracy is not None:
            row["refined_dstar_test_accuracy"] = r.refined_accuracy
            row["refined_dstar_test_loss"] = r.refined_loss
        out.append(row)
    return out
