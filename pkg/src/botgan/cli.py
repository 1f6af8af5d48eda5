"""``botgan`` command line.

Every subcommand accepts ``--seed --data --out --format --config`` and writes
its artifact(s) plus ``<command>_manifest.json`` into ``--out``. The manifest
holds the fully resolved configuration under ``"config"``, so passing it back
through ``--config`` re-runs the command with identical settings.

Settings resolve as built-in default < config file < command-line flag. The
seed additionally falls back to ``BOTGAN_SEED``; there is no clock default.

Exit codes: 0 success, 1 usage/config error, 2 data or format error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path
from typing import Callable

import numpy as np

from . import baselines, dataio, dropoutgan, evalmetrics, features, gan, nncore
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .dataio import Dataset
from .errors import BotGanError, ConfigError, DomainError, ShapeError
from .rng import stream

SEED_ENV = "BOTGAN_SEED"

COMMON_DEFAULTS = {"out": "out", "format": "csv", "sequential": False, "workers": 1, "split_seed": None}

GAN_DEFAULTS = {
    "epochs": 50, "batch_size": 256, "learning_rate": 0.002, "noise_dim": 100, "dropout_rate": 0.5,
    "hidden": "128,128", "activation": "relu", "probe_size": 1000, "generator_dropout": 0.0, "top_k": None,
}


class UsageError(BotGanError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this CLI reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


# --- argument groups ------------------------------------------------------

def _common(p: argparse.ArgumentParser, data_help: str = "input BDF dataset") -> None:
    g = p.add_argument_group("common")
    g.add_argument("--seed", type=int, help=f"master seed (falls back to ${SEED_ENV})")
    g.add_argument("--data", help=data_help)
    g.add_argument("--out", help="output directory (default: out)")
    g.add_argument("--format", choices=("csv", "json"), help="report format (default: csv)")
    g.add_argument("--config", help="JSON config file or a previous run manifest")
    g.add_argument("--sequential", action="store_true", default=None,
                   help="force deterministic single-threaded execution")
    g.add_argument("--workers", type=int, help="worker threads for sweeps (default: 1)")
    g.add_argument("--split-seed", type=int, help="seed of the 80/10/10 split (default: --seed)")


def _gan_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("GAN hyperparameters")
    g.add_argument("--epochs", type=int)
    g.add_argument("--batch-size", type=int)
    g.add_argument("--learning-rate", type=float)
    g.add_argument("--noise-dim", type=int)
    g.add_argument("--dropout-rate", type=float, help="discriminator dropout (default: 0.5)")
    g.add_argument("--hidden", help="comma-separated hidden widths (default: 128,128)")
    g.add_argument("--activation", choices=("relu", "leaky_relu", "sigmoid"))
    g.add_argument("--probe-size", type=int)
    g.add_argument("--generator-dropout", type=float)
    g.add_argument("--top-k", type=int, help="keep the k highest-information-gain features")


def _flag_values(ns: argparse.Namespace) -> dict:
    skip = {"command", "func", "config"}
    return {k: v for k, v in vars(ns).items() if k not in skip and v is not None}


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]  # a run manifest
    return data


def resolve(ns: argparse.Namespace, defaults: dict) -> dict:
    cfg = {**COMMON_DEFAULTS, **defaults}
    file_cfg = _load_config_file(ns.config)
    cfg.update({k: v for k, v in file_cfg.items() if k in cfg or k in vars(ns)})
    cfg.update(_flag_values(ns))
    if cfg.get("seed") is None:
        env = os.environ.get(SEED_ENV)
        if env is None:
            raise ConfigError(f"a seed is required: pass --seed, set it in --config, or export {SEED_ENV}")
        try:
            cfg["seed"] = int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None
    cfg["seed"] = int(cfg["seed"])
    if cfg["seed"] < 0:
        raise ConfigError(f"seed must be non-negative, got {cfg['seed']}")
    if cfg.get("split_seed") is None:
        cfg["split_seed"] = cfg["seed"]
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg['format']!r}")
    if cfg.get("sequential"):
        cfg["workers"] = 1
    return cfg


def _require(cfg: dict, *keys: str) -> None:
    for k in keys:
        if cfg.get(k) in (None, ""):
            raise ConfigError(f"missing required setting --{k.replace('_', '-')}")


def _gan_config(cfg: dict) -> gan.GanConfig:
    hidden = cfg["hidden"]
    if isinstance(hidden, str):
        try:
            hidden = [int(h) for h in hidden.split(",") if h.strip()]
        except ValueError:
            raise ConfigError(f"--hidden must be comma-separated integers, got {cfg['hidden']!r}") from None
    c = gan.GanConfig(
        noise_dim=int(cfg["noise_dim"]), learning_rate=float(cfg["learning_rate"]),
        batch_size=int(cfg["batch_size"]), epochs=int(cfg["epochs"]),
        dropout_rate=float(cfg["dropout_rate"]), hidden_widths=tuple(hidden),
        activation=str(cfg["activation"]), generator_dropout=float(cfg["generator_dropout"]),
        probe_size=int(cfg["probe_size"]),
    )
    c.validate()
    return c


# --- shared plumbing ------------------------------------------------------

class Run:
    """Per-invocation output directory, artifact list and manifest writer."""

    def __init__(self, command: str, cfg: dict):
        self.command = command
        self.cfg = cfg
        self.out = Path(cfg["out"])
        self.out.mkdir(parents=True, exist_ok=True)
        self.outputs: list[str] = []
        self.results: dict = {}
        self.started = time.perf_counter()

    def path(self, name: str) -> Path:
        p = self.out / name
        self.outputs.append(str(p))
        return p

    def report(self, rows: list[dict], stem: str) -> Path:
        fmt = self.cfg["format"]
        p = self.path(f"{stem}.{fmt}")
        evalmetrics.write_report(rows, p, fmt, meta={"command": self.command, "seed": self.cfg["seed"],
                                                     "config": self.cfg})
        return p

    def finish(self) -> Path:
        manifest = {
            "command": self.command,
            "seed": self.cfg["seed"],
            "config": self.cfg,
            "outputs": self.outputs,
            "results": self.results,
            "elapsed_seconds": round(time.perf_counter() - self.started, 3),
        }
        p = self.out / f"{self.command}_manifest.json"
        with open(p, "w") as fh:
            json.dump(manifest, fh, indent=2, default=_json_default)
        return p


def _json_default(o):
    if isinstance(o, (np.integer, np.floating)):
        return o.item()
    if isinstance(o, (Path,)):
        return str(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _read_data(cfg: dict) -> Dataset:
    _require(cfg, "data")
    return dataio.read_bdf(cfg["data"])


def _split(ds: Dataset, cfg: dict) -> tuple[Dataset, Dataset, Dataset]:
    sp = dataio.split_80_10_10(ds, stream(int(cfg["split_seed"]), "split"))
    return ds.subset(sp.train), ds.subset(sp.validation), ds.subset(sp.test)


def _select_features(ds: Dataset, cfg: dict, run: Run | None = None) -> Dataset:
    """Apply --top-k using information gain measured on the training split only."""
    k = cfg.get("top_k")
    if k is None:
        return ds
    train, _, _ = _split(ds, cfg)
    ranking = features.information_gain(train)
    if run is not None:
        run.results["top_features"] = [ds.feature_names[j] for j in ranking.top(int(k))]
    return features.select_top_k(ds, ranking, int(k))


def _align(ds: Dataset, names, dim: int, what: str) -> Dataset:
    """Project ``ds`` onto the feature columns a checkpoint was trained on."""
    if names:
        names = list(names)
        if list(ds.feature_names) == names:
            return ds
        if set(names) <= set(ds.feature_names):
            return ds.columns_by_name(names)
    elif ds.n_features == dim:
        return ds
    raise ShapeError(f"{what} expects feature_dim={dim} but the dataset has d={ds.n_features} "
                     f"and does not contain all of the checkpoint's feature columns")


def _ckpt(path: str | None, what: str) -> Checkpoint:
    if not path:
        raise ConfigError(f"missing required setting --{what}")
    return load_checkpoint(path)


def _discriminator(ck: Checkpoint) -> nncore.MlpParams:
    if "discriminator" not in ck.networks:
        raise ShapeError(f"checkpoint of kind {ck.model_kind!r} holds no human/bot discriminator")
    return ck.networks["discriminator"]


def _gan_meta(ds: Dataset, cfg: dict) -> dict:
    return {"feature_names": list(ds.feature_names), "split_seed": int(cfg["split_seed"]),
            "created_at_index": ds.created_at_index}


def _split_for_checkpoint(ds: Dataset, ck: Checkpoint, cfg: dict, explicit_split: bool):
    # reuse the training split unless the caller overrode it
    if not explicit_split and "split_seed" in ck.meta:
        cfg["split_seed"] = int(ck.meta["split_seed"])
    return _split(ds, cfg)


# --- commands -------------------------------------------------------------

def cmd_prepare(ns, cfg, run: Run) -> None:
    _require(cfg, "data", "manifest")
    manifest = dataio.CsvManifest.from_json(cfg["manifest"])
    ds = dataio.import_csv(cfg["data"], manifest)
    if not cfg.get("no_scale"):
        ds, scaling = dataio.minmax_scale(ds)
        with open(run.path("scaling.json"), "w") as fh:
            json.dump(scaling.to_json(), fh)
    dataio.write_bdf(ds, run.path("dataset.bdf"))
    run.results.update(n_rows=ds.n_rows, n_features=ds.n_features, class_counts=ds.class_counts())


def cmd_synth(ns, cfg, run: Run) -> None:
    sc = dataio.SynthConfig(
        n_rows=int(cfg["rows"]), n_features=int(cfg["features"]), bot_fraction=float(cfg["bot_fraction"]),
        cluster_separation=float(cfg["separation"]), boolean_feature_fraction=float(cfg["boolean_fraction"]),
        seed=cfg["seed"], noise_scale=float(cfg["noise_scale"]),
    )
    ds = dataio.synth_generate(sc)
    dataio.write_bdf(ds, run.path("dataset.bdf"))
    run.results.update(n_rows=ds.n_rows, n_features=ds.n_features, class_counts=ds.class_counts())


def cmd_rank_features(ns, cfg, run: Run) -> None:
    ds = _read_data(cfg)
    train, _, _ = _split(ds, cfg)
    ranking = features.information_gain(train, bins=int(cfg["bins"]))
    run.report(features.ranking_records(ranking), "ig_ranking")
    if cfg.get("top_k") is not None:
        top = features.select_top_k(ds, ranking, int(cfg["top_k"]))
        dataio.write_bdf(top, run.path(f"dataset_top{int(cfg['top_k'])}.bdf"))
    run.results["top_features"] = [ds.feature_names[j] for j in ranking.top(min(10, ds.n_features))]


def cmd_train_gan(ns, cfg, run: Run) -> None:
    ds = _select_features(_read_data(cfg), cfg, run)
    train, val, test = _split(ds, cfg)
    gcfg = _gan_config(cfg)
    bundle = gan.train_conventional(train, val, gcfg, cfg["seed"])
    save_checkpoint(Checkpoint("gan", {"generator": bundle.generator, "discriminator": bundle.discriminator},
                               bundle.config.to_dict(), cfg["seed"], len(bundle.log), _gan_meta(ds, cfg)),
                    run.path("gan.dgck"))
    run.report(bundle.log.to_rows(), "train_log")
    acc, loss = evalmetrics.hb_eval(bundle.discriminator, test)
    run.results.update(test_hb_accuracy=acc, test_hb_loss=loss,
                       mode_collapse_epoch=gan.detect_mode_collapse(bundle.log))


def cmd_train_dropout_gan(ns, cfg, run: Run) -> None:
    ds = _select_features(_read_data(cfg), cfg, run)
    probe = None
    if cfg.get("dstar"):
        ck = load_checkpoint(cfg["dstar"])
        probe = _discriminator(ck)
        ds = _align(ds, ck.meta.get("feature_names"), probe.in_dim, "D* checkpoint")
    train, _, test = _split(ds, cfg)
    dcfg = dropoutgan.DropoutGanConfig(_gan_config(cfg), int(cfg["k"]), float(cfg["theta"]))
    bundle = dropoutgan.train_dropout(train, dcfg, cfg["seed"], probe_classifier=probe, workers=int(cfg["workers"]))
    nets = {"generator": bundle.generator}
    nets.update({f"d{i}": p for i, p in enumerate(bundle.discriminators)})
    save_checkpoint(Checkpoint("dropout_gan", nets, bundle.config.to_dict(), cfg["seed"], len(bundle.log),
                               _gan_meta(ds, cfg)), run.path("dropout_gan.dgck"))
    run.report(dropoutgan.dropout_log_rows(bundle.log), "dropout_log")
    if probe is not None:
        run.results.update(dropoutgan.evaluate_dstar_vs_gstar(probe, bundle.generator, test,
                                                              rng=stream(cfg["seed"], "eval")))


def cmd_refine(ns, cfg, run: Run) -> None:
    dck, gck = _ckpt(cfg.get("dstar"), "dstar"), _ckpt(cfg.get("gstar"), "gstar")
    dstar, gstar = _discriminator(dck), gck["generator"]
    ds = _align(_read_data(cfg), dck.meta.get("feature_names"), dstar.in_dim, "D* checkpoint")
    train, val, test = _split_for_checkpoint(ds, dck, cfg, ns.split_seed is not None)
    gcfg = _gan_config(cfg)
    refined, log = dropoutgan.refine_dstar(dstar, gstar, train, int(cfg["epochs"]), cfg["seed"], gcfg, val,
                                           pseudo_labels=str(cfg["pseudo_labels"]))
    save_checkpoint(Checkpoint("discriminator", {"discriminator": refined}, gcfg.to_dict(), cfg["seed"],
                               len(log), dck.meta), run.path("refined.dgck"))
    run.report(log.to_rows(), "refine_log")
    rng = stream(cfg["seed"], "eval")
    run.results["before"] = dropoutgan.evaluate_dstar_vs_gstar(dstar, gstar, test, rng=rng)
    run.results["after"] = dropoutgan.evaluate_dstar_vs_gstar(refined, gstar, test, rng=stream(cfg["seed"], "eval"))


def _metrics_row(name: str, pred, data: Dataset) -> dict:
    m = evalmetrics.classification_metrics(pred, data.labels)
    imp, scaled = evalmetrics.dataset_impacts(data)
    row = {"model": name, **m.as_dict(),
           "impact_mitigation": evalmetrics.impact_mitigation(pred, data.labels, imp),
           "impact_degenerate": int(imp.degenerate), "scaled_impact": int(scaled)}
    return row


def cmd_evaluate(ns, cfg, run: Run) -> None:
    ck = _ckpt(cfg.get("checkpoint"), "checkpoint")
    disc = _discriminator(ck)
    full = _read_data(cfg)
    ds = _align(full, ck.meta.get("feature_names"), disc.in_dim, "checkpoint")
    parts = dict(zip(("train", "validation", "test"), _split_for_checkpoint(ds, ck, cfg, ns.split_seed is not None)))
    data = (ds if cfg["split"] == "all" else parts[cfg["split"]]).labeled()
    pred = gan.classify_hb(disc, data.features.astype(np.float64))
    row = _metrics_row("dstar", pred, data)
    row["hb_loss"] = evalmetrics.hb_eval(disc, data)[1]
    if cfg.get("gstar"):
        g = _ckpt(cfg["gstar"], "gstar")["generator"]
        row.update(dropoutgan.evaluate_dstar_vs_gstar(disc, g, data, rng=stream(cfg["seed"], "eval")))
    run.report([row], "metrics")
    run.results.update(row)


def _parse_k_range(text) -> list[int]:
    if isinstance(text, list):
        return [int(k) for k in text]
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(k) for k in text.split(",") if k.strip()]
    except ValueError:
        raise ConfigError(f"--k expects 'a..b' or a comma list, got {text!r}") from None


def cmd_sweep_k(ns, cfg, run: Run) -> None:
    ds = _read_data(cfg)
    dstar = None
    if cfg.get("dstar"):
        ck = load_checkpoint(cfg["dstar"])
        dstar = _discriminator(ck)
        ds = _align(ds, ck.meta.get("feature_names"), dstar.in_dim, "D* checkpoint")
    else:
        ds = _select_features(ds, cfg, run)
    train, _, test = _split(ds, cfg)
    ks = _parse_k_range(cfg["k"])
    if any(k < 1 for k in ks):
        raise ConfigError("every k must be >= 1")
    rows = dropoutgan.sweep_discriminator_count(
        train, test, _gan_config(cfg), ks, cfg["seed"], dstar=dstar, keep_threshold=float(cfg["theta"]),
        refine_epochs=int(cfg["refine_epochs"]), workers=int(cfg["workers"]))
    run.report(dropoutgan.sweep_rows(rows), "sweep_k")


def _parse_fractions(text) -> list[float]:
    if isinstance(text, list):
        return [float(f) for f in text]
    try:
        return [float(f) for f in str(text).split(",") if f.strip()]
    except ValueError:
        raise ConfigError(f"--fractions expects a comma list of numbers, got {text!r}") from None


def cmd_sweep_augmentation(ns, cfg, run: Run) -> None:
    gck = _ckpt(cfg.get("gstar"), "gstar")
    g = gck["generator"]
    ds = _align(_read_data(cfg), gck.meta.get("feature_names"), gan.feature_dim_of(g), "G* checkpoint")
    train, _, test = _split(ds, cfg)
    gcfg = _gan_config(cfg)

    def trainer(aug: Dataset, run_seed: int) -> tuple[float, float]:
        bundle = gan.train_conventional(aug, None, gcfg, run_seed)
        return evalmetrics.hb_eval(bundle.discriminator, test)

    rows = evalmetrics.augmentation_sweep(trainer, train, g, _parse_fractions(cfg["fractions"]), cfg["seed"],
                                          repeats=int(cfg["repeats"]))
    run.report([r.__dict__ for r in rows], "augmentation")


def cmd_percentile_eval(ns, cfg, run: Run) -> None:
    ck = _ckpt(cfg.get("checkpoint"), "checkpoint")
    disc = _discriminator(ck)
    full = _read_data(cfg)
    names = ck.meta.get("feature_names")
    ds = _align(full, names, disc.in_dim, "checkpoint")
    cols = [full.feature_names.index(n) for n in ds.feature_names]
    if full.created_at_index is None:
        raise DomainError(f"{cfg['data']}: dataset has no creation-time feature")
    # split the full-width data so the creation column survives feature selection
    if ns.split_seed is None and "split_seed" in ck.meta:
        cfg["split_seed"] = int(ck.meta["split_seed"])
    _, _, test = _split(full, cfg)

    def predict_fn(x):
        return gan.classify_hb(disc, np.asarray(x, dtype=np.float64)[:, cols])

    bands = evalmetrics.percentile_f1(predict_fn, test, float(cfg["band"]), cumulative=not cfg.get("disjoint"))
    run.report([b.__dict__ for b in bands], "percentile_f1")


def cmd_closeness(ns, cfg, run: Run) -> None:
    gck = _ckpt(cfg.get("gstar"), "gstar")
    g = gck["generator"]
    ds = _align(_read_data(cfg), gck.meta.get("feature_names"), gan.feature_dim_of(g), "G* checkpoint")
    rows = evalmetrics.closeness_analysis(g, ds, float(cfg["tolerance"]), int(cfg["samples"]),
                                          stream(cfg["seed"], "closeness"))
    run.report([r.__dict__ for r in rows], "closeness")


def cmd_baseline(ns, cfg, run: Run) -> None:
    ds = _select_features(_read_data(cfg), cfg, run)
    train, _, test = _split(ds, cfg)
    kinds = list(baselines.KINDS) if cfg["kind"] == "all" else [k.strip() for k in str(cfg["kind"]).split(",")]
    hp_all = cfg.get("hyperparams") or {}
    rows = []
    for i, kind in enumerate(kinds):
        model = baselines.train_baseline(kind, train, hp_all.get(kind), stream(cfg["seed"], "baseline", i))
        test_l = test.labeled()
        rows.append(_metrics_row(kind, baselines.predict(model, test_l.features), test_l))
    if cfg.get("dstar"):
        ck = load_checkpoint(cfg["dstar"])
        disc = _discriminator(ck)
        t = _align(test, ck.meta.get("feature_names"), disc.in_dim, "D* checkpoint").labeled()
        rows.append(_metrics_row("dstar", gan.classify_hb(disc, t.features.astype(np.float64)), t))
    run.report(rows, "baseline_metrics")
    run.results["accuracy"] = {r["model"]: r["accuracy"] for r in rows}


# --- parser ---------------------------------------------------------------

COMMANDS: dict[str, tuple[Callable, dict]] = {}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="botgan", description="GAN-based social bot detection experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, defaults, help_text, gan_flags=False, data_help="input BDF dataset"):
        p = sub.add_parser(name, help=help_text, description=help_text)
        _common(p, data_help)
        if gan_flags:
            _gan_args(p)
            defaults = {**GAN_DEFAULTS, **defaults}
        COMMANDS[name] = (func, defaults)
        return p

    p = add("prepare", cmd_prepare, {"manifest": None, "no_scale": False},
            "import a CSV export into a min-max scaled BDF dataset", data_help="input CSV file")
    p.add_argument("--manifest", help="JSON column manifest for the CSV")
    p.add_argument("--no-scale", action="store_true", default=None, help="skip min-max scaling")

    d = dataio.SynthConfig()
    p = add("synth", cmd_synth, {"rows": d.n_rows, "features": d.n_features, "separation": d.cluster_separation,
                                 "bot_fraction": d.bot_fraction, "boolean_fraction": d.boolean_feature_fraction,
                                 "noise_scale": d.noise_scale},
            "generate a labeled synthetic dataset")
    p.add_argument("--rows", type=int)
    p.add_argument("--features", type=int)
    p.add_argument("--separation", type=float)
    p.add_argument("--bot-fraction", type=float)
    p.add_argument("--boolean-fraction", type=float)
    p.add_argument("--noise-scale", type=float)

    p = add("rank-features", cmd_rank_features, {"bins": 10, "top_k": None},
            "rank features by information gain on the training split")
    p.add_argument("--bins", type=int)
    p.add_argument("--top-k", type=int, help="also write a dataset holding the top k features")

    add("train-gan", cmd_train_gan, {}, "train the conventional two-headed GAN", gan_flags=True)

    p = add("train-dropout-gan", cmd_train_dropout_gan, {"k": 5, "theta": 0.5, "dstar": None},
            "train one generator against k gated discriminators", gan_flags=True)
    p.add_argument("--k", type=int, help="number of discriminators (default: 5)")
    p.add_argument("--theta", type=float, help="keep threshold (default: 0.5)")
    p.add_argument("--dstar", help="D* checkpoint used to log the bot/human ratio")

    p = add("refine", cmd_refine, {"dstar": None, "gstar": None, "pseudo_labels": "teacher", "epochs": 10},
            "fine-tune D* against a frozen G*", gan_flags=True)
    p.add_argument("--dstar", help="D* checkpoint")
    p.add_argument("--gstar", help="Dropout-GAN checkpoint providing G*")
    p.add_argument("--pseudo-labels", choices=("teacher", "label_unit"))

    p = add("evaluate", cmd_evaluate, {"checkpoint": None, "gstar": None, "split": "test"},
            "classification metrics and impact mitigation of a discriminator")
    p.add_argument("--checkpoint", help="checkpoint holding a discriminator")
    p.add_argument("--gstar", help="also score the rf head against this generator")
    p.add_argument("--split", choices=("train", "validation", "test", "all"))

    p = add("sweep-k", cmd_sweep_k, {"k": "1..10", "theta": 0.5, "dstar": None, "refine_epochs": 0},
            "D* accuracy against G* for a range of discriminator counts", gan_flags=True)
    p.add_argument("--k", help="range 'a..b' or comma list (default: 1..10)")
    p.add_argument("--theta", type=float)
    p.add_argument("--dstar", help="D* checkpoint (trained here when omitted)")
    p.add_argument("--refine-epochs", type=int, help="also report D* refined against each G*")

    p = add("sweep-augmentation", cmd_sweep_augmentation,
            {"gstar": None, "fractions": "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0", "repeats": 10},
            "D* test accuracy and loss against the synthetic share of training data", gan_flags=True)
    p.add_argument("--gstar", help="checkpoint providing the generator")
    p.add_argument("--fractions", help="comma list in [0, 1]")
    p.add_argument("--repeats", type=int)

    p = add("percentile-eval", cmd_percentile_eval, {"checkpoint": None, "band": 5.0, "disjoint": False},
            "bot F1 on creation-date percentile bands")
    p.add_argument("--checkpoint", help="checkpoint holding a discriminator")
    p.add_argument("--band", type=float, help="band width in percent (default: 5)")
    p.add_argument("--disjoint", action="store_true", default=None, help="disjoint instead of cumulative bands")

    p = add("closeness", cmd_closeness, {"gstar": None, "tolerance": 0.05, "samples": 1000},
            "per-feature count of generated samples near the human mean")
    p.add_argument("--gstar", help="checkpoint providing the generator")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--samples", type=int)

    p = add("baseline", cmd_baseline, {"kind": "all", "hyperparams": None, "top_k": None, "dstar": None},
            "train and score the reference classifiers")
    p.add_argument("--kind", help="all, or a comma list of " + ", ".join(baselines.KINDS))
    p.add_argument("--top-k", type=int)
    p.add_argument("--dstar", help="add a row for this discriminator checkpoint")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        parser = build_parser()
        ns = parser.parse_args(argv)
        func, defaults = COMMANDS[ns.command]
        cfg = resolve(ns, defaults)
        run = Run(ns.command, cfg)
        with np.errstate(over="ignore", under="ignore"):
            func(ns, cfg, run)
        run.finish()
        return 0
    except BotGanError as exc:
        print(f"botgan: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"botgan: error: {exc}", file=sys.stderr)
        return 2
    except (FloatingPointError, OverflowError) as exc:
        print(f"botgan: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
