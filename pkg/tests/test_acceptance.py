"""Acceptance criteria 1-12, one check per criterion at its stated tolerance.

Run through pytest (lines are echoed in the terminal summary) or directly::

    python3 tests/test_acceptance.py

Each check prints ``[PASS]``, ``[FAIL]`` or ``[SKIP]`` with the measured
values. Criterion 12 needs the MGTAB dataset as a BDF file whose path is
given by ``BOTGAN_MGTAB_BDF``; without it the criterion is skipped.
"""

import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))

import _fixtures  # noqa: E402
from _oracles import brute_force_ig, finite_difference_check  # noqa: E402
from botgan import baselines, cli, dataio, dropoutgan, evalmetrics, features, gan, nncore  # noqa: E402
from botgan.checkpoint import Checkpoint, load_checkpoint, save_checkpoint  # noqa: E402
from botgan.rng import stream  # noqa: E402


class Skip(Exception):
    pass


# --- criteria ---------------------------------------------------------------

def c01_gradient_oracle():
    rng = np.random.default_rng(2001)
    acts = ["identity", "sigmoid", "relu", "leaky_relu"]
    t0 = time.perf_counter()
    worst, checked, skipped = 0.0, 0, 0
    for _ in range(50):
        n_layers = int(rng.integers(1, 4))
        widths = [int(w) for w in rng.integers(1, 33, n_layers + 1)]
        specs = [nncore.LayerSpec(widths[i], widths[i + 1], acts[int(rng.integers(4))]) for i in range(n_layers)]
        params = nncore.init_mlp(specs, rng)
        batch = int(rng.integers(1, 17))
        x = rng.standard_normal((batch, widths[0]))
        up = rng.standard_normal((batch, widths[-1]))
        w, c, s = finite_difference_check(params, x, up)
        worst, checked, skipped = max(worst, w), checked + c, skipped + s
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4 and elapsed <= 30
    return ok, f"max rel err {worst:.2e} over {checked} entries ({skipped} relu-kink skips), {elapsed:.1f}s"


def c02_adam_closed_form():
    p = nncore.MlpParams((nncore.LayerSpec(1, 1),), [np.array([[0.7]])], [np.array([0.0])])
    g = nncore.Gradients([np.array([[1.0]])], [np.array([0.0])], np.zeros((1, 1)))
    new, _ = nncore.adam_step(p, g, nncore.init_adam(p, 0.002))
    # m_hat = v_hat = 1 after bias correction
    expected = 0.7 - 0.002 * 1.0 / (1.0 + 1e-8)
    err = abs(new.weights[0][0, 0] - expected)
    return err <= 1e-12, f"|update - analytic| = {err:.1e}"


def c03_bce_stability():
    logits = np.array([1e3, -1e3, 100.0, -100.0, 0.0])
    finite = True
    for t in (0.0, 0.5, 1.0):
        for x in logits:
            loss, grad = nncore.bce_with_logits(np.array([x]), np.array([t]))
            finite &= bool(np.isfinite(loss) and np.all(np.isfinite(grad)))
    loss, _ = nncore.bce_with_logits(np.array([0.0]), np.array([1.0]))
    err = abs(loss - math.log(2))
    return finite and err <= 1e-12, f"all finite: {finite}; |BCE(0,1) - ln 2| = {err:.1e}"


def c04_information_gain():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 1001))
        k = int(rng.integers(2, 17))
        d = int(rng.integers(1, 4))
        values = rng.integers(0, k, size=(n, d))
        labels = rng.integers(0, 2, size=n)
        labels[:2] = [0, 1]
        x = (values + 0.5) / 16.0
        ds = dataio.Dataset(x, labels.astype(np.uint8), tuple(f"c{j}" for j in range(d)))
        r = features.information_gain(ds, bins=16)
        for j in range(d):
            worst = max(worst, abs(r.scores[j] - brute_force_ig(values[:, j].tolist(), labels)))
    hand = features.information_gain(dataio.Dataset(np.array([[1.0], [1.0], [0.0], [0.0]]),
                                                    np.array([1, 1, 0, 0], dtype=np.uint8), ("b",))).scores[0]
    return worst <= 1e-12 and hand == 1.0, f"max |module - oracle| = {worst:.1e}; boolean hand case = {float(hand)!r} bit"


def c05_metrics_oracles():
    pred = [1] * 2 + [1] * 1 + [0] * 1 + [0] * 6
    true = [1] * 2 + [0] * 1 + [1] * 1 + [0] * 6
    m = evalmetrics.classification_metrics(pred, true).binary
    hand = m.accuracy == 0.8 and m.precision == m.recall == m.f1 == 2 / 3
    im = evalmetrics.impact_mitigation([1, 1], [1, 0], [0.75, 0.25])
    rng = np.random.default_rng(5)
    lo, hi = 1.0, -1.0
    for _ in range(2000):
        n = int(rng.integers(1, 60))
        imp = evalmetrics.impact_scores(rng.integers(0, 10**6, n) * (rng.random(n) < 0.8), rng.integers(0, 10**6, n))
        v = evalmetrics.impact_mitigation(rng.integers(0, 2, n), rng.integers(0, 2, n), imp)
        lo, hi = min(lo, v), max(hi, v)
    ok = hand and im == 0.5 and -1.0 <= lo and hi <= 1.0
    return ok, (f"acc {m.accuracy} P {m.precision:.17g} R {m.recall:.17g} F1 {m.f1:.17g}; "
                f"impact hand case {im}; fuzz range [{lo:.6f}, {hi:.6f}]")


def c06_end_to_end_synthetic():
    with tempfile.TemporaryDirectory() as tmp:
        t0 = time.perf_counter()
        code = cli.main(["synth", "--rows", "10000", "--features", "100", "--separation", "0.8", "--seed", "42",
                         "--out", f"{tmp}/data"])
        code2 = cli.main(["train-gan", "--data", f"{tmp}/data/dataset.bdf", "--seed", "42", "--epochs", "50",
                          "--out", f"{tmp}/gan"])
        elapsed = time.perf_counter() - t0
        man = json.loads(Path(f"{tmp}/gan/train-gan_manifest.json").read_text()) if code2 == 0 else {}
    acc = man.get("results", {}).get("test_hb_accuracy", float("nan"))
    ok = code == 0 and code2 == 0 and acc >= 0.95 and elapsed <= 300
    return ok, f"D* hb test accuracy {acc:.4f} (need >= 0.95); synth + train-gan {elapsed:.1f}s (limit 300s)"


def c07_dropout_balance():
    _, train, _, _ = _fixtures.synth_split()
    dstar = _fixtures.conventional().discriminator
    cfg = gan.GanConfig(epochs=100)
    b = dropoutgan.train_dropout(train, dropoutgan.DropoutGanConfig(cfg, 5, 0.5), seed=42, probe_classifier=dstar)
    ref = dropoutgan.train_dropout(train, dropoutgan.DropoutGanConfig(cfg, 1, 0.0), seed=42, probe_classifier=dstar)
    tail = b.log[-20:]
    factors = [max(r.g_loss / r.mean_active_loss, r.mean_active_loss / r.g_loss) for r in tail]
    inf_tail = sum(r.bot_human_ratio.infinite for r in tail)
    inf_all = sum(r.bot_human_ratio.infinite for r in b.log)
    ref_tail = ref.log[-20:]
    ref_factor = max(max(r.g_loss / r.mean_active_loss, r.mean_active_loss / r.g_loss) for r in ref_tail)
    ok = max(factors) <= 3.0 and inf_tail == 0
    return ok, (f"k=5: worst g/d factor over final 20 epochs {max(factors):.3f} (limit 3), infinite ratios "
                f"final 20: {inf_tail}, whole run: {inf_all}; k=1,theta=0 reference worst factor {ref_factor:.3f}, "
                f"final g_loss {ref.log[-1].g_loss:.3f} vs d_loss {ref.log[-1].mean_active_loss:.3f}")


def c08_degenerate_equivalence():
    _, train, _, _ = _fixtures.synth_split()
    cfg = gan.GanConfig(epochs=3)
    a = gan.train_rf_gan(train, cfg, seed=42)
    b = dropoutgan.train_dropout(train, dropoutgan.DropoutGanConfig(cfg, 1, 0.0), seed=42)
    same_log = [(r.epoch, r.d_loss, r.g_loss) for r in a.log] == [(r.epoch, r.disc_losses[0], r.g_loss) for r in b.log]
    same_params = a.generator.equals(b.generator) and a.discriminator.equals(b.discriminators[0])
    return same_log and same_params, f"identical logs: {same_log}; identical parameters: {same_params}"


def c09_determinism_persistence():
    ds, train, val, test = _fixtures.synth_split()
    cfg = gan.GanConfig(epochs=5)
    a = gan.train_conventional(train, val, cfg, seed=42)
    b = gan.train_conventional(train, val, cfg, seed=42)
    same_log = a.log.records == b.log.records
    with tempfile.TemporaryDirectory() as tmp:
        ck = Checkpoint("gan", {"generator": a.generator, "discriminator": a.discriminator}, cfg.to_dict(), 42, 5)
        save_checkpoint(ck, f"{tmp}/a.dgck")
        back = load_checkpoint(f"{tmp}/a.dgck")
        save_checkpoint(back, f"{tmp}/b.dgck")
        bit_exact = Path(f"{tmp}/a.dgck").read_bytes() == Path(f"{tmp}/b.dgck").read_bytes()
        x = test.features.astype(np.float64)
        la, lb = nncore.predict(a.discriminator, x), nncore.predict(back["discriminator"], x)
        mask = np.all(np.abs(la) <= 10, axis=1)
        diff = float(np.abs(la[mask] - lb[mask]).max())
        dataio.write_bdf(ds, f"{tmp}/d.bdf")
        bdf_ok = dataio.read_bdf(f"{tmp}/d.bdf").equals(ds)
    ok = same_log and diff <= 1e-5 and bit_exact and bdf_ok
    return ok, (f"5-epoch logs identical: {same_log}; checkpoint max |logit diff| {diff:.1e} on {int(mask.sum())} "
                f"rows (limit 1e-5), re-save bit-exact: {bit_exact}; BDF round trip exact: {bdf_ok}")


def c10_percentile_closeness():
    ordered = [(1, 1), (1, 0), (0, 0), (0, 1), (1, 1), (0, 0), (1, 1), (1, 1), (1, 1), (0, 0),
               (0, 0), (0, 0), (0, 0), (0, 0), (0, 1), (1, 0), (1, 0), (0, 0), (0, 0), (0, 0)]
    created = [i // 2 / 10 for i in range(20)]
    physical = [i for pair in reversed(range(10)) for i in (2 * pair, 2 * pair + 1)]
    x = np.array([[created[i], ordered[i][1]] for i in physical], dtype=float)
    y = np.array([ordered[i][0] for i in physical], dtype=np.uint8)
    ds = dataio.Dataset(x, y, ("created", "pred"), created_at_index=0)
    bands = evalmetrics.percentile_f1(lambda f: (f[:, 1] > 0.5).astype(int), ds, 25)
    table_ok = [b.f1 for b in bands] == [4 / 6, 10 / 12, 10 / 13, 10 / 15]

    real = dataio.Dataset(np.array([[0.5], [0.5], [0.9]]), np.array([0, 0, 1], dtype=np.uint8), ("f",))
    close = evalmetrics.closeness_from_samples(np.array([[0.52], [0.53]]), real, 0.05)[0].close_count
    boundary_ok = close == 1 and evalmetrics.closeness_from_samples(np.array([[0.52]]), real)[0].close_count == 1

    rng = np.random.default_rng(10)
    real = dataio.Dataset(rng.random((200, 6)), rng.integers(0, 2, 200).astype(np.uint8), tuple("abcdef"))
    samples = rng.random((500, 6))
    prev, monotone = None, True
    for tol in np.sort(rng.random(20)):
        rows = evalmetrics.closeness_from_samples(samples, real, float(tol))
        counts = np.array([r.close_count for r in sorted(rows, key=lambda r: r.feature_index)])
        if prev is not None and np.any(counts < prev):
            monotone = False
        prev = counts
    ok = table_ok and boundary_ok and monotone
    return ok, (f"band F1 table {[round(b.f1, 6) for b in bands]} matches hand table: {table_ok}; "
                f"boundary 0.52 close / 0.53 not: {boundary_ok}; monotone over 20 tolerances: {monotone}")


def c11_baselines():
    _, train, _, test = _fixtures.synth_split()
    accs = {}
    for i, kind in enumerate(baselines.KINDS):
        m = baselines.train_baseline(kind, train, None, stream(42, "baseline", i))
        accs[kind] = float(np.mean(baselines.predict(m, test.features) == test.labels))
    hp = {"n_trees": 1, "bootstrap": False, "max_features": "all", "max_depth": None}
    forest = baselines.train_baseline("random_forest", train, hp, np.random.default_rng(0))
    tree = baselines.fit_tree(train.features.astype(np.float64), train.labels.astype(np.int64))
    t0 = forest.trees[0]
    same = (np.array_equal(baselines.predict(forest, test.features), tree.predict(test.features))
            and np.array_equal(t0.feature, tree.feature) and np.array_equal(t0.threshold, tree.threshold))
    ok = all(a >= 0.90 for a in accs.values()) and same
    return ok, ", ".join(f"{k} {v:.4f}" for k, v in accs.items()) + f" (need >= 0.90); RF(1 tree) == tree: {same}"


def c12_mgtab_optional():
    path = os.environ.get("BOTGAN_MGTAB_BDF")
    if not path or not Path(path).exists():
        raise Skip("MGTAB not available (set BOTGAN_MGTAB_BDF to a BDF export)")
    ds = dataio.read_bdf(path)
    sp = dataio.split_80_10_10(ds, stream(42, "split"))
    ranking = features.information_gain(ds.subset(sp.train))
    top_name = ds.feature_names[ranking.order[0]]
    top_ig = float(ranking.scores[ranking.order[0]])
    top_ok = top_name.replace("_", " ").lower() == "followers friends ratio" and abs(top_ig - 0.391857) <= 0.05
    sel = features.select_top_k(ds, ranking, min(100, ds.n_features))
    train, val, test = sel.subset(sp.train), sel.subset(sp.validation), sel.subset(sp.test)
    conv = gan.train_conventional(train, val, gan.GanConfig(), seed=42)
    acc, _ = evalmetrics.hb_eval(conv.discriminator, test)
    acc_ok = abs(acc * 100 - 99.3) <= 2.0
    rows = dropoutgan.sweep_discriminator_count(train, test, gan.GanConfig(), range(1, 11), 42,
                                                dstar=conv.discriminator)
    by_k = {r.k: r.dstar_accuracy for r in rows}
    order_ok = max(by_k[k] for k in range(5, 11)) < min(by_k[k] for k in (2, 3, 4))
    g5 = dropoutgan.train_dropout(train, dropoutgan.DropoutGanConfig(gan.GanConfig(), 5, 0.5), 42).generator

    def trainer(aug, run_seed):
        return evalmetrics.hb_eval(gan.train_conventional(aug, None, gan.GanConfig(), run_seed).discriminator, test)

    aug = evalmetrics.augmentation_sweep(trainer, train, g5, [0.5, 1.0], 42, repeats=10)
    delta = max(abs(aug[1].test_accuracy - aug[0].test_accuracy), abs(aug[1].test_loss - aug[0].test_loss))
    aug_ok = delta <= 0.15
    ok = top_ok and acc_ok and order_ok and aug_ok
    return ok, (f"top feature {top_name!r} IG {top_ig:.6f} ok={top_ok}; D* acc {acc * 100:.2f} ok={acc_ok}; "
                f"k-ordering ok={order_ok} {by_k}; augmentation delta {delta:.3f} ok={aug_ok}")


CRITERIA = [
    (1, "gradient oracle", c01_gradient_oracle),
    (2, "Adam closed form", c02_adam_closed_form),
    (3, "BCE stability", c03_bce_stability),
    (4, "information-gain oracle", c04_information_gain),
    (5, "metrics oracles", c05_metrics_oracles),
    (6, "end-to-end synthetic training", c06_end_to_end_synthetic),
    (7, "Dropout-GAN balance", c07_dropout_balance),
    (8, "degenerate equivalence", c08_degenerate_equivalence),
    (9, "determinism and persistence", c09_determinism_persistence),
    (10, "percentile and closeness oracles", c10_percentile_closeness),
    (11, "baseline sanity", c11_baselines),
    (12, "MGTAB reproduction (optional)", c12_mgtab_optional),
]


def run_criterion(number: int):
    _, name, fn = CRITERIA[number - 1]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
        status = "PASS" if ok else "FAIL"
    except Skip as exc:
        ok, status, detail = None, "SKIP", str(exc)
    line = f"[{status}] criterion {number:2d} {name}: {detail} [{time.perf_counter() - t0:.1f}s]"
    print(line, flush=True)
    _fixtures.ACCEPTANCE_LINES.append(line)
    return ok, line


# --- pytest entry points ----------------------------------------------------

def _check(number):
    import pytest

    ok, line = run_criterion(number)
    if ok is None:
        pytest.skip(line)
    assert ok, line


def test_criterion_01_gradient_oracle():
    _check(1)


def test_criterion_02_adam_closed_form():
    _check(2)


def test_criterion_03_bce_stability():
    _check(3)


def test_criterion_04_information_gain_oracle():
    _check(4)


def test_criterion_05_metrics_oracles():
    _check(5)


def test_criterion_06_end_to_end_synthetic():
    _check(6)


def test_criterion_07_dropout_gan_balance():
    _check(7)


def test_criterion_08_degenerate_equivalence():
    _check(8)


def test_criterion_09_determinism_and_persistence():
    _check(9)


def test_criterion_10_percentile_and_closeness():
    _check(10)


def test_criterion_11_baseline_sanity():
    _check(11)


def test_criterion_12_mgtab_optional():
    _check(12)


if __name__ == "__main__":
    results = [run_criterion(n)[0] for n, _, _ in CRITERIA]
    sys.exit(0 if all(r is not False for r in results) else 1)
