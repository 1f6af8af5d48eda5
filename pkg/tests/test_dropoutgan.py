import numpy as np
import pytest

from botgan import dropoutgan, gan
from botgan.dropoutgan import DropoutGanConfig
from botgan.errors import ConfigError, DomainError, ShapeError
from botgan.evalmetrics import hb_eval
from botgan.gan import GanConfig

TINY = GanConfig(noise_dim=8, hidden_widths=(16,), batch_size=32, probe_size=50, epochs=2)


def _cfg(k=3, theta=0.5, **kw):
    base = GanConfig(**{**TINY.to_dict(), **kw})
    return DropoutGanConfig(base, k, theta)


def test_k_below_one_is_config_error(small_data):
    with pytest.raises(ConfigError):
        dropoutgan.train_dropout(small_data, _cfg(k=0), seed=0)


def test_select_active_never_empty():
    rng = np.random.default_rng(0)
    for _ in range(500):
        a = dropoutgan.select_active(rng, 3, 0.99)
        assert len(a) >= 1 and all(0 <= i < 3 for i in a)
    # threshold 0 keeps everything (u > 0 almost surely)
    assert dropoutgan.select_active(rng, 4, 0.0) == (0, 1, 2, 3)


def test_activation_frequency_near_half():
    rng = np.random.default_rng(123)
    k, epochs = 5, 2000
    counts = np.zeros(k)
    for _ in range(epochs):
        counts[list(dropoutgan.select_active(rng, k, 0.5))] += 1
    freq = counts / epochs
    # the forced-member rule adds about 0.5**5 / 5 per discriminator
    assert np.all(np.abs(freq - 0.5) <= 0.05), freq


def test_activation_frequency_in_training_log(small_data):
    # 2000 epochs puts the +-5% band beyond three standard errors
    epochs = 2000
    cfg = _cfg(k=5, epochs=epochs, batch_size=240, hidden_widths=(4,), noise_dim=2)
    b = dropoutgan.train_dropout(small_data, cfg, seed=9)
    counts = np.zeros(5)
    for r in b.log:
        assert len(r.active) >= 1
        counts[list(r.active)] += 1
        assert all((l is None) == (i not in r.active) for i, l in enumerate(r.disc_losses))
    assert np.all(np.abs(counts / epochs - 0.5) <= 0.05), counts / epochs


def test_one_generator_update_per_minibatch(small_data):
    b = dropoutgan.train_dropout(small_data, _cfg(k=4, epochs=3, batch_size=50), seed=1)
    assert b.generator_steps == 3 * 5
    # each discriminator stepped once per minibatch of each epoch it was active in
    for i, steps in enumerate(b.discriminator_steps):
        assert steps == 5 * sum(i in r.active for r in b.log)


def test_degenerate_config_matches_rf_gan(small_data):
    a = gan.train_rf_gan(small_data, TINY, seed=7)
    b = dropoutgan.train_dropout(small_data, DropoutGanConfig(TINY, 1, 0.0), seed=7)
    assert [(r.d_loss, r.g_loss) for r in a.log] == [(r.disc_losses[0], r.g_loss) for r in b.log]
    assert a.generator.equals(b.generator)
    assert a.discriminator.equals(b.discriminators[0])


def test_deterministic_and_worker_invariant(small_data):
    a = dropoutgan.train_dropout(small_data, _cfg(k=3, epochs=3), seed=5)
    b = dropoutgan.train_dropout(small_data, _cfg(k=3, epochs=3), seed=5, workers=3)
    assert a.log == b.log
    assert a.generator.equals(b.generator)


def test_refine_zero_epochs_returns_unchanged(small_data):
    conv = gan.train_conventional(small_data, None, TINY, seed=1)
    dg = dropoutgan.train_dropout(small_data, _cfg(), seed=2)
    out, log = dropoutgan.refine_dstar(conv.discriminator, dg.generator, small_data, 0, seed=3)
    assert out.equals(conv.discriminator) and out is not conv.discriminator
    assert len(log) == 0


def test_refine_shape_mismatch(small_data):
    conv = gan.train_conventional(small_data, None, TINY, seed=1)
    other = small_data.select_columns([0, 1, 2])
    dg = dropoutgan.train_dropout(other, _cfg(), seed=2)
    with pytest.raises(ShapeError):
        dropoutgan.refine_dstar(conv.discriminator, dg.generator, small_data, 1, seed=3)


def test_evaluate_empty_test_set(small_data):
    conv = gan.train_conventional(small_data, None, TINY, seed=1)
    with pytest.raises(DomainError):
        dropoutgan.evaluate_dstar_vs_gstar(conv.discriminator, conv.generator, small_data.subset([]))


def test_sweep_single_k_shape(small_data):
    conv = gan.train_conventional(small_data, None, TINY, seed=1)
    rows = dropoutgan.sweep_discriminator_count(small_data, small_data, TINY, [1], seed=0,
                                                dstar=conv.discriminator)
    assert len(rows) == 1 and rows[0].k == 1
    assert list(dropoutgan.sweep_rows(rows)[0]) == ["k", "dstar_test_accuracy", "dstar_test_loss"]


def test_dropout_log_csv(small_data, tmp_path):
    b = dropoutgan.train_dropout(small_data, _cfg(k=2), seed=4)
    p = tmp_path / "log.csv"
    dropoutgan.write_dropout_log_csv(b.log, p)
    lines = p.read_text().splitlines()
    assert lines[0].endswith("d0_loss,d1_loss") and len(lines) == 3


# --- seeded fixtures on the 10,000-row synthetic set ----------------------

def test_dstar_beats_own_generator(conventional_bundle, synth_fixture):
    res = dropoutgan.evaluate_dstar_vs_gstar(conventional_bundle.discriminator, conventional_bundle.generator,
                                             synth_fixture[3])
    assert res["rf_accuracy"] > 0.5


def test_refined_dstar_keeps_hb_accuracy(conventional_bundle, synth_fixture):
    _, train, _, test = synth_fixture
    before, _ = hb_eval(conventional_bundle.discriminator, test)
    refined, log = dropoutgan.refine_dstar(conventional_bundle.discriminator, conventional_bundle.generator,
                                           train, 5, seed=42)
    after, _ = hb_eval(refined, test)
    assert len(log) == 5
    assert abs(after - before) <= 0.01


def test_sweep_accuracy_non_increasing_in_k(conventional_bundle, synth_fixture):
    _, train, _, test = synth_fixture
    rows = dropoutgan.sweep_discriminator_count(train, test, GanConfig(epochs=20), [1, 3, 5], seed=42,
                                                dstar=conventional_bundle.discriminator)
    acc = [r.dstar_accuracy for r in rows]
    assert acc[0] >= acc[1] >= acc[2], acc
