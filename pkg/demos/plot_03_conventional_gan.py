"""
A conventional GAN as a bot classifier
======================================

The discriminator has two heads: one separates humans from bots, the other
real from generated accounts. The generator also emits a label unit, so we
can watch how many of its samples the discriminator calls bots.
"""

from botgan import dataio, gan
from botgan.evalmetrics import hb_eval
from botgan.rng import stream

ds = dataio.synth_generate(dataio.SynthConfig(n_rows=3000, n_features=30, seed=7))
sp = dataio.split_80_10_10(ds, stream(7, "split"))
train, val, test = ds.subset(sp.train), ds.subset(sp.validation), ds.subset(sp.test)

cfg = gan.GanConfig(epochs=15, hidden_widths=(64, 64))
bundle = gan.train_conventional(train, val, cfg, seed=7)

print("epoch  d_loss  g_loss  bots:humans  val_acc")
for r in bundle.log:
    ratio = r.bot_human_ratio
    shown = "inf" if ratio.infinite else f"{ratio.value:.2f}"
    print(f"{r.epoch:5d}  {r.d_loss:6.3f}  {r.g_loss:6.3f}  {shown:>11}  {r.hb_validation_accuracy:.3f}")

print("first collapsed epoch:", gan.detect_mode_collapse(bundle.log))
acc, loss = hb_eval(bundle.discriminator, test)
print(f"test accuracy {acc:.3f}, loss {loss:.4f}")
