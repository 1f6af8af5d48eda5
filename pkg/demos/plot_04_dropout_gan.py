"""
Dropout-GAN: one generator, several gated discriminators
========================================================

Each epoch a random subset of discriminators is switched on. We train a
Dropout-GAN, inspect the active sets and then ask the conventional
discriminator (D*) how well it still spots the new generator's (G*) samples.
"""

from botgan import dataio, dropoutgan, gan
from botgan.rng import stream

ds = dataio.synth_generate(dataio.SynthConfig(n_rows=3000, n_features=30, seed=3))
sp = dataio.split_80_10_10(ds, stream(3, "split"))
train, test = ds.subset(sp.train), ds.subset(sp.test)

base = gan.GanConfig(epochs=15, hidden_widths=(64, 64))
dstar = gan.train_conventional(train, None, base, seed=3).discriminator

dg = dropoutgan.train_dropout(train, dropoutgan.DropoutGanConfig(base, 5, 0.5), seed=4, probe_classifier=dstar)
for r in dg.log[:5]:
    print(f"epoch {r.epoch}: active {r.active}, g_loss {r.g_loss:.3f}, mean d_loss {r.mean_active_loss:.3f}")

print("frozen D* vs G*:", dropoutgan.evaluate_dstar_vs_gstar(dstar, dg.generator, test))
refined, _ = dropoutgan.refine_dstar(dstar, dg.generator, train, 3, seed=5, config=base)
print("refined D* vs G*:", dropoutgan.evaluate_dstar_vs_gstar(refined, dg.generator, test))
