"""
Metrics, impact and account age
===============================

Classification metrics come in a bot-positive and a macro variant. Impact
weights each account by followers times posts; the signed impact sum tells
how much reach a classifier would have caught or missed.
"""

import numpy as np

from botgan import dataio, evalmetrics

pred = np.array([1, 1, 1, 0, 0, 0, 0, 0, 0, 0])
true = np.array([1, 1, 0, 1, 0, 0, 0, 0, 0, 0])
m = evalmetrics.classification_metrics(pred, true)
print("bot-positive:", m.binary)
print("macro:       ", m.macro)

###############################################################################
# Two accounts: the first holds three quarters of the reach.
imp = evalmetrics.impact_scores([3, 1], [1, 1])
print("impacts", imp.impact, "-> mitigation", evalmetrics.impact_mitigation([1, 1], [1, 0], imp))

###############################################################################
# F1 on the oldest 25%, 50%, ... of accounts, using a noisy oracle.
ds = dataio.synth_generate(dataio.SynthConfig(n_rows=400, n_features=5, seed=2))
rng = np.random.default_rng(0)
noisy = np.where(rng.random(ds.n_rows) < 0.1, 1 - ds.labels, ds.labels)
lookup = {row.tobytes(): p for row, p in zip(ds.features, noisy)}
for band in evalmetrics.percentile_f1(lambda x: np.array([lookup[r.tobytes()] for r in x]), ds, 25):
    print(f"oldest {band.band_upper_percentile:5.1f}%: F1 {band.f1:.3f} on {band.n_rows} rows")

###############################################################################
# Closeness: how often a sample sits within 5% of the human mean.
samples = ds.features[ds.labels == 0][:100]
for row in evalmetrics.closeness_from_samples(samples, ds)[:3]:
    print(f"{row.feature_name}: {row.close_count} of 100 close")
