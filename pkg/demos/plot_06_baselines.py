"""
Reference classifiers
=====================

k-NN, a linear SVM, an MLP and a random forest, all trained through one
``train_baseline`` call and scored on the same held-out split.
"""

import numpy as np

from botgan import baselines, dataio, evalmetrics
from botgan.rng import stream

ds = dataio.synth_generate(dataio.SynthConfig(n_rows=2000, n_features=20, seed=11))
sp = dataio.split_80_10_10(ds, stream(11, "split"))
train, test = ds.subset(sp.train), ds.subset(sp.test)

overrides = {"random_forest": {"n_trees": 20}, "mlp": {"epochs": 10}}
for i, kind in enumerate(baselines.KINDS):
    model = baselines.train_baseline(kind, train, overrides.get(kind), np.random.default_rng(i))
    m = evalmetrics.classification_metrics(baselines.predict(model, test.features), test.labels)
    print(f"{kind:<14} accuracy {m.binary.accuracy:.3f}  F1 {m.binary.f1:.3f}")
