"""
Synthetic accounts, binary datasets and information gain
========================================================

We generate a labeled synthetic account table, store it in the BDF format,
split it 80/10/10 and rank its features by information gain.
"""

import tempfile
from pathlib import Path

from botgan import dataio, features
from botgan.rng import stream

ds = dataio.synth_generate(dataio.SynthConfig(n_rows=2000, n_features=20, cluster_separation=0.8, seed=1))
print(ds.n_rows, "rows,", ds.n_features, "features; class counts", ds.class_counts())

###############################################################################
# BDF round trip: features are stored as 32-bit floats, so this is exact.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "accounts.bdf"
    dataio.write_bdf(ds, path)
    print("round trip identical:", dataio.read_bdf(path).equals(ds), f"({path.stat().st_size} bytes)")

###############################################################################
# A stratified split; ranking only looks at the training part.
split = dataio.split_80_10_10(ds, stream(1, "split"))
print("split sizes:", len(split.train), len(split.validation), len(split.test))
ranking = features.information_gain(ds.subset(split.train))
for rank, j in enumerate(ranking.top(5), 1):
    print(f"{rank}. {ds.feature_names[j]:<10} {ranking.scores[j]:.4f} bits")

top = features.select_top_k(ds, ranking, 5)
print("kept columns:", top.feature_names)
