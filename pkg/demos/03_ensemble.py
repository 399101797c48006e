"""
=======================================
Training, voting and saving an ensemble
=======================================

Fits the bagged ensemble on the synthetic flows, inspects per-tree votes,
saves it to a ``.etg`` file and checks that parallel training gives the same
bytes as serial training.
"""

import tempfile
from pathlib import Path

import numpy as np

from iot_extratrees import EnsembleParams, clean, fit, fit_preprocess, load_csv, train_test_split
from iot_extratrees.container import dumps, load_model, save_model

from _flows import write_flows

workdir = Path(tempfile.mkdtemp())
table, _ = clean(load_csv(write_flows(workdir / "flows.csv"), "label"))
split = train_test_split(table.row_count, 0.7, 42)
pre = fit_preprocess(table, split.train_indices)
X, y = pre.transform(table.take(split.train_indices))
Xt, yt = pre.transform(table.take(split.test_indices))

###############################################################################
# 100 trees, sqrt(m) features per node, bootstrap draws.

params = EnsembleParams(n_trees=100, seed=42)
model = fit(X, y, params, classes=pre.classes, feature_names=pre.feature_names, preprocess=pre)
print("features per node:", model.params.tree_params.k_features)
print("test accuracy:", np.mean(model.predict(Xt) == yt))

###############################################################################
# Vote shares are the fraction of trees choosing each class; the prediction
# is the class with the most votes.

shares = model.vote_shares(Xt[:5])
for row, pred in zip(shares, model.predict(Xt[:5])):
    print(np.round(row, 2), "->", model.classes[pred])

###############################################################################
# Per-tree seeds depend only on (seed, tree index), so worker count does not
# change the model.

serial = dumps(fit(X, y, EnsembleParams(20, seed=7), classes=pre.classes))
parallel = dumps(fit(X, y, EnsembleParams(20, seed=7), classes=pre.classes, n_jobs=2))
print("serial == parallel:", serial == parallel)

path = workdir / "model.etg"
save_model(model, path)
back = load_model(path)
print("reloaded predictions identical:", np.array_equal(back.predict(Xt), model.predict(Xt)))
