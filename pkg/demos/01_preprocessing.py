"""
=========================================
Cleaning and encoding a flow-feature table
=========================================

Walks one CSV through the preparation steps: load, drop duplicates, turn
infinite values into missing cells, drop incomplete rows, split 70/30, then
standardize numeric columns and encode text columns using statistics from
the training rows only.
"""

import tempfile
from pathlib import Path

import numpy as np

from iot_extratrees import clean, fit_preprocess, load_csv, train_test_split

from _flows import write_flows

workdir = Path(tempfile.mkdtemp())
path = write_flows(workdir / "flows.csv")

###############################################################################
# Load and look at the inferred column kinds. ``protocol`` holds text so it
# becomes categorical; the label column is always categorical.

table = load_csv(path, label_column="label")
for col in table.schema:
    print(f"{col.index:2d} {col.name:<16} {col.kind}")
print("rows:", table.row_count)

###############################################################################
# Cleaning reports what each stage removed.

cleaned, report = clean(table)
print(report)

###############################################################################
# Split, then fit the transforms on the training part only.

split = train_test_split(cleaned.row_count, train_fraction=0.7, seed=42)
print("train/test:", len(split.train_indices), len(split.test_indices))

pre = fit_preprocess(cleaned, split.train_indices)
print("label vocabulary:", pre.classes)
print("protocol codes:", pre.encoder.codes("protocol"))

X_train, y_train = pre.transform(cleaned.take(split.train_indices))
print("standardized train means:", np.round(X_train[:, :4].mean(axis=0), 12))
print("standardized train stds: ", np.round(X_train[:, :4].std(axis=0), 12))
