"""
=====================
The seven-metric report
=====================

Computes accuracy, precision, recall, F1, Cohen's kappa, ROC AUC and error
rate from labels and vote shares, and shows why weighted recall always equals
accuracy.
"""

import numpy as np

from iot_extratrees.metrics import ConfusionMatrix, full_report, weighted_precision_recall_f1

###############################################################################
# A small two-class example: four "Attack" rows with one missed, two
# "Benign" rows both right.

y_true = [0, 0, 0, 0, 1, 1]
y_pred = [0, 0, 0, 1, 1, 1]
shares = np.array([[0.9, 0.1], [0.8, 0.2], [0.7, 0.3], [0.4, 0.6], [0.2, 0.8], [0.1, 0.9]])

report = full_report(y_true, y_pred, shares, ["Attack", "Benign"])
print(report.text_report())
print(report.confusion.to_csv())

###############################################################################
# Support-weighted recall sums true positives over all classes and divides
# by the row count, which is exactly accuracy.

rng = np.random.default_rng(0)
cm = ConfusionMatrix(rng.integers(0, 50, size=(5, 5)))
p, r, f1, _ = weighted_precision_recall_f1(cm)
print("weighted recall", r, "accuracy", cm.tp.sum() / cm.n)
