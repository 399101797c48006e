"""
===========================
Growing one tree by hand
===========================

Shows the split search on a tiny table and the tree it produces: every
midpoint between neighbouring values is tried, and the one with the lowest
weighted Gini impurity wins.
"""

import numpy as np

from iot_extratrees.tree import TreeParams, build_tree, find_best_split, gini, split_impurity

###############################################################################
# Impurity of a node and of a candidate split.

print("gini([3, 1])            =", gini([3, 1]))
print("split [1,0] | [1,2]     =", split_impurity([1, 0], [1, 2]))

###############################################################################
# The XOR pattern cannot be separated by any single threshold, so the root
# split is a tie at impurity 0.5 (feature 0 wins as the lower index) and a
# second level finishes the job.

X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
y = np.array([0, 1, 1, 0])

print(find_best_split(range(4), [0, 1], X, y))
tree = build_tree(range(4), X, y, TreeParams(k_features=2), rng_seed=0)
print("depth", tree.depth, "leaves", tree.leaf_count)
print(tree.root)
print("predictions:", tree.predict(X))
