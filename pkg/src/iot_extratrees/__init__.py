"""Bagged Gini-tree ensemble for IoT attack detection on flow-feature CSVs."""

from .container import load_model, save_model
from .data_ingest import ColumnSchema, DataError, RawTable, infer_schema, load_csv, write_csv
from .ensemble import EnsembleParams, ExtraTreesModel, bootstrap_indices, fit, grid_search
from .metrics import ConfusionMatrix, MetricsReport, build_confusion, full_report
from .preprocess import (
    CategoryEncoder,
    CleanReport,
    PreprocessModel,
    SplitSpec,
    Standardizer,
    apply_encoder,
    apply_standardizer,
    clean,
    fit_encoder,
    fit_preprocess,
    fit_standardizer,
    train_test_split,
)
from .tree import DecisionTree, TreeParams, build_tree, find_best_split, gini, split_impurity

__version__ = "0.1.0"
