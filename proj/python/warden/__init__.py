"""Python bindings for the warden core library."""

from ._warden import (
    ChangeEntry,
    CustomerRecord,
    DecisionTree,
    DecodeError,
    Error,
    Forest,
    Gender,
    UntrainableData,
    ValidationError,
    Warehouse,
    build_forest,
    build_tree,
    confusion,
    decode_csv,
    discretize,
    encode_csv,
    encode_json,
    errors_from_predictions,
    fit_standardizer,
    format_csv_row,
    gini,
    render_report,
    report,
    retrain,
    select_features,
    standardize,
    train_test_split,
    tune_tree,
)

__all__ = [name for name in dir() if not name.startswith("_")]
