"""Dataset ingestion, preprocessing, splits and experiment scenarios."""

from actalarm.data.dataset import Dataset
from actalarm.data.idx import load_idx, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels
from actalarm.data.tabular import ColumnKind, CsvSchema, Preprocessor, load_csv, read_csv_rows
from actalarm.data.scenarios import (
    SCENARIOS,
    ExperimentScenario,
    ScenarioData,
    build_scenario,
    scenario_preset,
    split_dataset,
    split_indices,
)

__all__ = [
    "ColumnKind",
    "CsvSchema",
    "Dataset",
    "ExperimentScenario",
    "Preprocessor",
    "SCENARIOS",
    "ScenarioData",
    "build_scenario",
    "load_csv",
    "load_idx",
    "read_csv_rows",
    "read_idx_images",
    "read_idx_labels",
    "scenario_preset",
    "split_dataset",
    "split_indices",
    "write_idx_images",
    "write_idx_labels",
]
