# Flow-map training data: generation and CSV persistence
from .csv_io import DatasetParseError, EmptyDatasetError, load_dataset, parse_dataset, save_dataset
from .sampling import Box, Dataset, DatasetError, sample_pairs, sample_trajectory

__all__ = [
    "Box",
    "Dataset",
    "DatasetError",
    "DatasetParseError",
    "EmptyDatasetError",
    "load_dataset",
    "parse_dataset",
    "sample_pairs",
    "sample_trajectory",
    "save_dataset",
]
