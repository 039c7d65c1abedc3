"""
Datasets: CSV ingestion and export, the synthetic benchmark generator, irrelevant-column augmentation
"""

from .augment import augment_irrelevant
from .csv_io import load_csv, read_numeric_csv, write_csv, write_ground_truth
from .synthetic import (
    COMPONENT_MEANS,
    COVARIATE_RANGES,
    TRUE_COMPONENTS,
    TRUE_SUPPORT,
    SyntheticData,
    centered_component,
    component_mean,
    covariate_range,
    f1,
    f2,
    f3,
    f4,
    generate_synthetic,
    make_rng,
)

__all__ = [
    'COMPONENT_MEANS',
    'COVARIATE_RANGES',
    'TRUE_COMPONENTS',
    'TRUE_SUPPORT',
    'SyntheticData',
    'augment_irrelevant',
    'centered_component',
    'component_mean',
    'covariate_range',
    'f1',
    'f2',
    'f3',
    'f4',
    'generate_synthetic',
    'load_csv',
    'make_rng',
    'read_numeric_csv',
    'write_csv',
    'write_ground_truth',
]
