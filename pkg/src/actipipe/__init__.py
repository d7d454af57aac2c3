"""Actigraphy pipeline: binning, activity/rest segmentation, entropy
feature banks, KNN/LOOCV evaluation, correlation tables and synthetic
cohorts."""

from .config import RunConfig
from .errors import (
    ActipipeError,
    DegenerateLabelsError,
    EmptySeriesError,
    FormatError,
    InsufficientDataError,
    UndefinedStatisticError,
)
from .ingest import (
    ActigramSeries,
    Dataset,
    SubjectRecord,
    bin_raw,
    load_dataset,
    parse_actigram,
    parse_actigrams,
    parse_subjects,
    sc_to_class,
)
from .model import ModelConfig, evaluate_confusion, forward_select, loocv
from .segmentation import Segmentation, SegmentationConfig, segment_pipeline
from .synth import SynthConfig, generate_cohort

__version__ = "0.1.0"

__all__ = [
    "ActipipeError",
    "ActigramSeries",
    "Dataset",
    "DegenerateLabelsError",
    "EmptySeriesError",
    "FormatError",
    "InsufficientDataError",
    "ModelConfig",
    "RunConfig",
    "Segmentation",
    "SegmentationConfig",
    "SubjectRecord",
    "SynthConfig",
    "UndefinedStatisticError",
    "bin_raw",
    "evaluate_confusion",
    "forward_select",
    "generate_cohort",
    "load_dataset",
    "loocv",
    "parse_actigram",
    "parse_actigrams",
    "parse_subjects",
    "sc_to_class",
    "segment_pipeline",
    "__version__",
]
