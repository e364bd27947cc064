"""Deterministic explainable texture-image classification, from scratch.

Tiny CNN families trained on a synthetic two-class "tissue texture"
benchmark, class-evidence heatmaps with ground-truth localization
scoring, exact binary metrics, and the full Likert survey battery with a
consistency auditor for published summaries. Everything is numpy
float64, seeded, and reproducible to the byte.
"""

__version__ = "0.1.0"

from .dataset import GenParams, LabeledImage, LabeledSet, generate, load_dir, save_dir, split
from .gradcam import Heatmap, gradcam_compute, localization_score, overlay
from .metrics import ConfusionMatrix, MetricReport, confusion, score
from .models import ArchitectureSpec, TrainHistory, build, classify, train
from .network import Network
from .surveystats import (SurveyMatrix, cronbach_alpha, descriptives,
                          load_survey_csv, ols_simple, pearson,
                          ttest_from_summary, ttest_independent)
from .audit import Finding, audit_reported, parse_record
from .tdist import t_distribution_sf

__all__ = [
    "__version__",
    "ArchitectureSpec", "ConfusionMatrix", "Finding", "GenParams", "Heatmap",
    "LabeledImage", "LabeledSet", "MetricReport", "Network", "SurveyMatrix",
    "TrainHistory", "audit_reported", "build", "classify", "confusion",
    "cronbach_alpha", "descriptives", "generate", "gradcam_compute",
    "load_dir", "load_survey_csv", "localization_score", "ols_simple",
    "overlay", "parse_record", "pearson", "save_dir", "score", "split",
    "t_distribution_sf", "train", "ttest_from_summary", "ttest_independent",
]
