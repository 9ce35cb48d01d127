"""Offline exporters for the topological mapping pipeline: per-keyframe
descriptors, pairwise keypoint match counts, and portable classifier
weights, all in the formats the primary package ingests."""

from .descriptors import compute_descriptors, export_descriptors
from .errors import CheckpointError, ExportError, ImageError, JobError
from .job import ExportJob, load_job, load_manifest_view
from .match_export import (compute_match_counts, export_match_counts,
                           triplet_grid_pairs)
from .weights_export import export_mlp_weights

__version__ = "0.1.0"
