"""Topological mapping of colonoscopy submap sequences.

Builds a graph of places from an ordered sequence of metric submaps, merging
submaps that observe the same colon region. Localization combines a windowed
topological prior, a learned pairwise-similarity score and a keypoint
match-count verifier, and results are scored with a precision/recall
protocol against manual covisibility labels.
"""

from .errors import (BackendError, ColontopoError, ConfigError, DimensionError,
                     FormatError, GraphError, PipelineError, UnknownIdError)
from .evaluation import (EvalCounts, GroundTruth, VariantResult, ablation_variants,
                         classify_decision, classify_session, evaluate_session,
                         precision_recall)
from .graph import Keyframe, Submap, TopoGraph, TopoNode
from .ingestion import (DescriptorStore, SessionManifest, load_config,
                        load_count_table, load_descriptors, load_ground_truth,
                        load_score_table, load_session, load_weights,
                        write_descriptors, write_weights)
from .matching import (CountDistribution, MatchBackend, MatchSearchResult,
                       OracleMatchBackend, TableMatchBackend,
                       geometric_localization, sample_triplet)
from .similarity import (MlpLayer, MlpSimilarityBackend, MlpWeights,
                         OracleSimilarityBackend, SimilarityBackend,
                         TableSimilarityBackend, descriptor_diff, mlp_forward,
                         softmax_sim)
from .simulator import (ExpectedDecision, World, WorldConfig, expected_decisions,
                        generate_world, oracle_backends, write_world)
from .slam import (LocalizationDecision, SlamConfig, decide, node_score,
                   retrieval_localization, run_session, submap_score)

__version__ = "0.1.0"
