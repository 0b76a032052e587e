"""Reviewer-to-paper assignment engine.

Scores every (paper, reviewer) edge from declared conference topics and/or
reviewer bids, predicts missing bids with an iterative collaborative
filtering loop, and assigns reviewers with exact or heuristic capacity-aware
matching. See the ``revmatch`` CLI for file-based workflows.
"""

from .assign import (
    AssignmentOutcome,
    SortedColumns,
    assign_greedy,
    assign_heuristic,
    assign_hungarian,
    brute_force_optimal,
    hungarian_pass,
)
from .core import (
    DEFAULT_SCALE,
    AssignmentSet,
    BidLevel,
    BidScale,
    Dataset,
    PaperDescriptor,
    ReviewerDescriptor,
    SimilarityMatrix,
    TopicSelection,
    TopicVocabulary,
    ValidationReport,
    validate_dataset,
    weight_of_matching,
)
from .gen import generate_dataset, generate_truth
from .ratings import (
    IrmState,
    Rating,
    RatingTable,
    initial_samples,
    irm_iteration,
    predict_rating,
    reviewer_similarity,
    simulate_bidder,
)
from .similarity import (
    SimilarityMethod,
    bid_weight,
    build_similarity_matrix,
    combined_weight,
    dice,
    easychair_coarse,
    jaccard,
    weighted_absolute,
    weighted_relative,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentOutcome",
    "AssignmentSet",
    "BidLevel",
    "BidScale",
    "DEFAULT_SCALE",
    "Dataset",
    "IrmState",
    "PaperDescriptor",
    "Rating",
    "RatingTable",
    "ReviewerDescriptor",
    "SimilarityMatrix",
    "SimilarityMethod",
    "SortedColumns",
    "TopicSelection",
    "TopicVocabulary",
    "ValidationReport",
    "assign_greedy",
    "assign_heuristic",
    "assign_hungarian",
    "bid_weight",
    "brute_force_optimal",
    "build_similarity_matrix",
    "combined_weight",
    "dice",
    "easychair_coarse",
    "generate_dataset",
    "generate_truth",
    "hungarian_pass",
    "initial_samples",
    "irm_iteration",
    "jaccard",
    "predict_rating",
    "reviewer_similarity",
    "simulate_bidder",
    "validate_dataset",
    "weight_of_matching",
    "weighted_absolute",
    "weighted_relative",
]
