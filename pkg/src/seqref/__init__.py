"""Reference-based sequence classification.

Select reference sequences from training data (all / clustering /
multiple-hypothesis-testing / pattern-mining), embed every sequence as its
vector of similarities to those references, and classify with built-in
KNN or naive Bayes under a repeated stratified cross-validation harness.
"""

from .classify import (
    ClassifierConfig,
    CvConfig,
    EvalReport,
    KnnConfig,
    cross_validate,
    gnb_fit,
    gnb_predict,
    knn_predict,
    stratified_folds,
)
from .datasets import parse_dataset, synth_gen, write_dataset
from .features import FeatureMatrix, export_arff, export_csv, transform
from .patterns import (
    DiscriminativeSpec,
    MiningConfig,
    Pattern,
    PatternStats,
    discriminative_eval,
    interestingness,
    mine_frequent,
    select_pattern_references,
)
from .refselect import (
    MhtReport,
    NoReferencesError,
    ReferenceSet,
    SelectionMethod,
    bh_select,
    mann_whitney_p,
    select_all,
    select_gahc,
    select_mht,
    select_references,
)
from .seqcore import (
    Alphabet,
    GapBounds,
    LabeledSequence,
    Sequence,
    SequenceDataset,
    embeds_with_gap,
    is_subsequence,
    min_window,
    occount_nonoverlap,
    partition_by_class,
    support,
)
from .similarity import (
    SimilarityMatrix,
    SimilaritySpec,
    edit_distance,
    evaluate,
    jaccard_lcs,
    lcs_len,
    lcs_min_norm,
    similarity_matrix,
    ssk_normalized,
    ssk_raw,
)

__version__ = "0.1.0"
